#include "cacc/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cacc::nn {

ParamSet::Entry& ParamSet::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (has(name)) throw std::invalid_argument("ParamSet: duplicate entry " + name);
  entries.push_back({name, Eigen::MatrixXd::Zero(rows, cols), Eigen::MatrixXd::Zero(rows, cols)});
  return entries.back();
}

ParamSet::Entry& ParamSet::at(const std::string& name) {
  for (Entry& e : entries)
    if (e.name == name) return e;
  throw std::invalid_argument("ParamSet: no entry " + name);
}

const ParamSet::Entry& ParamSet::at(const std::string& name) const {
  for (const Entry& e : entries)
    if (e.name == name) return e;
  throw std::invalid_argument("ParamSet: no entry " + name);
}

bool ParamSet::has(const std::string& name) const {
  for (const Entry& e : entries)
    if (e.name == name) return true;
  return false;
}

void ParamSet::zero_grads() {
  for (Entry& e : entries) e.grad.setZero();
}

Eigen::Index ParamSet::parameter_count() const {
  Eigen::Index n = 0;
  for (const Entry& e : entries) n += e.value.size();
  return n;
}

void MlpSpec::validate() const {
  // input/output of 0 is allowed so a zero-width message channel stays
  // expressible; hidden layers must be real.
  if (input_dim < 0 || output_dim < 0) throw std::invalid_argument("MlpSpec: negative dim");
  for (int h : hidden_dims)
    if (h < 1) throw std::invalid_argument("MlpSpec: hidden dims must be >= 1");
}

namespace {

const char kMagic[8] = {'C', 'A', 'C', 'C', 'N', 'E', 'T', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

int layer_in(const MlpSpec& s, int l) {
  return l == 0 ? s.input_dim : s.hidden_dims[static_cast<std::size_t>(l) - 1];
}

int layer_out(const MlpSpec& s, int l) {
  return l == s.n_layers() - 1 ? s.output_dim : s.hidden_dims[static_cast<std::size_t>(l)];
}

void apply_activation(Activation act, Eigen::VectorXd& z) {
  switch (act) {
    case Activation::linear: return;
    case Activation::relu: z = z.cwiseMax(0.0); return;
    case Activation::tanh: z = z.array().tanh(); return;
  }
}

// Gradient through the activation, expressed from the post-activation value.
void apply_activation_grad(Activation act, const Eigen::VectorXd& out, Eigen::VectorXd& g) {
  switch (act) {
    case Activation::linear: return;
    case Activation::relu:
      g = (out.array() > 0.0).select(g, 0.0);
      return;
    case Activation::tanh:
      g.array() *= 1.0 - out.array().square();
      return;
  }
}

}  // namespace

ParamSet init_mlp_params(const MlpSpec& spec, std::mt19937_64& rng, double final_layer_scale) {
  spec.validate();
  ParamSet params;
  for (int l = 0; l < spec.n_layers(); ++l) {
    const int in = layer_in(spec, l);
    const int out = layer_out(spec, l);
    const double bound = in > 0 ? 1.0 / std::sqrt(static_cast<double>(in)) : 1.0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    const double scale = l == spec.n_layers() - 1 ? final_layer_scale : 1.0;
    Eigen::MatrixXd& W = params.add("W" + std::to_string(l), out, in).value;
    for (Eigen::Index c = 0; c < W.cols(); ++c)
      for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, c) = scale * dist(rng);
    Eigen::MatrixXd& b = params.add("b" + std::to_string(l), out, 1).value;
    for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, 0) = scale * dist(rng);
  }
  return params;
}

Eigen::VectorXd forward(const MlpSpec& spec, const ParamSet& params,
                        const Eigen::VectorXd& input, Tape* tape) {
  if (input.size() != spec.input_dim) throw std::invalid_argument("forward: input dim mismatch");
  if (tape) {
    tape->input = input;
    tape->activations.clear();
    tape->activations.reserve(static_cast<std::size_t>(spec.n_layers()));
    tape->stamp = params.mutations;
  }
  Eigen::VectorXd h = input;
  for (int l = 0; l < spec.n_layers(); ++l) {
    const Eigen::MatrixXd& W = params.at("W" + std::to_string(l)).value;
    const Eigen::MatrixXd& b = params.at("b" + std::to_string(l)).value;
    Eigen::VectorXd z = W * h + b.col(0);
    apply_activation(l == spec.n_layers() - 1 ? spec.output_activation : spec.hidden_activation,
                     z);
    h = std::move(z);
    if (tape) tape->activations.push_back(h);
  }
  return h;
}

Eigen::VectorXd backward(const MlpSpec& spec, ParamSet& params, const Tape& tape,
                         const Eigen::VectorXd& output_grad) {
  if (tape.stamp != params.mutations)
    throw std::invalid_argument("backward: tape is stale, parameters were mutated");
  if (static_cast<int>(tape.activations.size()) != spec.n_layers())
    throw std::invalid_argument("backward: tape does not match spec");
  if (output_grad.size() != spec.output_dim)
    throw std::invalid_argument("backward: output grad dim mismatch");

  Eigen::VectorXd g = output_grad;
  for (int l = spec.n_layers() - 1; l >= 0; --l) {
    apply_activation_grad(
        l == spec.n_layers() - 1 ? spec.output_activation : spec.hidden_activation,
        tape.activations[static_cast<std::size_t>(l)], g);
    const Eigen::VectorXd& h_in =
        l == 0 ? tape.input : tape.activations[static_cast<std::size_t>(l) - 1];
    ParamSet::Entry& W = params.at("W" + std::to_string(l));
    ParamSet::Entry& b = params.at("b" + std::to_string(l));
    W.grad.noalias() += g * h_in.transpose();
    b.grad.col(0) += g;
    g = W.value.transpose() * g;
  }
  return g;
}

AdamState AdamState::for_params(const ParamSet& params, double lr) {
  AdamState s;
  s.lr = lr;
  s.m.reserve(params.entries.size());
  s.v.reserve(params.entries.size());
  for (const ParamSet::Entry& e : params.entries) {
    s.m.push_back(Eigen::MatrixXd::Zero(e.value.rows(), e.value.cols()));
    s.v.push_back(Eigen::MatrixXd::Zero(e.value.rows(), e.value.cols()));
  }
  return s;
}

void adam_step(ParamSet& params, AdamState& opt) {
  if (opt.m.size() != params.entries.size())
    throw std::invalid_argument("adam_step: optimizer state does not match params");
  ++opt.step;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    ParamSet::Entry& e = params.entries[i];
    opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * e.grad;
    opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * e.grad.cwiseProduct(e.grad);
    e.value.array() -=
        opt.lr * (opt.m[i].array() / bc1) / ((opt.v[i].array() / bc2).sqrt() + opt.eps);
    e.grad.setZero();
  }
  params.touch();
}

void soft_update(ParamSet& target, const ParamSet& online, double tau) {
  if (target.entries.size() != online.entries.size())
    throw std::invalid_argument("soft_update: entry count mismatch");
  for (std::size_t i = 0; i < target.entries.size(); ++i) {
    ParamSet::Entry& t = target.entries[i];
    const ParamSet::Entry& o = online.entries[i];
    if (t.name != o.name || t.value.rows() != o.value.rows() || t.value.cols() != o.value.cols())
      throw std::invalid_argument("soft_update: mismatched entry " + t.name);
    t.value = (1.0 - tau) * t.value + tau * o.value;
  }
  target.touch();
}

Net Net::init(const MlpSpec& spec, std::mt19937_64& rng, double final_layer_scale) {
  return Net{spec, init_mlp_params(spec, rng, final_layer_scale)};
}

const ParamSet& Checkpoint::at(const std::string& name) const {
  for (const auto& [n, ps] : paramsets)
    if (n == name) return ps;
  throw std::invalid_argument("checkpoint: no paramset " + name);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, ps] : paramsets)
    if (n == name) return true;
  return false;
}

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_str(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw std::runtime_error("checkpoint: truncated file");
  return v;
}

std::string read_str(std::istream& is) {
  const std::uint32_t len = read_u32(is);
  if (len > (1u << 20)) throw std::runtime_error("checkpoint: corrupt string length");
  std::string s(len, '\0');
  if (!is.read(s.data(), len)) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kFormatVersion);
  write_u32(os, static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    write_str(os, k);
    write_str(os, v);
  }
  write_u32(os, static_cast<std::uint32_t>(ckpt.paramsets.size()));
  for (const auto& [name, ps] : ckpt.paramsets) {
    write_str(os, name);
    write_str(os, ps.version_tag);
    write_u32(os, static_cast<std::uint32_t>(ps.entries.size()));
    for (const ParamSet::Entry& e : ps.entries) {
      write_str(os, e.name);
      write_u32(os, static_cast<std::uint32_t>(e.value.rows()));
      write_u32(os, static_cast<std::uint32_t>(e.value.cols()));
      os.write(reinterpret_cast<const char*>(e.value.data()),
               static_cast<std::streamsize>(sizeof(double)) * e.value.size());
    }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic bytes: " + path);
  const std::uint32_t version = read_u32(is);
  if (version != kFormatVersion)
    throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));

  Checkpoint ckpt;
  const std::uint32_t n_meta = read_u32(is);
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = read_str(is);
    ckpt.meta[k] = read_str(is);
  }
  const std::uint32_t n_sets = read_u32(is);
  for (std::uint32_t i = 0; i < n_sets; ++i) {
    std::string name = read_str(is);
    ParamSet ps;
    ps.version_tag = read_str(is);
    const std::uint32_t n_entries = read_u32(is);
    for (std::uint32_t j = 0; j < n_entries; ++j) {
      std::string entry_name = read_str(is);
      const std::uint32_t rows = read_u32(is);
      const std::uint32_t cols = read_u32(is);
      if (rows > (1u << 24) || cols > (1u << 24))
        throw std::runtime_error("checkpoint: corrupt array shape");
      ParamSet::Entry& e = ps.add(entry_name, rows, cols);
      if (!is.read(reinterpret_cast<char*>(e.value.data()),
                   static_cast<std::streamsize>(sizeof(double)) * e.value.size()))
        throw std::runtime_error("checkpoint: truncated array data");
    }
    ckpt.paramsets.emplace_back(std::move(name), std::move(ps));
  }
  return ckpt;
}

}  // namespace cacc::nn
