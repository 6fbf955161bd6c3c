#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace cacc::nn {

// Named parameter arrays with parallel gradient slots. The mutation counter
// stamps tapes so a backward pass against mutated parameters is rejected.
struct ParamSet {
  struct Entry {
    std::string name;
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
  };

  std::string version_tag = "v1";
  std::vector<Entry> entries;
  std::uint64_t mutations = 0;

  Entry& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;
  bool has(const std::string& name) const;

  void zero_grads();
  void touch() { ++mutations; }
  Eigen::Index parameter_count() const;
};

enum class Activation { linear, relu, tanh };

struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims;
  int output_dim = 1;
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::linear;

  int n_layers() const { return static_cast<int>(hidden_dims.size()) + 1; }
  void validate() const;
};

// Intermediates of one forward evaluation: the input and each layer's
// post-activation output, in order.
struct Tape {
  Eigen::VectorXd input;
  std::vector<Eigen::VectorXd> activations;
  std::uint64_t stamp = 0;
};

// Layer parameters are named W0/b0, W1/b1, ... with W holding (out x in).
ParamSet init_mlp_params(const MlpSpec& spec, std::mt19937_64& rng,
                         double final_layer_scale = 1.0);

Eigen::VectorXd forward(const MlpSpec& spec, const ParamSet& params,
                        const Eigen::VectorXd& input, Tape* tape = nullptr);

// Accumulates (+=) parameter gradients and returns the gradient with respect
// to the input, so chained modules can continue backpropagation.
Eigen::VectorXd backward(const MlpSpec& spec, ParamSet& params, const Tape& tape,
                         const Eigen::VectorXd& output_grad);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<Eigen::MatrixXd> m, v;

  static AdamState for_params(const ParamSet& params, double lr);
};

// Adaptive-moment update with bias correction; zeroes gradients afterward.
void adam_step(ParamSet& params, AdamState& opt);

void soft_update(ParamSet& target, const ParamSet& online, double tau);

// A spec plus its parameters; the unit the rest of the stack passes around.
struct Net {
  MlpSpec spec;
  ParamSet params;

  static Net init(const MlpSpec& spec, std::mt19937_64& rng, double final_layer_scale = 1.0);
};

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, ParamSet>> paramsets;

  const ParamSet& at(const std::string& name) const;
  bool has(const std::string& name) const;
};

// Binary container: magic, format version, metadata strings, then per-set
// named arrays (name, rows, cols, column-major f64). Round-trips bit-exact.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cacc::nn
