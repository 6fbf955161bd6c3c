#pragma once

#include <stdexcept>

#include "cacc/cf_models.hpp"
#include "cacc/sim.hpp"

namespace cacc::cf {

enum class Model { idm, krauss };

struct CfParams {
  IdmParams idm;
  KraussParams krauss;
};

// Bridges the observation's dv = v_pred - v_ego to each model's own sign
// convention (IDM wants the closing rate v_ego - v_pred).
inline double base_accel(Model model, const sim::Observation& obs, double dt,
                         const CfParams& p = {}) {
  if (obs.d <= 0.0) throw std::domain_error("base_accel: non-positive gap");
  switch (model) {
    case Model::idm: return idm_accel(p.idm, obs.v, -obs.dv, obs.d);
    case Model::krauss: return krauss_accel(p.krauss, obs.v, obs.v + obs.dv, obs.d, dt);
  }
  throw std::invalid_argument("base_accel: unknown model");
}

class CfController final : public sim::Controller {
 public:
  CfController(Model model, const CfParams& params = {}) : model_(model), params_(params) {}

  Eigen::VectorXd command(const sim::PlatoonState& platoon, const sim::SimConfig& cfg) override {
    Eigen::VectorXd out(platoon.n_followers());
    for (int i = 1; i <= platoon.n_followers(); ++i)
      out[i - 1] = base_accel(model_, sim::observe(platoon, i), cfg.dt, params_);
    return out;
  }

 private:
  Model model_;
  CfParams params_;
};

}  // namespace cacc::cf
