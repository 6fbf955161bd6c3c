#include "cacc/cf_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cacc::cf {

double idm_accel(const IdmParams& p, double v, double dv_closing, double s) {
  if (s <= 0.0) throw std::domain_error("idm_accel: non-positive gap");
  if (v < 0.0) throw std::domain_error("idm_accel: negative speed");
  double s_star = p.s0 + v * p.T + v * dv_closing / (2.0 * std::sqrt(p.a_max * p.b));
  s_star = std::max(s_star, p.s0);
  const double ratio = s_star / s;
  return p.a_max * (1.0 - std::pow(v / p.v0, p.delta) - ratio * ratio);
}

double idm_equilibrium_gap(const IdmParams& p, double v) {
  if (v < 0.0 || v >= p.v0) throw std::domain_error("idm_equilibrium_gap: need 0 <= v < v0");
  return (p.s0 + v * p.T) / std::sqrt(1.0 - std::pow(v / p.v0, p.delta));
}

double krauss_accel(const KraussParams& p, double v, double v_pred, double g, double dt) {
  if (g <= 0.0) throw std::domain_error("krauss_accel: non-positive gap");
  if (dt <= 0.0) throw std::domain_error("krauss_accel: non-positive dt");
  if (!std::isfinite(v) || !std::isfinite(v_pred) || !std::isfinite(g))
    throw std::domain_error("krauss_accel: non-finite input");
  const double v_safe = v_pred + (g - v_pred * p.t_r) / ((v_pred + v) / (2.0 * p.b) + p.t_r);
  const double v_des = std::min({v_safe, v + p.a_max * dt, p.v0});
  return std::clamp((v_des - v) / dt, -p.b, p.a_max);
}

}  // namespace cacc::cf
