#include "cacc/rewards.hpp"

#include <numbers>
#include <stdexcept>

namespace cacc::reward {

double headway(double x_pred, double l_pred, double x, double v, const RewardParams& p) {
  const double gap = x_pred - l_pred - x;
  if (gap <= 0.0) throw std::domain_error("headway: non-positive gap");
  if (v <= 0.0) return p.h_cap;
  return gap / v;
}

std::optional<double> ttc(double x_pred, double l_pred, double x, double v, double v_pred) {
  const double gap = x_pred - l_pred - x;
  if (gap <= 0.0) throw std::domain_error("ttc: non-positive gap");
  if (v > v_pred) return gap / (v - v_pred);
  return std::nullopt;
}

double jerk(double a_now, double a_prev, double dt) {
  if (dt <= 0.0) throw std::domain_error("jerk: dt must be positive");
  return (a_now - a_prev) / dt;
}

double gap_reward(double h, const RewardParams& p) {
  if (h <= 0.0) throw std::domain_error("gap_reward: non-positive headway");
  const double z = std::log(h) - p.mu;
  return std::exp(-z * z / (2.0 * p.sigma * p.sigma)) /
         (h * p.sigma * std::sqrt(2.0 * std::numbers::pi));
}

double safety_reward(std::optional<double> ttc_value, const RewardParams& p) {
  if (!ttc_value) return 0.0;
  const double t = *ttc_value;
  if (t > 0.0 && t <= p.ttc_threshold) return std::log(t / p.ttc_threshold);
  return 0.0;
}

double comfort_reward(double jerk_value, const RewardParams& p) {
  const double range = p.a_max - p.a_min;
  const double z = jerk_value / range;
  return -z * z;
}

double total_reward(const RewardInputs& in, const RewardWeights& w, const RewardParams& p) {
  return w.w_g * gap_reward(in.h, p) + w.w_s * safety_reward(in.ttc, p) +
         w.w_c * comfort_reward(in.jerk, p);
}

}  // namespace cacc::reward
