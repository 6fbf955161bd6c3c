#pragma once

#include <cmath>
#include <optional>

namespace cacc::reward {

struct RewardWeights {
  double w_g = 1.0;  // gap
  double w_s = 1.0;  // safety
  double w_c = 1.0;  // comfort
};

struct RewardParams {
  double sigma = 0.5;                            // log-normal shape
  double mu = 0.6554651081081644;                // ln(1.5) + sigma^2, peak at h = 1.5 s
  double ttc_threshold = 4.0;                    // s
  double a_max = 3.0;                            // m/s^2
  double a_min = -2.0;                           // m/s^2
  double h_cap = 100.0;                          // headway reported for a stopped vehicle
};

// Time headway, bumper to bumper. A stopped ego vehicle gets h_cap so the
// gap reward stays finite.
double headway(double x_pred, double l_pred, double x, double v,
               const RewardParams& p = {});

// Time to collision; empty when the ego vehicle is not closing in.
std::optional<double> ttc(double x_pred, double l_pred, double x, double v, double v_pred);

// First tick of an episode seeds a_prev with the initial acceleration, so
// jerk at t=0 is zero by construction.
double jerk(double a_now, double a_prev, double dt);

// Log-normal density in the time headway.
double gap_reward(double h, const RewardParams& p = {});

// log(ttc/threshold) inside (0, threshold], zero otherwise. Never positive.
double safety_reward(std::optional<double> ttc_value, const RewardParams& p = {});

// Squared jerk normalized by the usable acceleration range. Never positive.
double comfort_reward(double jerk_value, const RewardParams& p = {});

struct RewardInputs {
  double h = 0.0;
  std::optional<double> ttc;
  double jerk = 0.0;
};

double total_reward(const RewardInputs& in, const RewardWeights& w, const RewardParams& p);

}  // namespace cacc::reward
