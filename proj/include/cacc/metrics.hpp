#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cacc/sim.hpp"

namespace cacc::metrics {

struct Thresholds {
  double ttc_hi = 4.0;
  double ttc_lo = 1.5;
};

struct MetricsReport {
  double mean_headway = 0.0;                      // s
  double mean_abs_jerk = 0.0;                     // m/s^3
  double mean_speed = 0.0;                        // m/s
  double ttc_lt_hi = 0.0;                         // exposure time, s, summed over followers
  double ttc_lt_lo = 0.0;
  std::optional<double> dampening_ratio;          // mean over followers; empty if undefined
  Eigen::VectorXd per_vehicle_dampening;          // NaN where undefined
};

// Means are taken over all follower-ticks. Headway uses h_cap for a stopped
// vehicle and skips non-positive gaps (post-collision tick). A leader with an
// all-zero acceleration profile leaves the dampening ratio undefined.
MetricsReport compute_metrics(const sim::EpisodeLog& log, const Thresholds& th = {},
                              double h_cap = 100.0);

MetricsReport aggregate(const std::vector<MetricsReport>& reports);

std::string csv_header(const Thresholds& th = {});
std::string csv_row(const std::string& model, const MetricsReport& r);

}  // namespace cacc::metrics
