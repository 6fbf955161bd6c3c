#include "cacc/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cacc/csv.hpp"

namespace cacc::metrics {

namespace {

// Kahan compensated accumulator; aggregation must not depend on summation order
// beyond this.
class Kahan {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
    ++n_;
  }
  double sum() const { return s_; }
  double mean() const { return n_ ? s_ / static_cast<double>(n_) : 0.0; }
  long count() const { return n_; }

 private:
  double s_ = 0.0, c_ = 0.0;
  long n_ = 0;
};

std::string threshold_tag(double th) {
  std::string s = csv::format_double(th);
  for (char& c : s)
    if (c == '.') c = '_';
  return s;
}

}  // namespace

MetricsReport compute_metrics(const sim::EpisodeLog& log, const Thresholds& th, double h_cap) {
  if (log.ticks() == 0 || log.n_followers < 1)
    throw std::invalid_argument("compute_metrics: empty log");

  MetricsReport r;
  Kahan headway, abs_jerk, speed, ttc_hi, ttc_lo;
  const int n = log.n_followers;

  for (long k = 0; k < log.ticks(); ++k) {
    for (int i = 0; i < n; ++i) {
      speed.add(log.v(k, i + 1));
      abs_jerk.add(std::abs(log.jerk(k, i)));
      const double gap = log.gap(k, i);
      if (gap > 0.0) headway.add(log.v(k, i + 1) > 0.0 ? gap / log.v(k, i + 1) : h_cap);
      const double t = log.ttc(k, i);
      if (std::isfinite(t) && t > 0.0) {
        if (t < th.ttc_hi) ttc_hi.add(log.dt);
        if (t < th.ttc_lo) ttc_lo.add(log.dt);
      }
    }
  }
  r.mean_headway = headway.mean();
  r.mean_abs_jerk = abs_jerk.mean();
  r.mean_speed = speed.mean();
  r.ttc_lt_hi = ttc_hi.sum();
  r.ttc_lt_lo = ttc_lo.sum();

  Kahan leader_sq;
  for (long k = 0; k < log.ticks(); ++k) leader_sq.add(log.a(k, 0) * log.a(k, 0));
  const double leader_norm = std::sqrt(leader_sq.sum());
  r.per_vehicle_dampening.resize(n);
  if (leader_norm == 0.0) {
    r.per_vehicle_dampening.setConstant(std::numeric_limits<double>::quiet_NaN());
    r.dampening_ratio = std::nullopt;
  } else {
    Kahan mean_dp;
    for (int i = 0; i < n; ++i) {
      Kahan sq;
      for (long k = 0; k < log.ticks(); ++k) sq.add(log.a(k, i + 1) * log.a(k, i + 1));
      r.per_vehicle_dampening[i] = std::sqrt(sq.sum()) / leader_norm;
      mean_dp.add(r.per_vehicle_dampening[i]);
    }
    r.dampening_ratio = mean_dp.mean();
  }
  return r;
}

MetricsReport aggregate(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate: empty report list");

  MetricsReport out;
  Kahan headway, jerk, speed, hi, lo, dp;
  bool same_n = true;
  for (const MetricsReport& r : reports) {
    headway.add(r.mean_headway);
    jerk.add(r.mean_abs_jerk);
    speed.add(r.mean_speed);
    hi.add(r.ttc_lt_hi);
    lo.add(r.ttc_lt_lo);
    if (r.dampening_ratio) dp.add(*r.dampening_ratio);
    same_n = same_n && r.per_vehicle_dampening.size() == reports[0].per_vehicle_dampening.size();
  }
  out.mean_headway = headway.mean();
  out.mean_abs_jerk = jerk.mean();
  out.mean_speed = speed.mean();
  out.ttc_lt_hi = hi.mean();
  out.ttc_lt_lo = lo.mean();
  if (dp.count() > 0) out.dampening_ratio = dp.mean();

  if (same_n) {
    const Eigen::Index n = reports[0].per_vehicle_dampening.size();
    out.per_vehicle_dampening.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Kahan col;
      for (const MetricsReport& r : reports)
        if (std::isfinite(r.per_vehicle_dampening[i])) col.add(r.per_vehicle_dampening[i]);
      out.per_vehicle_dampening[i] =
          col.count() ? col.mean() : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

std::string csv_header(const Thresholds& th) {
  // TTC columns are platoon totals: exposure seconds summed over followers.
  return "model,headway_s,jerk_ms3,speed_ms,ttc_lt" + threshold_tag(th.ttc_hi) +
         "_total_s,ttc_lt" + threshold_tag(th.ttc_lo) + "_total_s,dampening_ratio";
}

std::string csv_row(const std::string& model, const MetricsReport& r) {
  std::string row = model + ',' + csv::format_double(r.mean_headway) + ',' +
                    csv::format_double(r.mean_abs_jerk) + ',' +
                    csv::format_double(r.mean_speed) + ',' + csv::format_double(r.ttc_lt_hi) +
                    ',' + csv::format_double(r.ttc_lt_lo) + ',';
  if (r.dampening_ratio) row += csv::format_double(*r.dampening_ratio);
  return row;
}

}  // namespace cacc::metrics
