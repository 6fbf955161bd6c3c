#pragma once

namespace cacc::cf {

struct IdmParams {
  double a_max = 3.0;            // m/s^2
  double b = 2.0;                // comfortable braking, m/s^2
  double v0 = 120.0 / 3.6;       // desired speed, m/s
  double s0 = 2.0;               // minimum gap, m
  double T = 1.5;                // desired time headway, s
  double delta = 4.0;
};

struct KraussParams {
  double t_r = 1.0;              // reaction time, s
  double b = 2.0;                // max deceleration, m/s^2
  double v0 = 120.0 / 3.6;       // speed cap, m/s
  double a_max = 3.0;            // accel cap, m/s^2
};

// dv_closing = v_ego - v_pred (positive when approaching). The desired gap
// s* is floored at s0 so strong opening cannot make it negative.
double idm_accel(const IdmParams& p, double v, double dv_closing, double s);

// Gap at which idm_accel(v, 0, gap) is exactly zero.
double idm_equilibrium_gap(const IdmParams& p, double v);

double krauss_accel(const KraussParams& p, double v, double v_pred, double g, double dt);

}  // namespace cacc::cf
