#pragma once

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cacc/cf_models.hpp"
#include "cacc/rewards.hpp"

namespace cacc::sim {

struct VehicleState {
  double x = 0.0;       // front bumper position, m
  double v = 0.0;       // m/s
  double a = 0.0;       // acceleration realized over the last tick, m/s^2
  double length = 5.0;  // m
};

// Index 0 is the replayed leader, 1..n are controlled followers.
struct PlatoonState {
  double t = 0.0;
  std::vector<VehicleState> vehicles;

  int n_followers() const { return static_cast<int>(vehicles.size()) - 1; }
  const VehicleState& leader() const { return vehicles.front(); }
};

// Eq.-style observation of one follower: [v, a, d, dv] with d the bumper-to-
// bumper gap and dv = v_pred - v_ego (positive when the predecessor is faster).
struct Observation {
  double v = 0.0;
  double a = 0.0;
  double d = 0.0;
  double dv = 0.0;

  Eigen::Vector4d vec() const { return {v, a, d, dv}; }
};

struct TrajectorySample {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;
};

struct LeaderTrajectory {
  double dt = 0.1;
  std::vector<TrajectorySample> samples;
  std::string source_id;

  double duration() const { return dt * static_cast<double>(samples.size()); }
};

enum class InitialSpeedMode { match_leader, zero, explicit_value };

struct SimConfig {
  double dt = 0.1;
  int n_followers = 3;
  double initial_spacing = -1.0;  // bumper-to-bumper gap; < 0 selects the IDM equilibrium gap
  InitialSpeedMode initial_speed_mode = InitialSpeedMode::match_leader;
  double initial_speed = 0.0;     // used by explicit_value
  double a_floor = -5.0;
  double a_ceil = 3.0;
  double collision_penalty = -100.0;
  double follower_length = 5.0;
};

struct EnvConfig {
  SimConfig sim;
  reward::RewardWeights weights;
  reward::RewardParams rparams;
  cf::IdmParams idm;  // also defines the default initial spacing
};

struct StepOutcome {
  PlatoonState next;
  std::vector<Observation> observations;  // per follower, of `next`
  Eigen::VectorXd rewards;                // per follower
  bool done = false;
  bool collision = false;
  int collision_index = -1;               // follower index (1-based), -1 if none
};

// Column-per-vehicle tick log; reward/gap/ttc/jerk hold followers only.
// Undefined TTC entries are NaN.
struct EpisodeLog {
  double dt = 0.1;
  int n_followers = 0;
  Eigen::VectorXd t;
  Eigen::MatrixXd x, v, a;                   // ticks x (1 + n_followers)
  Eigen::MatrixXd reward, gap, ttc, jerk;    // ticks x n_followers
  bool collision = false;

  long ticks() const { return t.size(); }
  void write_csv(std::ostream& os) const;
};

struct Controller {
  virtual ~Controller() = default;
  virtual void reset() {}
  // Total commanded acceleration per follower, length n_followers.
  virtual Eigen::VectorXd command(const PlatoonState& platoon, const SimConfig& cfg) = 0;
};

Observation observe(const PlatoonState& platoon, int i);

PlatoonState init_platoon(const EnvConfig& cfg, const LeaderTrajectory& traj);

StepOutcome step(const EnvConfig& cfg, const PlatoonState& platoon,
                 const Eigen::VectorXd& accels, const TrajectorySample& leader_next);

enum class ScenarioKind { constant, sinusoid, stop_and_go, replay };

struct ScenarioParams {
  double dt = 0.1;
  double duration = 60.0;       // s; the trajectory covers [0, duration)
  double cruise_speed = 15.0;   // v_c
  double amplitude = 3.0;       // sinusoid
  double period = 60.0;         // sinusoid
  double cruise_time = 10.0;    // stop-and-go: time at v_c before braking
  double decel_rate = 2.0;      // stop-and-go, m/s^2
  double hold_time = 5.0;       // stop-and-go: stopped duration
  double accel_rate = 1.5;      // stop-and-go, m/s^2
  std::string replay_path;      // replay
};

LeaderTrajectory make_scenario(ScenarioKind kind, const ScenarioParams& params);

EpisodeLog run_episode(const EnvConfig& cfg, const LeaderTrajectory& traj, Controller& controller);

// Trajectory file format: `# dt=<dt> source=<id>`, a `t,x,v,a` header, one row
// per sample. Round-trips bit-exact.
void write_trajectory_csv(const LeaderTrajectory& traj, std::ostream& os);
void write_trajectory_csv(const LeaderTrajectory& traj, const std::string& path);
LeaderTrajectory read_trajectory_csv(std::istream& is);
LeaderTrajectory read_trajectory_csv(const std::string& path);

}  // namespace cacc::sim
