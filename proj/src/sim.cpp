#include "cacc/sim.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cacc/csv.hpp"

namespace cacc::sim {

Observation observe(const PlatoonState& platoon, int i) {
  if (i < 1 || i > platoon.n_followers())
    throw std::invalid_argument("observe: follower index out of range");
  const VehicleState& pred = platoon.vehicles[static_cast<std::size_t>(i) - 1];
  const VehicleState& ego = platoon.vehicles[static_cast<std::size_t>(i)];
  return Observation{ego.v, ego.a, pred.x - pred.length - ego.x, pred.v - ego.v};
}

PlatoonState init_platoon(const EnvConfig& cfg, const LeaderTrajectory& traj) {
  if (traj.samples.empty()) throw std::invalid_argument("init_platoon: empty trajectory");
  const SimConfig& sc = cfg.sim;
  if (sc.n_followers < 1) throw std::invalid_argument("init_platoon: need n_followers >= 1");

  PlatoonState state;
  state.t = 0.0;
  const TrajectorySample& lead = traj.samples.front();
  state.vehicles.push_back({lead.x, lead.v, lead.a, sc.follower_length});

  double v_init = 0.0;
  switch (sc.initial_speed_mode) {
    case InitialSpeedMode::match_leader: v_init = lead.v; break;
    case InitialSpeedMode::zero: v_init = 0.0; break;
    case InitialSpeedMode::explicit_value: v_init = sc.initial_speed; break;
  }
  const double gap = sc.initial_spacing >= 0.0 ? sc.initial_spacing
                                               : cf::idm_equilibrium_gap(cfg.idm, v_init);
  for (int i = 1; i <= sc.n_followers; ++i) {
    const VehicleState& pred = state.vehicles.back();
    state.vehicles.push_back({pred.x - pred.length - gap, v_init, 0.0, sc.follower_length});
  }
  return state;
}

StepOutcome step(const EnvConfig& cfg, const PlatoonState& platoon,
                 const Eigen::VectorXd& accels, const TrajectorySample& leader_next) {
  const SimConfig& sc = cfg.sim;
  const int n = platoon.n_followers();
  if (accels.size() != n) throw std::invalid_argument("step: wrong number of accelerations");
  if (!accels.allFinite()) throw std::domain_error("step: non-finite acceleration command");

  StepOutcome out;
  out.next.t = platoon.t + sc.dt;
  out.next.vehicles.resize(platoon.vehicles.size());
  out.next.vehicles[0] = {leader_next.x, leader_next.v, leader_next.a,
                          platoon.vehicles[0].length};
  for (int i = 1; i <= n; ++i) {
    const VehicleState& cur = platoon.vehicles[static_cast<std::size_t>(i)];
    const double a = std::clamp(accels[i - 1], sc.a_floor, sc.a_ceil);
    const double v = std::max(0.0, cur.v + a * sc.dt);
    out.next.vehicles[static_cast<std::size_t>(i)] = {cur.x + v * sc.dt, v, a, cur.length};
  }

  out.observations.reserve(static_cast<std::size_t>(n));
  out.rewards.resize(n);
  for (int i = 1; i <= n; ++i) {
    const Observation obs = observe(out.next, i);
    out.observations.push_back(obs);
    if (obs.d <= 0.0) {
      out.collision = true;
      if (out.collision_index < 0) out.collision_index = i;
      out.rewards[i - 1] = sc.collision_penalty;
      continue;
    }
    const VehicleState& pred = out.next.vehicles[static_cast<std::size_t>(i) - 1];
    const VehicleState& ego = out.next.vehicles[static_cast<std::size_t>(i)];
    reward::RewardInputs in;
    in.h = reward::headway(pred.x, pred.length, ego.x, ego.v, cfg.rparams);
    in.ttc = reward::ttc(pred.x, pred.length, ego.x, ego.v, pred.v);
    in.jerk = reward::jerk(ego.a, platoon.vehicles[static_cast<std::size_t>(i)].a, sc.dt);
    out.rewards[i - 1] = reward::total_reward(in, cfg.weights, cfg.rparams);
  }
  out.done = out.collision;
  return out;
}

namespace {

LeaderTrajectory from_speeds(const std::vector<double>& speeds, double dt,
                             const std::string& source_id) {
  LeaderTrajectory traj;
  traj.dt = dt;
  traj.source_id = source_id;
  traj.samples.resize(speeds.size());
  double x = 0.0;
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    if (k > 0) x += speeds[k] * dt;
    const double a = k > 0 ? (speeds[k] - speeds[k - 1]) / dt : 0.0;
    traj.samples[k] = {x, speeds[k], a};
  }
  return traj;
}

}  // namespace

LeaderTrajectory make_scenario(ScenarioKind kind, const ScenarioParams& p) {
  if (p.dt <= 0.0) throw std::invalid_argument("make_scenario: dt must be positive");
  if (p.duration <= 0.0) throw std::invalid_argument("make_scenario: duration must be positive");
  if (kind == ScenarioKind::replay) {
    LeaderTrajectory traj = read_trajectory_csv(p.replay_path);
    return traj;
  }
  if (p.cruise_speed < 0.0) throw std::invalid_argument("make_scenario: negative cruise speed");

  const long n = std::lround(p.duration / p.dt);
  if (n < 2) throw std::invalid_argument("make_scenario: duration too short for dt");
  std::vector<double> speeds(static_cast<std::size_t>(n));

  switch (kind) {
    case ScenarioKind::constant:
      for (long k = 0; k < n; ++k) speeds[static_cast<std::size_t>(k)] = p.cruise_speed;
      return from_speeds(speeds, p.dt, "constant");
    case ScenarioKind::sinusoid: {
      if (p.amplitude >= p.cruise_speed)
        throw std::invalid_argument("make_scenario: amplitude must stay below cruise speed");
      if (p.period <= 0.0) throw std::invalid_argument("make_scenario: period must be positive");
      for (long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * p.dt;
        speeds[static_cast<std::size_t>(k)] =
            p.cruise_speed + p.amplitude * std::sin(2.0 * std::numbers::pi * t / p.period);
      }
      return from_speeds(speeds, p.dt, "sinusoid");
    }
    case ScenarioKind::stop_and_go: {
      if (p.decel_rate <= 0.0 || p.accel_rate <= 0.0)
        throw std::invalid_argument("make_scenario: rates must be positive");
      const double t_brake = p.cruise_speed / p.decel_rate;
      const double t_accel = p.cruise_speed / p.accel_rate;
      const double cycle = p.cruise_time + t_brake + p.hold_time + t_accel;
      for (long k = 0; k < n; ++k) {
        double t = std::fmod(static_cast<double>(k) * p.dt, cycle);
        double v;
        if (t < p.cruise_time) {
          v = p.cruise_speed;
        } else if ((t -= p.cruise_time) < t_brake) {
          v = p.cruise_speed - p.decel_rate * t;
        } else if ((t -= t_brake) < p.hold_time) {
          v = 0.0;
        } else {
          v = p.accel_rate * (t - p.hold_time);
        }
        speeds[static_cast<std::size_t>(k)] = std::max(0.0, std::min(v, p.cruise_speed));
      }
      return from_speeds(speeds, p.dt, "stop-and-go");
    }
    case ScenarioKind::replay: break;
  }
  throw std::invalid_argument("make_scenario: unknown kind");
}

EpisodeLog run_episode(const EnvConfig& cfg, const LeaderTrajectory& traj,
                       Controller& controller) {
  if (traj.samples.size() < 2) throw std::invalid_argument("run_episode: trajectory too short");
  const int n = cfg.sim.n_followers;
  const long max_ticks = static_cast<long>(traj.samples.size());

  EpisodeLog log;
  log.dt = cfg.sim.dt;
  log.n_followers = n;
  log.t.resize(max_ticks);
  log.x.resize(max_ticks, n + 1);
  log.v.resize(max_ticks, n + 1);
  log.a.resize(max_ticks, n + 1);
  log.reward.setZero(max_ticks, n);
  log.gap.resize(max_ticks, n);
  log.ttc.resize(max_ticks, n);
  log.jerk.setZero(max_ticks, n);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto record = [&](long k, const PlatoonState& st) {
    log.t[k] = st.t;
    for (int j = 0; j <= n; ++j) {
      log.x(k, j) = st.vehicles[static_cast<std::size_t>(j)].x;
      log.v(k, j) = st.vehicles[static_cast<std::size_t>(j)].v;
      log.a(k, j) = st.vehicles[static_cast<std::size_t>(j)].a;
    }
    for (int i = 1; i <= n; ++i) {
      const Observation obs = observe(st, i);
      log.gap(k, i - 1) = obs.d;
      log.ttc(k, i - 1) = obs.d > 0.0 && obs.dv < 0.0 ? obs.d / -obs.dv : nan;
    }
  };

  PlatoonState state = init_platoon(cfg, traj);
  controller.reset();
  record(0, state);
  long ticks = 1;
  bool collided = false;
  for (int i = 1; i <= n && !collided; ++i) collided = observe(state, i).d <= 0.0;

  for (long k = 0; !collided && k + 1 < max_ticks; ++k) {
    const Eigen::VectorXd cmds = controller.command(state, cfg.sim);
    StepOutcome out = step(cfg, state, cmds, traj.samples[static_cast<std::size_t>(k + 1)]);
    record(k + 1, out.next);
    for (int i = 0; i < n; ++i) {
      log.reward(k + 1, i) = out.rewards[i];
      log.jerk(k + 1, i) =
          (out.next.vehicles[static_cast<std::size_t>(i) + 1].a -
           state.vehicles[static_cast<std::size_t>(i) + 1].a) / cfg.sim.dt;
    }
    ++ticks;
    state = std::move(out.next);
    collided = out.collision;
  }

  if (ticks < max_ticks) {
    log.t.conservativeResize(ticks);
    log.x.conservativeResize(ticks, Eigen::NoChange);
    log.v.conservativeResize(ticks, Eigen::NoChange);
    log.a.conservativeResize(ticks, Eigen::NoChange);
    log.reward.conservativeResize(ticks, Eigen::NoChange);
    log.gap.conservativeResize(ticks, Eigen::NoChange);
    log.ttc.conservativeResize(ticks, Eigen::NoChange);
    log.jerk.conservativeResize(ticks, Eigen::NoChange);
  }
  log.collision = collided;
  return log;
}

void write_trajectory_csv(const LeaderTrajectory& traj, std::ostream& os) {
  os << "# dt=" << csv::format_double(traj.dt) << " source=" << traj.source_id << '\n';
  os << "t,x,v,a\n";
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const TrajectorySample& s = traj.samples[k];
    os << csv::format_double(static_cast<double>(k) * traj.dt) << ','
       << csv::format_double(s.x) << ',' << csv::format_double(s.v) << ','
       << csv::format_double(s.a) << '\n';
  }
}

void write_trajectory_csv(const LeaderTrajectory& traj, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_trajectory_csv(traj, os);
}

LeaderTrajectory read_trajectory_csv(std::istream& is) {
  LeaderTrajectory traj;
  std::string line;
  if (!std::getline(is, line) || !line.starts_with("# dt="))
    throw std::runtime_error("trajectory file: missing '# dt=' header");
  const std::size_t sp = line.find(" source=");
  if (sp == std::string::npos) throw std::runtime_error("trajectory file: missing source tag");
  if (!csv::parse_double(std::string_view(line).substr(5, sp - 5), traj.dt) || traj.dt <= 0.0)
    throw std::runtime_error("trajectory file: bad dt");
  traj.source_id = line.substr(sp + 8);
  if (!std::getline(is, line) || csv::split_line(line) != std::vector<std::string>{"t", "x", "v", "a"})
    throw std::runtime_error("trajectory file: expected 't,x,v,a' header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    TrajectorySample s;
    double t = 0.0;
    if (fields.size() != 4 || !csv::parse_double(fields[0], t) ||
        !csv::parse_double(fields[1], s.x) || !csv::parse_double(fields[2], s.v) ||
        !csv::parse_double(fields[3], s.a))
      throw std::runtime_error("trajectory file: malformed row: " + line);
    traj.samples.push_back(s);
  }
  if (traj.samples.empty()) throw std::runtime_error("trajectory file: no samples");
  return traj;
}

LeaderTrajectory read_trajectory_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open trajectory file: " + path);
  return read_trajectory_csv(is);
}

void EpisodeLog::write_csv(std::ostream& os) const {
  os << "t,vehicle,x,v,a,reward,gap,ttc,jerk\n";
  for (long k = 0; k < ticks(); ++k) {
    for (int j = 0; j <= n_followers; ++j) {
      os << csv::format_double(t[k]) << ',' << j << ',' << csv::format_double(x(k, j)) << ','
         << csv::format_double(v(k, j)) << ',' << csv::format_double(a(k, j)) << ',';
      if (j == 0) {
        os << ",,,\n";
        continue;
      }
      const int i = j - 1;
      os << csv::format_double(reward(k, i)) << ',' << csv::format_double(gap(k, i)) << ',';
      if (std::isfinite(ttc(k, i))) os << csv::format_double(ttc(k, i));
      os << ',' << csv::format_double(jerk(k, i)) << '\n';
    }
  }
}

}  // namespace cacc::sim
