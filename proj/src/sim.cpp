#include "swarmform/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace swarmform {

const RobotState& WorldState::robot(int id) const {
  for (const auto& r : robots) {
    if (r.id == id) return r;
  }
  throw std::out_of_range("no robot with id " + std::to_string(id));
}

bso::Rng make_rng(std::uint64_t seed, std::uint64_t stream,
                  std::uint64_t salt) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(salt), hi(salt)};
  return bso::Rng(seq);
}

std::vector<Detection2d> sense(const WorldState& world, int robot_id,
                               double sensor_range) {
  const RobotState& self = world.robot(robot_id);
  std::vector<Detection2d> out;
  for (const auto& other : world.robots) {
    if (other.id == robot_id) continue;
    const Eigen::Vector2d d = other.pose.position() - self.pose.position();
    const double range = d.norm();
    if (range > sensor_range) continue;
    out.push_back({other.id, range,
                   wrap_angle(std::atan2(d.y(), d.x()) - self.pose.theta),
                   other.pose.theta});
  }
  std::sort(out.begin(), out.end(), [](const Detection2d& a, const Detection2d& b) {
    return a.range < b.range || (a.range == b.range && a.id < b.id);
  });
  return out;
}

namespace {

struct Snapshot {
  std::vector<std::vector<Detection2d>> detections;  // aligned with robots
  std::vector<Role> roles;
  LeaderPaths paths;
};

Snapshot observe(const WorldState& world, const ScenarioConfig& cfg) {
  Snapshot s;
  std::vector<Observation> obs;
  obs.reserve(world.robots.size());
  for (const auto& r : world.robots) {
    s.detections.push_back(sense(world, r.id, cfg.sensor_range));
    obs.push_back({r.id, r.pose.theta, s.detections.back()});
  }
  std::vector<Role> previous;
  previous.reserve(world.robots.size());
  for (const auto& r : world.robots) previous.push_back(r.role);
  s.roles = assign_roles(obs, world.leader_id, previous);
  s.paths = leader_paths(obs, s.roles);
  return s;
}

std::optional<Target> pick_target(const RobotState& r, const Snapshot& snap,
                                  std::size_t i, const ScenarioConfig& cfg) {
  if (cfg.formation.mode == FormationMode::kFlocking) {
    return flocking_reference(r.pose, snap.detections[i]);
  }
  return select_target(r.pose, snap.roles[i], snap.detections[i],
                       cfg.formation, &snap.paths);
}

// Per-step motion of the desired pose, limited to what a robot could do in
// one step.
PoseDelta3d desired_rate(const Pose2d& now, const Pose2d& before,
                         const ScenarioConfig& cfg) {
  PoseDelta3d d = global_error(now, before);
  const double max_lin = cfg.speed_limits.v_max * cfg.dt;
  const double lin = d.head<2>().norm();
  if (lin > max_lin) d.head<2>() *= max_lin / lin;
  const double max_ang = cfg.speed_limits.omega_max * cfg.dt;
  d(2) = std::clamp(d(2), -max_ang, max_ang);
  return d;
}

bso::Evaluator rollout_evaluator(const RolloutState& st,
                                 const ScenarioConfig& cfg) {
  return [st, limits = cfg.speed_limits, dt = cfg.dt,
          params = cfg.bso.rollout](const bso::Vector& x) {
    return rollout_fitness(st, GainVector9d(x), limits, dt, params);
  };
}

void init_tuners(WorldState& world, const ScenarioConfig& cfg) {
  const bso::BsoConfig bcfg = cfg.bso_config();
  const Snapshot snap = observe(world, cfg);
  for (std::size_t i = 0; i < world.robots.size(); ++i) {
    RobotState& r = world.robots[i];
    r.rng = make_rng(cfg.seed, static_cast<std::uint64_t>(r.id), 1);
    if (r.id == world.leader_id) continue;
    RolloutState st{r.pose, r.twist, r.window, r.pose};
    if (auto t = pick_target(r, snap, i, cfg)) {
      st.desired = desired_pose(t->pose, t->l_d, t->phi_d);
      st.window.push(tracking_error(st.desired, r.pose));
    }
    r.tuner = bso::initialize_population(rollout_evaluator(st, cfg), bcfg, 0,
                                         r.rng);
    r.gains = r.tuner.best().position;
    r.best_fitness = r.tuner.best().fitness;
  }
}

bool connected(const std::vector<Pose2d>& poses, double range) {
  std::vector<bool> seen(poses.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t a = stack.back();
    stack.pop_back();
    for (std::size_t b = 0; b < poses.size(); ++b) {
      if (!seen[b] && (poses[a].position() - poses[b].position()).norm() <= range) {
        seen[b] = true;
        stack.push_back(b);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

std::vector<Pose2d> place(const ScenarioConfig& cfg, bso::Rng& rng) {
  constexpr int kMaxAttempts = 100000;
  std::uniform_real_distribution<double> coord(0.0, cfg.area_side);
  std::uniform_real_distribution<double> heading(-std::numbers::pi,
                                                 std::numbers::pi);
  std::vector<Pose2d> poses;
  poses.reserve(static_cast<std::size_t>(cfg.n_robots));
  const Eigen::Vector2d origin = leader_start(cfg.n_robots);
  poses.push_back({origin.x(), origin.y(), leader_at(cfg.leader_path, origin, 0).pose.theta});
  for (int i = 1; i < cfg.n_robots; ++i) {
    int attempts = 0;
    for (;;) {
      if (++attempts > kMaxAttempts) {
        throw ConfigError("area_side",
                          "cannot place " + std::to_string(cfg.n_robots) +
                              " robots at least d_s apart");
      }
      const Pose2d p{coord(rng), coord(rng), wrap_angle(heading(rng))};
      const bool clear = std::all_of(poses.begin(), poses.end(), [&](const Pose2d& q) {
        return (p.position() - q.position()).norm() >= cfg.d_s;
      });
      if (clear) {
        poses.push_back(p);
        break;
      }
    }
  }
  return poses;
}

}  // namespace

WorldState make_world(const ScenarioConfig& cfg, std::span<const Pose2d> poses) {
  if (poses.empty()) throw std::invalid_argument("make_world: no robots");
  WorldState w;
  w.leader_id = 1;
  w.leader_origin = poses[0].position();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    RobotState r;
    r.id = static_cast<int>(i) + 1;
    r.pose = poses[i];
    r.pose.theta = wrap_angle(r.pose.theta);
    w.robots.push_back(std::move(r));
  }
  w.robots[0].pose = leader_at(cfg.leader_path, w.leader_origin, 0).pose;
  w.robots[0].role.side = Side::kLeader;
  init_tuners(w, cfg);
  return w;
}

WorldState init_scenario(const ScenarioConfig& cfg, bso::Rng& rng) {
  cfg.validate();
  constexpr int kMaxPlacements = 1000;
  for (int attempt = 0; attempt < kMaxPlacements; ++attempt) {
    std::vector<Pose2d> poses = place(cfg, rng);
    if (!cfg.require_connected || connected(poses, cfg.sensor_range)) {
      return make_world(cfg, poses);
    }
  }
  throw ConfigError("sensor_range",
                    "no connected initial placement found; enlarge "
                    "sensor_range or shrink area_side");
}

void tick(WorldState& world, const ScenarioConfig& cfg,
          std::vector<TraceRecord>& out) {
  const Snapshot snap = observe(world, cfg);
  const bso::BsoConfig bcfg = cfg.bso_config();
  const std::size_t refresh_count = static_cast<std::size_t>(
      (cfg.bso.population_size + cfg.bso.refresh_period - 1) /
      cfg.bso.refresh_period);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::int64_t k = world.step;

  for (std::size_t i = 0; i < world.robots.size(); ++i) {
    RobotState& r = world.robots[i];
    TraceRecord rec;
    rec.step = k;
    rec.robot_id = r.id;
    rec.pose = r.pose;

    if (r.id == world.leader_id) {
      const LeaderSample s = leader_at(cfg.leader_path, world.leader_origin,
                                       static_cast<double>(k) * cfg.dt);
      r.twist = s.twist;
      if (cfg.leader_avoids_collisions) {
        r.twist = collision_override(r.twist, snap.detections[i], cfg.d_s,
                                     cfg.speed_limits.omega_max);
      }
      rec.twist = r.twist;
      out.push_back(rec);
      continue;
    }

    const auto target = pick_target(r, snap, i, cfg);
    r.role = snap.roles[i];
    if (!target) {
      // Hold position until something to follow appears.
      r.window.clear();
      r.target_id.reset();
      r.last_desired.reset();
      r.twist = {};
      r.control = {};
      r.error = TrackingError3d::Constant(nan);
      rec.twist = r.twist;
      rec.error = r.error;
      rec.err_norm = nan;
      rec.gains = r.gains;
      rec.best_fitness = r.best_fitness;
      out.push_back(rec);
      continue;
    }

    const Pose2d desired = desired_pose(target->pose, target->l_d, target->phi_d);
    const TrackingError3d e = tracking_error(desired, r.pose);
    const bool same_target = r.target_id && *r.target_id == target->id;
    if (r.target_id && !same_target) {
      r.window.reset_to(e);  // bumpless switch to a new target
    } else {
      r.window.push(e);
    }

    RolloutState st{r.pose, r.control, r.window, desired};
    if (same_target && r.last_desired) {
      st.desired_rate = desired_rate(desired, *r.last_desired, cfg);
    }
    const bso::Evaluator eval = rollout_evaluator(st, cfg);
    bso::refresh_stalest(r.tuner, eval, bcfg, k, refresh_count);
    const bso::Solution& best = bso::online_tuner_step(r.tuner, eval, bcfg, k, r.rng);
    r.gains = best.position;
    r.best_fitness = best.fitness;

    r.control = saturate(incremental_pid(r.window, r.gains, r.control),
                         cfg.speed_limits);
    const Twist2d cmd = collision_override(r.control, snap.detections[i], cfg.d_s,
                                           cfg.speed_limits.omega_max);
    r.twist = cmd;
    r.target_id = target->id;
    r.last_desired = desired;
    r.error = e;

    rec.twist = cmd;
    rec.error = e;
    rec.err_norm = error_norm(e, cfg.bso.rollout.w_theta);
    rec.gains = r.gains;
    rec.best_fitness = r.best_fitness;
    rec.target_id = target->id;
    out.push_back(rec);
  }

  // Second phase: every robot moves on the commands decided above.
  ++world.step;
  for (auto& r : world.robots) {
    if (r.id == world.leader_id && !cfg.leader_avoids_collisions) {
      r.pose = leader_at(cfg.leader_path, world.leader_origin,
                         static_cast<double>(world.step) * cfg.dt).pose;
    } else {
      r.pose = step_unicycle(r.pose, r.twist, cfg.dt);
    }
  }
}

Trace run_world(WorldState world, const ScenarioConfig& cfg) {
  Trace trace;
  trace.config = cfg;
  trace.leader_id = world.leader_id;
  for (const auto& r : world.robots) trace.robot_ids.push_back(r.id);
  trace.records.reserve(world.robots.size() * static_cast<std::size_t>(cfg.max_steps));

  std::int64_t dwell_run = 0;
  while (world.step < cfg.max_steps) {
    const std::size_t first = trace.records.size();
    tick(world, cfg, trace.records);
    if (!cfg.convergence.early_stop) continue;
    bool ok = true;
    for (std::size_t j = first; j < trace.records.size(); ++j) {
      const auto& rec = trace.records[j];
      if (rec.robot_id != world.leader_id &&
          !(rec.err_norm < cfg.convergence.threshold)) {
        ok = false;
      }
    }
    dwell_run = ok ? dwell_run + 1 : 0;
    if (dwell_run >= cfg.convergence.dwell) break;
  }
  return trace;
}

Trace run(const ScenarioConfig& cfg) {
  cfg.validate();
  bso::Rng rng = make_rng(cfg.seed, 0, 0);
  return run_world(init_scenario(cfg, rng), cfg);
}

}  // namespace swarmform
