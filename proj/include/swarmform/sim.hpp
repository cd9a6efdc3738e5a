#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "swarmform/bso.hpp"
#include "swarmform/formation.hpp"
#include "swarmform/kinematics.hpp"
#include "swarmform/pid.hpp"
#include "swarmform/scenario.hpp"
#include "swarmform/trace.hpp"

namespace swarmform {

struct RobotState {
  int id = 0;
  Pose2d pose;
  Twist2d twist;    // command applied during the last step
  Twist2d control;  // controller output before any collision override
  Role role;
  ErrorWindow3d window;
  bso::Population tuner;
  bso::Rng rng;

  // Tracking bookkeeping from the last step.
  std::optional<int> target_id;
  std::optional<Pose2d> last_desired;
  TrackingError3d error = TrackingError3d::Zero();
  GainVector9d gains = GainVector9d::Zero();
  double best_fitness = 0;
};

struct WorldState {
  std::int64_t step = 0;
  int leader_id = 1;
  Eigen::Vector2d leader_origin = Eigen::Vector2d::Zero();
  std::vector<RobotState> robots;

  const RobotState& robot(int id) const;
};

/// Independent RNG stream for (seed, stream, salt).
bso::Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt);

/// Places the leader at ((n-1)/2, (n-1)/2) and the followers uniformly in the
/// area with random headings, at least d_s apart. When
/// cfg.require_connected, whole placements are redrawn until the initial
/// sensing graph is connected. Each follower's tuner is seeded with N random
/// gain vectors scored against its initial tracking situation.
WorldState init_scenario(const ScenarioConfig& cfg, bso::Rng& rng);

/// Builds a world from explicit poses; robots[0] is the leader. Tuners are
/// initialized as in init_scenario. No config validation is applied to the
/// robot count.
WorldState make_world(const ScenarioConfig& cfg, std::span<const Pose2d> poses);

/// Exact range/bearing detections of every other robot within sensor range,
/// sorted by range (ties by id).
std::vector<Detection2d> sense(const WorldState& world, int robot_id,
                               double sensor_range);

/// Advances the world by one step and appends one record per robot (the
/// state and command at the pre-step time) to `out`. All decisions read only
/// the pre-step state; poses are integrated afterwards.
void tick(WorldState& world, const ScenarioConfig& cfg,
          std::vector<TraceRecord>& out);

/// Full run: init, then tick until max_steps or early convergence.
Trace run(const ScenarioConfig& cfg);

/// Run from a prepared world.
Trace run_world(WorldState world, const ScenarioConfig& cfg);

}  // namespace swarmform
