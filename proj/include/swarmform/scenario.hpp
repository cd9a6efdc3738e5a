#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "swarmform/bso.hpp"
#include "swarmform/formation.hpp"
#include "swarmform/kinematics.hpp"
#include "swarmform/pid.hpp"
#include "swarmform/rollout.hpp"

namespace swarmform {

/// Invalid scenario configuration. `key()` is the dotted path of the
/// offending field (empty when not attributable to one field).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class PathKind { kStraight, kUTurn };

/// Leader trajectory. The leader starts at ((n-1)/2, (n-1)/2) and travels at
/// constant speed after an optional hold, then stops at the path's end.
struct LeaderPath {
  PathKind kind = PathKind::kStraight;
  std::optional<Eigen::Vector2d> to;  // straight only; overrides `length`
  double length = 20.0;               // straight, heading +y from the start
  double leg = 10.0;                  // u-turn straight legs
  double radius = 3.0;                // u-turn arc radius
  bool turn_right = true;             // u-turn direction (clockwise)
  double speed = 0.5;
  double hold_time = 0.0;             // seconds stationary before departure
};

struct LeaderSample {
  Pose2d pose;
  Twist2d twist;
};

/// Online gain tuner settings; bounds apply to all nine gains.
struct TunerSettings {
  int population_size = 20;
  double perc_e = 20.0;
  double p_e = 0.2;
  double p_one = 0.8;
  double slope = 20.0;
  double disruption_prob = 0.2;  // offline optimizer only
  double gain_min = 0.0;
  double gain_max = 10.0;
  bool update_inside_loop = true;
  RolloutParams rollout;
  int refresh_period = 10;  // R: max age (steps) of an archived fitness
};

struct ConvergenceSettings {
  double threshold = 0.1;
  int dwell = 100;
  bool early_stop = false;
};

struct ScenarioConfig {
  int n_robots = 11;
  double area_side = 30.0;
  double sensor_range = 10.0;
  double d_s = 0.5;
  FormationSpec formation;
  SpeedLimits2d speed_limits;
  double dt = 0.1;
  std::int64_t max_steps = 2000;
  LeaderPath leader_path;
  TunerSettings bso;
  ConvergenceSettings convergence;
  bool require_connected = true;  // initial sensing graph must be connected
  bool leader_avoids_collisions = false;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the first violated field.
  void validate() const;

  /// Optimizer configuration for the 9-D gain search over this run.
  bso::BsoConfig bso_config() const;
};

Eigen::Vector2d leader_start(int n_robots);

double path_length(const LeaderPath& path, const Eigen::Vector2d& start);

/// Leader pose and velocity at time `t` seconds.
LeaderSample leader_at(const LeaderPath& path, const Eigen::Vector2d& start,
                       double t);

/// Time interval [begin, end) during which a u-turn leader is on its arc.
std::pair<double, double> arc_window(const LeaderPath& path);

}  // namespace swarmform
