#include "swarmform/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace swarmform {

namespace {

void check(bool ok, const char* key, const char* what) {
  if (!ok) throw ConfigError(key, what);
}

Eigen::Vector2d straight_end(const LeaderPath& p, const Eigen::Vector2d& start) {
  return p.to.value_or(start + Eigen::Vector2d(0.0, p.length));
}

}  // namespace

void ScenarioConfig::validate() const {
  check(n_robots >= 3, "n_robots", "must be >= 3");
  check(n_robots % 2 == 1, "n_robots", "must be odd");
  check(area_side > 0, "area_side", "must be > 0");
  check(d_s > 0, "d_s", "must be > 0");
  check(formation.l_d > d_s, "formation.l_d", "must exceed d_s");
  check(sensor_range > formation.l_d, "sensor_range", "must exceed formation.l_d");
  check(speed_limits.v_max > 0, "speed_limits.v_max", "must be > 0");
  check(speed_limits.omega_max > 0, "speed_limits.omega_max", "must be > 0");
  check(dt > 0, "dt", "must be > 0");
  check(max_steps >= 1, "max_steps", "must be >= 1");

  check(leader_path.speed > 0, "leader_path.speed", "must be > 0");
  check(leader_path.hold_time >= 0, "leader_path.hold_time", "must be >= 0");
  if (leader_path.kind == PathKind::kUTurn) {
    check(leader_path.leg >= 0, "leader_path.leg", "must be >= 0");
    check(leader_path.radius > 0, "leader_path.radius", "must be > 0");
  } else if (!leader_path.to) {
    check(leader_path.length > 0, "leader_path.length", "must be > 0");
  } else {
    check((*leader_path.to - leader_start(n_robots)).norm() > 0,
          "leader_path.to", "must differ from the leader start");
  }

  check(bso.population_size >= 2, "bso.population_size", "must be >= 2");
  check(bso.perc_e > 0 && bso.perc_e < 100, "bso.perc_e", "must lie in (0, 100)");
  check(bso::elite_count(bso.population_size, bso.perc_e) <
            static_cast<std::size_t>(bso.population_size),
        "bso.perc_e", "leaves no normals");
  check(bso.p_e >= 0 && bso.p_e <= 1, "bso.p_e", "must lie in [0, 1]");
  check(bso.p_one >= 0 && bso.p_one <= 1, "bso.p_one", "must lie in [0, 1]");
  check(bso.slope > 0, "bso.slope", "must be > 0");
  check(bso.disruption_prob >= 0 && bso.disruption_prob <= 1,
        "bso.disruption_prob", "must lie in [0, 1]");
  check(bso.gain_min <= bso.gain_max, "bso.gain_max", "must be >= bso.gain_min");
  check(bso.rollout.horizon >= 1, "bso.rollout.horizon", "must be >= 1");
  check(bso.rollout.violation_penalty >= 0, "bso.rollout.violation_penalty",
        "must be >= 0");
  check(bso.rollout.w_theta >= 0, "bso.rollout.w_theta", "must be >= 0");
  check(bso.refresh_period >= 1, "bso.refresh_period", "must be >= 1");

  check(convergence.threshold > 0, "convergence.threshold", "must be > 0");
  check(convergence.dwell >= 1, "convergence.dwell", "must be >= 1");
}

bso::BsoConfig ScenarioConfig::bso_config() const {
  bso::BsoConfig c = bso::BsoConfig::with_box(9, bso.gain_min, bso.gain_max);
  c.population_size = bso.population_size;
  c.perc_e = bso.perc_e;
  c.p_e = bso.p_e;
  c.p_one = bso.p_one;
  c.slope = bso.slope;
  c.disruption_prob = bso.disruption_prob;
  c.update_inside_loop = bso.update_inside_loop;
  c.max_iter = static_cast<int>(max_steps);
  return c;
}

Eigen::Vector2d leader_start(int n_robots) {
  const double c = (n_robots - 1) / 2.0;
  return {c, c};
}

double path_length(const LeaderPath& path, const Eigen::Vector2d& start) {
  if (path.kind == PathKind::kUTurn) {
    return 2.0 * path.leg + std::numbers::pi * path.radius;
  }
  return (straight_end(path, start) - start).norm();
}

namespace {

LeaderSample straight_at(const LeaderPath& p, const Eigen::Vector2d& start,
                         double s, bool moving) {
  const Eigen::Vector2d end = straight_end(p, start);
  const Eigen::Vector2d d = end - start;
  const double len = d.norm();
  const Eigen::Vector2d u = d / len;
  const Eigen::Vector2d pos = start + std::min(s, len) * u;
  const double heading = std::atan2(u.y(), u.x());
  return {{pos.x(), pos.y(), wrap_angle(heading)},
          {moving && s < len ? p.speed : 0.0, 0.0}};
}

LeaderSample uturn_at(const LeaderPath& p, const Eigen::Vector2d& start,
                      double s, bool moving) {
  const double sign = p.turn_right ? -1.0 : 1.0;  // angular direction
  const double h0 = std::numbers::pi / 2;         // initial heading: +y
  const Eigen::Vector2d u(std::cos(h0), std::sin(h0));
  const Eigen::Vector2d normal(-u.y() * sign, u.x() * sign);  // toward centre
  const double arc = std::numbers::pi * p.radius;
  const double total = 2.0 * p.leg + arc;
  s = std::clamp(s, 0.0, total);
  const bool running = moving && s < total;

  if (s <= p.leg) {
    const Eigen::Vector2d pos = start + s * u;
    return {{pos.x(), pos.y(), wrap_angle(h0)}, {running ? p.speed : 0.0, 0.0}};
  }
  const Eigen::Vector2d arc_start = start + p.leg * u;
  const Eigen::Vector2d centre = arc_start + p.radius * normal;
  if (s <= p.leg + arc) {
    const double swept = (s - p.leg) / p.radius;
    const double heading = h0 + sign * swept;
    const Eigen::Vector2d radial = arc_start - centre;
    const Eigen::Vector2d pos = centre + rotation(sign * swept) * radial;
    const double w = running ? sign * p.speed / p.radius : 0.0;
    return {{pos.x(), pos.y(), wrap_angle(heading)},
            {running ? p.speed : 0.0, w}};
  }
  const Eigen::Vector2d back_start = centre + (centre - arc_start);
  const Eigen::Vector2d pos = back_start - (s - p.leg - arc) * u;
  return {{pos.x(), pos.y(), wrap_angle(h0 + std::numbers::pi)},
          {running ? p.speed : 0.0, 0.0}};
}

}  // namespace

LeaderSample leader_at(const LeaderPath& path, const Eigen::Vector2d& start,
                       double t) {
  const double moving_time = t - path.hold_time;
  const bool moving = moving_time >= 0;
  const double s = std::max(0.0, moving_time) * path.speed;
  return path.kind == PathKind::kUTurn ? uturn_at(path, start, s, moving)
                                       : straight_at(path, start, s, moving);
}

std::pair<double, double> arc_window(const LeaderPath& path) {
  const double begin = path.hold_time + path.leg / path.speed;
  const double end =
      begin + std::numbers::pi * path.radius / path.speed;
  return {begin, end};
}

}  // namespace swarmform
