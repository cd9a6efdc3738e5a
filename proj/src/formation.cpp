#include "swarmform/formation.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

namespace swarmform {

namespace {

bool closer(const Detection2d& a, const Detection2d& b) {
  return a.range < b.range || (a.range == b.range && a.id < b.id);
}

const Detection2d* nearest(std::span<const Detection2d> ds, auto&& keep) {
  const Detection2d* best = nullptr;
  for (const auto& d : ds) {
    if (keep(d) && (best == nullptr || closer(d, *best))) best = &d;
  }
  return best;
}

Pose2d detection_pose(const Pose2d& self, const Detection2d& d) {
  const Eigen::Vector2d p = to_world(self, detection_to_relative(d));
  return {p.x(), p.y(), wrap_angle(d.heading)};
}

bool has_side(const Role& r) {
  return r.side == Side::kLeft || r.side == Side::kRight;
}

// Jacobi-style propagation: each round reads only the previous round's roles.
void cascade(std::span<const Observation> robots,
             const std::unordered_map<int, std::size_t>& index,
             std::vector<Role>& roles) {
  for (std::size_t round = 0; round + 1 < robots.size(); ++round) {
    std::vector<Role> next = roles;
    bool changed = false;
    for (std::size_t i = 0; i < robots.size(); ++i) {
      if (roles[i].side != Side::kUnassigned) continue;
      for (const auto& d : robots[i].detections) {  // ascending range
        auto it = index.find(d.id);
        if (it == index.end() || !has_side(roles[it->second])) continue;
        next[i] = Role{roles[it->second].side, d.id};
        changed = true;
        break;
      }
    }
    roles = std::move(next);
    if (!changed) break;
  }
}

}  // namespace

std::vector<Role> assign_roles(std::span<const Observation> robots,
                               int leader_id, std::span<const Role> previous) {
  std::vector<Role> roles(robots.size());
  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < robots.size(); ++i) index[robots[i].id] = i;

  // Round 0: the leader, then everyone who sees it.
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const Observation& r = robots[i];
    if (r.id == leader_id) {
      roles[i].side = Side::kLeader;
      continue;
    }
    for (const auto& d : r.detections) {
      if (d.id != leader_id) continue;
      // Our position seen from the leader is the reversed detection, rotated
      // into the leader's heading.
      const Detection2d back{d.id, d.range,
                             wrap_angle(r.heading + d.bearing - d.heading +
                                        std::numbers::pi),
                             0.0};
      const double lateral = detection_to_relative(back).y();
      const bool sticky = previous.size() == robots.size() &&
                          has_side(previous[i]) &&
                          std::abs(lateral) < kSideDeadband;
      roles[i].side = sticky                ? previous[i].side
                      : lateral > 0         ? Side::kLeft
                                            : Side::kRight;
      roles[i].source_id = leader_id;
      break;
    }
  }

  cascade(robots, index, roles);

  // Bellman-Ford over the sensing graph, starting at the leader.
  for (std::size_t i = 0; i < robots.size(); ++i) {
    if (robots[i].id == leader_id) roles[i].leader_path = 0.0;
  }
  for (std::size_t round = 0; round + 1 < robots.size(); ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < robots.size(); ++i) {
      for (const auto& d : robots[i].detections) {
        auto it = index.find(d.id);
        if (it == index.end()) continue;
        const double via = roles[it->second].leader_path + d.range;
        if (via < roles[i].leader_path) {
          roles[i].leader_path = via;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  if (previous.size() == robots.size()) {
    bool kept = false;
    for (std::size_t i = 0; i < robots.size(); ++i) {
      if (roles[i].side == Side::kUnassigned && has_side(previous[i])) {
        roles[i].side = previous[i].side;
        roles[i].source_id = previous[i].source_id;
        kept = true;
      }
    }
    if (kept) cascade(robots, index, roles);
  }
  return roles;
}

std::optional<Target> select_target(const Pose2d& self, const Role& role,
                                    std::span<const Detection2d> detections,
                                    const FormationSpec& spec,
                                    const LeaderPaths* paths) {
  if (role.side != Side::kLeft && role.side != Side::kRight) return {};
  const bool left = role.side == Side::kLeft;
  const bool ranked = paths != nullptr && std::isfinite(role.leader_path);
  auto candidate = [&](const Detection2d& d) {
    if (!ranked) return true;
    auto it = paths->find(d.id);
    return it != paths->end() && it->second < role.leader_path;
  };
  const Detection2d* pick = nearest(detections, [&](const Detection2d& d) {
    const Eigen::Vector2d rel = detection_to_relative(d);
    return candidate(d) && rel.x() > 0 && (left ? rel.y() < 0 : rel.y() > 0);
  });
  if (pick == nullptr) pick = nearest(detections, candidate);
  if (pick == nullptr) return {};
  return Target{pick->id, detection_pose(self, *pick), spec.l_d,
                left ? spec.phi_left : spec.phi_right};
}

LeaderPaths leader_paths(std::span<const Observation> robots,
                         std::span<const Role> roles) {
  LeaderPaths out;
  for (std::size_t i = 0; i < robots.size() && i < roles.size(); ++i) {
    out[robots[i].id] = roles[i].leader_path;
  }
  return out;
}

double circular_mean(std::span<const double> angles) {
  double s = 0, c = 0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  return wrap_angle(std::atan2(s, c));
}

std::optional<Target> flocking_reference(
    const Pose2d& self, std::span<const Detection2d> detections) {
  if (detections.empty()) return {};
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  std::vector<double> headings;
  headings.reserve(detections.size());
  for (const auto& d : detections) {
    centroid += detection_to_relative(d);
    headings.push_back(d.heading);
  }
  centroid /= static_cast<double>(detections.size());
  const Eigen::Vector2d world = to_world(self, centroid);
  return Target{-1, {world.x(), world.y(), circular_mean(headings)}, 0.0, 0.0};
}

Twist2d collision_override(const Twist2d& twist,
                           std::span<const Detection2d> detections, double d_s,
                           double omega_max) {
  const Detection2d* intruder = nearest(detections, [&](const Detection2d& d) {
    return d.range < d_s && std::abs(d.bearing) < std::numbers::pi / 2;
  });
  if (intruder == nullptr) return twist;
  return {0.0, intruder->bearing > 0 ? -omega_max : omega_max};
}

}  // namespace swarmform
