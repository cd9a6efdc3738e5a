#pragma once

#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "swarmform/kinematics.hpp"

namespace swarmform {

enum class Side { kLeader, kLeft, kRight, kUnassigned };

struct Role {
  Side side = Side::kUnassigned;
  std::optional<int> source_id;  // member the role was copied from
  // Shortest sensing-graph path to the leader this step (sum of ranges);
  // infinite when the robot is cut off from the leader.
  double leader_path = std::numeric_limits<double>::infinity();

  friend bool operator==(const Role&, const Role&) = default;
};

enum class FormationMode { kVShape, kFlocking };

inline constexpr double kSideDeadband = 0.2;  // m

/// V-shape geometry. Left-side members sit behind-left of their target, which
/// in the desired-pose convention is a bearing of -pi/4; right-side members
/// use +pi/4.
struct FormationSpec {
  double l_d = 1.0;
  double phi_left = -std::numbers::pi / 4;
  double phi_right = std::numbers::pi / 4;
  FormationMode mode = FormationMode::kVShape;
};

/// What one robot knows at a step: its own heading and what it detects.
struct Observation {
  int id = -1;
  double heading = 0;
  std::vector<Detection2d> detections;  // sorted by ascending range
};

/// Cascade role assignment. Robots that see the leader pick LEFT or RIGHT
/// from their lateral position in the leader's frame; the others copy the
/// side of their nearest already-assigned neighbour, round by round, until
/// nothing changes. Output is aligned with `robots`.
///
/// `previous` (aligned with `robots`, or empty) carries last step's roles: a
/// robot the cascade cannot reach keeps its previous side, and counts as
/// assigned for its neighbours.
///
/// A robot that sees the leader from almost straight behind (|lateral| below
/// kSideDeadband) keeps its previous side instead of flipping on noise.
///
/// Every role also carries the robot's shortest path length to the leader
/// through the sensing graph (0 for the leader).
std::vector<Role> assign_roles(std::span<const Observation> robots,
                               int leader_id,
                               std::span<const Role> previous = {});

struct Target {
  int id = -1;
  Pose2d pose;  // world frame
  double l_d = 0;
  double phi_d = 0;
};

/// Leader path length of each robot, by id.
using LeaderPaths = std::unordered_map<int, double>;

/// V-shape target: the nearest detection in the top-left (RIGHT members) or
/// top-right (LEFT members) body-frame quadrant, falling back to the nearest
/// detection overall. Range ties go to the lowest id. No detections, or a
/// role without a side, yields nullopt.
///
/// When `paths` is given and the robot itself is connected to the leader,
/// only members strictly closer to the leader (by leader path) are
/// candidates, so the follow graph is a tree rooted at the leader.
std::optional<Target> select_target(const Pose2d& self, const Role& role,
                                    std::span<const Detection2d> detections,
                                    const FormationSpec& spec,
                                    const LeaderPaths* paths = nullptr);

/// Leader paths of a role assignment, keyed by robot id.
LeaderPaths leader_paths(std::span<const Observation> robots,
                         std::span<const Role> roles);

/// Flocking reference: centroid of the detected members and the circular mean
/// of their headings, both in the world frame. Distance and bearing to it are
/// unconstrained (l_d = phi_d = 0).
std::optional<Target> flocking_reference(const Pose2d& self,
                                         std::span<const Detection2d> detections);

/// Circular mean of angles, in (-pi, pi].
double circular_mean(std::span<const double> angles);

/// If some detection ahead of the robot (|bearing| < pi/2) is closer than
/// d_s, stop and turn away from the nearest such intruder at full rate. A
/// bearing of exactly zero turns toward +omega.
Twist2d collision_override(const Twist2d& twist,
                           std::span<const Detection2d> detections, double d_s,
                           double omega_max);

}  // namespace swarmform
