#pragma once

#include "swarmform/kinematics.hpp"
#include "swarmform/pid.hpp"

namespace swarmform {

struct RolloutParams {
  int horizon = 5;
  double violation_penalty = 10.0;
  double w_theta = 1.0;
};

/// Snapshot of one follower's tracking situation, enough to simulate its
/// error dynamics forward under candidate gains.
struct RolloutState {
  Pose2d follower;
  Twist2d twist;          // command applied on the previous step
  ErrorWindow3d window;   // already contains the current error
  Pose2d desired;         // desired pose at the current step
  PoseDelta3d desired_rate = PoseDelta3d::Zero();  // per-step motion of `desired`
};

/// Tracking objective for a candidate gain vector: error norm after
/// `horizon` steps of closed-loop unicycle motion, plus a fixed penalty for
/// every step whose unsaturated command exceeds the speed limits. The
/// desired pose is extrapolated at its last observed per-step rate.
inline double rollout_fitness(const RolloutState& s, const GainVector9d& gains,
                              const SpeedLimits2d& limits, double dt,
                              const RolloutParams& p) {
  Pose2d follower = s.follower;
  Pose2d desired = s.desired;
  Twist2d twist = s.twist;
  ErrorWindow3d window = s.window;
  int violations = 0;
  for (int j = 0; j < p.horizon; ++j) {
    const Twist2d raw = incremental_pid(window, gains, twist);
    if (!within_limits(raw, limits)) ++violations;
    twist = saturate(raw, limits);
    follower = step_unicycle(follower, twist, dt);
    desired = {desired.x + s.desired_rate(0), desired.y + s.desired_rate(1),
               wrap_angle(desired.theta + s.desired_rate(2))};
    window.push(tracking_error(desired, follower));
  }
  return error_norm(window.current, p.w_theta) +
         p.violation_penalty * violations;
}

}  // namespace swarmform
