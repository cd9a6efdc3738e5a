#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Core>

namespace swarmform {

/// Wraps an angle into (-pi, pi]. Throws std::domain_error on NaN/inf.
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  if (!std::isfinite(a)) {
    throw std::domain_error("wrap_angle: non-finite angle");
  }
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar r = std::remainder(a, two_pi);
  if (r <= -std::numbers::pi_v<Scalar>) {
    r += two_pi;
  }
  return r;
}

/// Planar pose. theta is kept in (-pi, pi] by every function in this header.
template <typename Scalar>
struct Pose {
  Scalar x{0};
  Scalar y{0};
  Scalar theta{0};

  Eigen::Matrix<Scalar, 2, 1> position() const { return {x, y}; }

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Unicycle control input: forward speed and turning rate.
template <typename Scalar>
struct Twist {
  Scalar v{0};
  Scalar omega{0};

  friend bool operator==(const Twist&, const Twist&) = default;
};

/// A range/bearing observation of another robot, in the observer's body frame.
/// The heading is the observed robot's broadcast heading (world frame).
template <typename Scalar>
struct Detection {
  int id{-1};
  Scalar range{0};
  Scalar bearing{0};
  Scalar heading{0};
};

/// Tracking error expressed in the follower's body frame: (e_x, e_y, e_theta).
template <typename Scalar>
using TrackingError = Eigen::Matrix<Scalar, 3, 1>;

/// World-frame pose difference (dX, dY, dTheta).
template <typename Scalar>
using PoseDelta = Eigen::Matrix<Scalar, 3, 1>;

using Pose2d = Pose<double>;
using Twist2d = Twist<double>;
using Detection2d = Detection<double>;
using TrackingError3d = TrackingError<double>;
using PoseDelta3d = PoseDelta<double>;

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> rotation(Scalar theta) {
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  Eigen::Matrix<Scalar, 2, 2> r;
  r << c, -s, s, c;
  return r;
}

/// One explicit Euler step of the unicycle model, using the heading at the
/// start of the step.
template <typename Scalar>
Pose<Scalar> step_unicycle(const Pose<Scalar>& pose, const Twist<Scalar>& twist,
                           Scalar dt) {
  return {pose.x + twist.v * std::cos(pose.theta) * dt,
          pose.y + twist.v * std::sin(pose.theta) * dt,
          wrap_angle(pose.theta + twist.omega * dt)};
}

/// Body-frame coordinates (l cos phi, l sin phi) of a detection.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> detection_to_relative(const Detection<Scalar>& d) {
  return {d.range * std::cos(d.bearing), d.range * std::sin(d.bearing)};
}

/// Pose a follower should occupy to sit at distance l_d and bearing phi_d
/// behind the given leader.
template <typename Scalar>
Pose<Scalar> desired_pose(const Pose<Scalar>& leader, Scalar l_d, Scalar phi_d) {
  const Scalar a = leader.theta + phi_d;
  return {leader.x - l_d * std::cos(a), leader.y - l_d * std::sin(a),
          wrap_angle(leader.theta)};
}

template <typename Scalar>
PoseDelta<Scalar> global_error(const Pose<Scalar>& desired,
                               const Pose<Scalar>& follower) {
  return {desired.x - follower.x, desired.y - follower.y,
          wrap_angle(desired.theta - follower.theta)};
}

/// Rotates a world-frame pose difference into the follower's body frame.
template <typename Derived>
TrackingError<typename Derived::Scalar> to_follower_frame(
    const Eigen::MatrixBase<Derived>& delta, typename Derived::Scalar theta_f) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3)
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, 2, 1> planar =
      rotation(theta_f).transpose() * delta.template head<2>();
  return {planar.x(), planar.y(), wrap_angle(delta(2))};
}

/// Convenience: follower-frame tracking error of `follower` w.r.t. `desired`.
template <typename Scalar>
TrackingError<Scalar> tracking_error(const Pose<Scalar>& desired,
                                     const Pose<Scalar>& follower) {
  return to_follower_frame(global_error(desired, follower), follower.theta);
}

/// Maps a body-frame point of `observer` into the world frame.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> to_world(const Pose<Scalar>& observer,
                                     const Eigen::Matrix<Scalar, 2, 1>& rel) {
  return observer.position() + rotation(observer.theta) * rel;
}

}  // namespace swarmform
