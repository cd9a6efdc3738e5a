#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Core>

#include "swarmform/kinematics.hpp"

namespace swarmform {

/// Nine PID gains laid out as [K_x | K_y | K_theta], each block (p, i, d).
/// The x block drives forward speed; the y and theta blocks drive turning.
template <typename Scalar>
using GainVector = Eigen::Matrix<Scalar, 9, 1>;
using GainVector9d = GainVector<double>;

namespace gain {
inline constexpr int kXp = 0, kXi = 1, kXd = 2;
inline constexpr int kYp = 3, kYi = 4, kYd = 5;
inline constexpr int kThp = 6, kThi = 7, kThd = 8;
}  // namespace gain

template <typename Scalar>
struct SpeedLimits {
  Scalar v_max{2};
  Scalar omega_max{std::numbers::pi_v<Scalar>};

  void validate() const {
    if (!(v_max > 0) || !(omega_max > 0)) {
      throw std::invalid_argument("speed limits must be strictly positive");
    }
  }
};
using SpeedLimits2d = SpeedLimits<double>;

/// Last three follower-frame errors, newest first. `integral` is the running
/// rectangle-rule sum (in samples) and is only consumed by positional_pid.
template <typename Scalar>
struct ErrorWindow {
  TrackingError<Scalar> current = TrackingError<Scalar>::Zero();
  TrackingError<Scalar> previous = TrackingError<Scalar>::Zero();
  TrackingError<Scalar> before_previous = TrackingError<Scalar>::Zero();
  TrackingError<Scalar> integral = TrackingError<Scalar>::Zero();

  void push(const TrackingError<Scalar>& e) {
    before_previous = previous;
    previous = current;
    current = e;
    integral += e;
  }

  /// Fills the whole history with `e`, so the next increment sees no jump.
  void reset_to(const TrackingError<Scalar>& e) {
    current = previous = before_previous = e;
    integral = e;
  }

  void clear() { *this = ErrorWindow{}; }
};
using ErrorWindow3d = ErrorWindow<double>;

namespace detail {

// Per-axis regressor dotted with a (p, i, d) block.
template <typename Scalar>
Scalar axis_term(const GainVector<Scalar>& k, int block, Scalar p, Scalar i,
                 Scalar d) {
  return k(block) * p + k(block + 1) * i + k(block + 2) * d;
}

}  // namespace detail

/// Positional PID law: v = K_x . E_x, omega = K_y . E_y + K_theta . E_theta,
/// with E = [e, integral e dt, de/dt]. Integral by rectangle rule, derivative
/// by backward difference.
template <typename Scalar>
Twist<Scalar> positional_pid(const ErrorWindow<Scalar>& w,
                             const GainVector<Scalar>& k, Scalar dt) {
  const TrackingError<Scalar> integ = w.integral * dt;
  const TrackingError<Scalar> deriv = (w.current - w.previous) / dt;
  Twist<Scalar> out;
  out.v = detail::axis_term(k, gain::kXp, w.current(0), integ(0), deriv(0));
  out.omega =
      detail::axis_term(k, gain::kYp, w.current(1), integ(1), deriv(1)) +
      detail::axis_term(k, gain::kThp, w.current(2), integ(2), deriv(2));
  return out;
}

/// Incremental PID law. Adds the increment computed from the last three
/// errors to `prev`; the result is not saturated.
///
/// With a sample period of one, the running sum of these increments equals
/// positional_pid. For a period dt the equivalent positional gains are
/// (p, i / dt, d * dt).
template <typename Scalar>
Twist<Scalar> incremental_pid(const ErrorWindow<Scalar>& w,
                              const GainVector<Scalar>& k,
                              const Twist<Scalar>& prev) {
  const TrackingError<Scalar> d1 = w.current - w.previous;
  const TrackingError<Scalar> d2 =
      w.current - Scalar(2) * w.previous + w.before_previous;
  const Scalar dv = detail::axis_term(k, gain::kXp, d1(0), w.current(0), d2(0));
  const Scalar dw =
      detail::axis_term(k, gain::kYp, d1(1), w.current(1), d2(1)) +
      detail::axis_term(k, gain::kThp, d1(2), w.current(2), d2(2));
  return {prev.v + dv, prev.omega + dw};
}

template <typename Scalar>
Twist<Scalar> saturate(const Twist<Scalar>& t, const SpeedLimits<Scalar>& lim) {
  return {std::clamp(t.v, -lim.v_max, lim.v_max),
          std::clamp(t.omega, -lim.omega_max, lim.omega_max)};
}

template <typename Scalar>
bool within_limits(const Twist<Scalar>& t, const SpeedLimits<Scalar>& lim) {
  return std::abs(t.v) <= lim.v_max && std::abs(t.omega) <= lim.omega_max;
}

/// sqrt(e_x^2 + e_y^2 + w_theta * e_theta^2)
template <typename Scalar>
Scalar error_norm(const TrackingError<Scalar>& e, Scalar w_theta = Scalar(1)) {
  return std::sqrt(e(0) * e(0) + e(1) * e(1) + w_theta * e(2) * e(2));
}

}  // namespace swarmform
