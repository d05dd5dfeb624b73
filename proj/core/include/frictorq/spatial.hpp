#pragma once

#include "frictorq/types.hpp"

namespace frictorq {

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v(2), v(1), v(2), 0, -v(0), -v(1), v(0), 0;
  return m;
}

/// Rotation vector of R (inverse of the exponential map), angle in [0, pi].
Vec3 rotation_log(const Mat3& r);

/// Quaternion for a rotation vector w (angle = |w|).
Quat quat_exp(const Vec3& w);

/// Time derivative of a unit quaternion under world-frame angular velocity.
Quat quat_derivative(const Quat& q, const Vec3& omega_world);

}  // namespace frictorq
