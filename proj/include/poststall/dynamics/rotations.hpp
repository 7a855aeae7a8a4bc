#pragma once

#include <poststall/core.hpp>

namespace poststall {

/// Elementary right-handed rotation about the body x axis.
inline Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}

inline Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

inline Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

/// Body-to-world rotation for z-y-x Euler angles (roll, pitch, yaw):
/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Mat3 euler_to_rotation(const Vec3& theta) {
  const double cphi = std::cos(theta(0)), sphi = std::sin(theta(0));
  const double cth = std::cos(theta(1)), sth = std::sin(theta(1));
  const double cpsi = std::cos(theta(2)), spsi = std::sin(theta(2));
  Mat3 R;
  R << cth * cpsi, sphi * sth * cpsi - cphi * spsi, cphi * sth * cpsi + sphi * spsi,
      cth * spsi, sphi * sth * spsi + cphi * cpsi, cphi * sth * spsi - sphi * cpsi,
      -sth, sphi * cth, cphi * cth;
  return R;
}

/// Matrix mapping Euler-angle rates to body angular velocity, omega = R_w * theta_dot.
inline Mat3 euler_rate_matrix(const Vec3& theta) {
  const double cphi = std::cos(theta(0)), sphi = std::sin(theta(0));
  const double cth = std::cos(theta(1)), sth = std::sin(theta(1));
  Mat3 W;
  W << 1, 0, -sth, 0, cphi, sphi * cth, 0, -sphi, cphi * cth;
  return W;
}

/// Default distance from +-pi/2 pitch at which the rate map is refused.
inline constexpr double kGimbalTolerance = 1e-3;

/// Euler-angle rates theta_dot = R_w^{-1} omega.
/// Throws GimbalLock when |pitch| >= pi/2 - tolerance.
inline Vec3 euler_rate_map(const Vec3& theta, const Vec3& omega,
                           double tolerance = kGimbalTolerance) {
  if (!(std::abs(theta(1)) < std::numbers::pi / 2.0 - tolerance)) {
    throw GimbalLock("pitch " + std::to_string(theta(1)) + " rad is within the gimbal tolerance");
  }
  const double cphi = std::cos(theta(0)), sphi = std::sin(theta(0));
  const double cth = std::cos(theta(1)), tth = std::tan(theta(1));
  const double p = omega(0), q = omega(1), r = omega(2);
  return Vec3(p + (q * sphi + r * cphi) * tth, q * cphi - r * sphi, (q * sphi + r * cphi) / cth);
}

}  // namespace poststall
