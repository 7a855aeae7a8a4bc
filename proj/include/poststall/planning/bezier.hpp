#pragma once

#include <poststall/core.hpp>

#include <array>

namespace poststall {

using BezierControl = std::array<Vec3, 4>;

namespace detail {
inline void check_unit_interval(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("Bezier parameter outside [0, 1]");
}
}  // namespace detail

/// Cubic Bernstein form F(s) = (1-s)^3 P0 + 3(1-s)^2 s P1 + 3(1-s) s^2 P2 + s^3 P3.
inline Vec3 bezier_eval(const BezierControl& P, double s) {
  detail::check_unit_interval(s);
  const double t = 1.0 - s;
  return t * t * t * P[0] + 3.0 * t * t * s * P[1] + 3.0 * t * s * s * P[2] + s * s * s * P[3];
}

inline Vec3 bezier_d1(const BezierControl& P, double s) {
  detail::check_unit_interval(s);
  const double t = 1.0 - s;
  return 3.0 * (t * t * (P[1] - P[0]) + 2.0 * t * s * (P[2] - P[1]) + s * s * (P[3] - P[2]));
}

inline Vec3 bezier_d2(const BezierControl& P, double s) {
  detail::check_unit_interval(s);
  return 6.0 * ((1.0 - s) * (P[2] - 2.0 * P[1] + P[0]) + s * (P[3] - 2.0 * P[2] + P[1]));
}

/// |F' x F''| / |F'|^3, written out componentwise.
inline double curvature_from_derivatives(const Vec3& d1, const Vec3& d2) {
  const double cx = d2.z() * d1.y() - d2.y() * d1.z();
  const double cy = d2.x() * d1.z() - d2.z() * d1.x();
  const double cz = d2.y() * d1.x() - d2.x() * d1.y();
  const double speed2 = d1.squaredNorm();
  if (speed2 == 0.0) return 0.0;
  return std::sqrt(cx * cx + cy * cy + cz * cz) / std::pow(speed2, 1.5);
}

inline double bezier_curvature(const BezierControl& P, double s) {
  return curvature_from_derivatives(bezier_d1(P, s), bezier_d2(P, s));
}

}  // namespace poststall
