#pragma once

#include <poststall/core.hpp>
#include <poststall/dynamics/rotations.hpp>

#include <string>
#include <vector>

namespace poststall {

/// One flat-plate aerodynamic surface.
///
/// The surface frame has x along the chord and z along the plate normal.
/// `mount_rotation` maps body-frame vectors into the (undeflected) surface
/// frame. An actuated surface additionally rotates about its own y axis (the
/// hinge line) by `actuator_sign * delta[actuator]`.
struct AeroSurface {
  std::string name;
  double area = 0.0;                      ///< S_i [m^2]
  Mat3 mount_rotation = Mat3::Identity();  ///< body -> surface
  Vec3 hinge_offset = Vec3::Zero();       ///< CoM -> hinge, body frame [m]
  double chord_offset = 0.0;              ///< hinge -> centre of pressure along surface x [m]
  double backwash_gain = 0.0;             ///< gamma_i
  int actuator = -1;                      ///< index into delta, -1 for fixed surfaces
  double actuator_sign = 1.0;

  bool actuated() const { return actuator >= 0; }
};

struct AircraftParams {
  std::string name = "unnamed";
  double mass = 0.0;                 ///< [kg]
  Mat3 inertia = Mat3::Identity();   ///< about the CoM, body frame [kg m^2]
  std::vector<AeroSurface> surfaces;
  double rho = 1.225;                ///< [kg/m^3]
  double disk_area = 0.0;            ///< propeller actuator disk [m^2]
  Mat3 thrust_mount = Mat3::Identity();  ///< thrust frame -> body
  Vec3 prop_offset = Vec3::Zero();   ///< CoM -> propeller hub, body frame [m]
  double thrust_a = 0.0;             ///< [1/s]
  double thrust_b = 0.0;             ///< [N/s]
  double gravity = 9.81;             ///< [m/s^2]

  /// Steady-state thrust at full throttle, -b_t / a_t.
  double max_thrust() const { return -thrust_b / thrust_a; }

  Vec3 thrust_axis() const { return thrust_mount.col(0); }
};

inline bool is_rotation(const Mat3& R, double tol = 1e-9) {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() < tol &&
         std::abs(R.determinant() - 1.0) < tol;
}

/// Checks the structural invariants; throws ConfigError with the first violation.
inline void validate(const AircraftParams& p) {
  auto fail = [&](const std::string& what) { throw ConfigError(p.name + ": " + what); };
  if (!(p.mass > 0.0)) fail("mass must be positive");
  if (!(p.rho > 0.0)) fail("rho must be positive");
  if (!(p.disk_area > 0.0)) fail("disk_area must be positive");
  if (!(p.thrust_a < 0.0)) fail("thrust_a must be negative for a stable thrust lag");
  if ((p.inertia - p.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) fail("inertia not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> eig(p.inertia);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) fail("inertia not positive definite");
  if (!is_rotation(p.thrust_mount)) fail("thrust mount is not a rotation");
  for (const auto& s : p.surfaces) {
    if (!(s.area > 0.0)) fail("surface " + s.name + ": area must be positive");
    if (!is_rotation(s.mount_rotation)) fail("surface " + s.name + ": mount is not a rotation");
    if (s.backwash_gain < 0.0) fail("surface " + s.name + ": negative backwash gain");
    if (s.actuator < -1 || s.actuator > 3) fail("surface " + s.name + ": actuator index out of range");
  }
}

/// Multiplies the area of every surface whose name starts with `prefix`.
inline void scale_surface_area(AircraftParams& p, const std::string& prefix, double factor) {
  for (auto& s : p.surfaces) {
    if (s.name.rfind(prefix, 0) == 0) s.area *= factor;
  }
}

}  // namespace poststall
