#pragma once

// Flat-plate surface aerodynamics with momentum-theory propeller backwash.

#include <poststall/dynamics/params.hpp>
#include <poststall/dynamics/state.hpp>

#include <limits>
#include <optional>
#include <vector>

namespace poststall {

/// Planar (chord/normal) speeds below this are treated as no flow.
inline constexpr double kDegenerateSpeed = 1e-9;

/// Component of the CoM-plus-lever-arm velocity along the thrust axis.
inline Vec3 propeller_inflow(const AircraftState& s, const AircraftParams& p) {
  const Vec3 axis = p.thrust_axis();
  const Vec3 vp = s.v + s.omega.cross(p.prop_offset);
  return axis * axis.dot(vp);
}

/// Backwash speed behind an actuator disk,
/// sqrt(|v_p|^2 + 2 delta_t / (rho S_disk)) - |v_p|.
inline double backwash_velocity(const Vec3& v_p, double delta_t, const AircraftParams& p) {
  if (delta_t < 0.0) throw NegativeThrust("thrust must be non-negative for a puller propeller");
  const double vp = v_p.norm();
  const double inner = vp * vp + 2.0 * delta_t / (p.rho * p.disk_area);
  // (sqrt(a+b) - sqrt(a)) rewritten as b / (sqrt(a+b) + sqrt(a)) to avoid cancellation.
  const double extra = inner - vp * vp;
  const double denom = std::sqrt(inner) + vp;
  return denom > 0.0 ? extra / denom : 0.0;
}

/// Body -> surface rotation including the hinge deflection of actuated surfaces.
inline Mat3 surface_rotation(const AeroSurface& surf, const Vec4& delta) {
  if (!surf.actuated()) return surf.mount_rotation;
  return rot_y(surf.actuator_sign * delta(surf.actuator)).transpose() * surf.mount_rotation;
}

/// Hinge rotation rate of a surface expressed in its own frame.
inline Vec3 surface_hinge_rate(const AeroSurface& surf, const Vec4& surface_rates) {
  if (!surf.actuated()) return Vec3::Zero();
  return Vec3(0.0, surf.actuator_sign * surface_rates(surf.actuator), 0.0);
}

/// Velocity of the surface centre of pressure in the surface frame:
/// R_s (v + w x r_h + gamma v_bw e_x) + (R_s w + w_s) x (l_s e_xs).
inline Vec3 surface_velocity(const AircraftState& s, const AeroSurface& surf,
                             const AircraftParams& /*p*/, const Vec3& hinge_rate, double v_bw) {
  const Mat3 Rs = surface_rotation(surf, s.delta);
  const Vec3 flow = s.v + s.omega.cross(surf.hinge_offset) + Vec3(surf.backwash_gain * v_bw, 0.0, 0.0);
  const Vec3 arm(surf.chord_offset, 0.0, 0.0);
  return Rs * flow + (Rs * s.omega + hinge_rate).cross(arm);
}

/// Convenience overload computing the backwash from the state.
/// Negative thrust (only reachable at intermediate solver points) produces no wash.
inline Vec3 surface_velocity(const AircraftState& s, const AeroSurface& surf,
                             const AircraftParams& p, double surface_rate) {
  const double v_bw = backwash_velocity(propeller_inflow(s, p), std::max(s.delta_t, 0.0), p);
  const Vec3 hinge_rate = surf.actuated() ? Vec3(0.0, surf.actuator_sign * surface_rate, 0.0)
                                          : Vec3::Zero();
  return surface_velocity(s, surf, p, hinge_rate, v_bw);
}

/// Angle of attack atan2(v_z, v_x) in the surface frame.
inline std::optional<double> try_surface_aoa(const Vec3& v_s, double eps = kDegenerateSpeed) {
  if (std::hypot(v_s(0), v_s(2)) < eps) return std::nullopt;
  return std::atan2(v_s(2), v_s(0));
}

inline double surface_aoa(const Vec3& v_s, double eps = kDegenerateSpeed) {
  auto a = try_surface_aoa(v_s, eps);
  if (!a) throw DegenerateVelocity("no chordwise/normal flow over surface");
  return *a;
}

/// Flat-plate normal force magnitude f_n = 1/2 C_n rho |v_s|^2 S with C_n = 2 sin(alpha).
/// Degenerate flow yields zero force.
inline double surface_force(const Vec3& v_s, double area, double rho, double eps = kDegenerateSpeed) {
  const double planar = std::hypot(v_s(0), v_s(2));
  if (planar < eps) return 0.0;
  const double sin_alpha = v_s(2) / planar;
  return 0.5 * (2.0 * sin_alpha) * rho * v_s.squaredNorm() * area;
}

/// Force on the plate in the surface frame. It acts along the plate normal,
/// opposing the normal component of the surface's motion through the air.
inline Vec3 surface_force_vector(const Vec3& v_s, double area, double rho) {
  return Vec3(0.0, 0.0, -surface_force(v_s, area, rho));
}

struct ForcesMoments {
  Vec3 force = Vec3::Zero();   ///< body frame [N]
  Vec3 moment = Vec3::Zero();  ///< body frame, about the CoM [N m]
};

/// Sum of aerodynamic, gravity and thrust forces and aerodynamic moments.
inline ForcesMoments total_forces_moments(const AircraftState& s, const AircraftParams& p,
                                          const Vec4& surface_rates) {
  ForcesMoments out;
  const double v_bw = backwash_velocity(propeller_inflow(s, p), std::max(s.delta_t, 0.0), p);
  for (const auto& surf : p.surfaces) {
    const Mat3 Rs = surface_rotation(surf, s.delta);
    const Vec3 flow = s.v + s.omega.cross(surf.hinge_offset) + Vec3(surf.backwash_gain * v_bw, 0.0, 0.0);
    const Vec3 arm(surf.chord_offset, 0.0, 0.0);
    const Vec3 vs = Rs * flow + (Rs * s.omega + surface_hinge_rate(surf, surface_rates)).cross(arm);
    const Vec3 f_body = Rs.transpose() * surface_force_vector(vs, surf.area, p.rho);
    const Vec3 cp = surf.hinge_offset + Rs.transpose() * arm;
    out.force += f_body;
    out.moment += cp.cross(f_body);
  }
  const Mat3 Rbr = euler_to_rotation(s.theta);
  out.force += Rbr.transpose() * Vec3(0.0, 0.0, p.mass * p.gravity);
  out.force += p.thrust_mount * Vec3(s.delta_t, 0.0, 0.0);
  return out;
}

/// Angle of attack of each surface (NaN where the flow is degenerate).
inline std::vector<double> surface_angles(const AircraftState& s, const AircraftParams& p,
                                          const Vec4& surface_rates) {
  std::vector<double> out;
  out.reserve(p.surfaces.size());
  for (const auto& surf : p.surfaces) {
    const double rate = surf.actuated() ? surface_rates(surf.actuator) : 0.0;
    auto a = try_surface_aoa(surface_velocity(s, surf, p, rate));
    out.push_back(a ? *a : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace poststall
