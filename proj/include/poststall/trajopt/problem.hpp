#pragma once

#include <poststall/dynamics/model.hpp>
#include <poststall/environment/distance_field.hpp>
#include <poststall/trajopt/trajectory.hpp>
#include <poststall/trajopt/transcription.hpp>

#include <memory>

namespace poststall {

/// Terminal box half-widths: position, attitude, surfaces and thrust (free), velocity, rates.
inline StateVector default_terminal_box() {
  StateVector d;
  d << 0.1, 0.1, 0.2, 0.5, 1.0, 0.2, 100, 100, 100, 100, 100, 3, 3, 0.5, 2, 2, 2;
  return d;
}

inline constexpr double kDefaultInitialBox = 1e-6;

struct VehicleLimits {
  double surface_deflection = deg2rad(45.0);  ///< |delta| [rad]
  double surface_rate = 10.0;                 ///< |u_cs| [rad/s]
  double pitch = std::numbers::pi / 2 - 0.15; ///< |pitch| [rad]
  double roll = std::numbers::pi;
  double yaw_span = 2.0 * std::numbers::pi;   ///< yaw allowed within +-span of the initial yaw
  Vec3 v_min = Vec3(-4.0, -8.0, -8.0);        ///< body velocity [m/s]
  Vec3 v_max = Vec3(12.0, 8.0, 8.0);
  double rate = 15.0;                         ///< |omega| [rad/s]
};

/// Feasibility problem on a fixed number of knot intervals:
/// find x_k, u_k, h with zero defects, x_0 in the initial box, x_N in the
/// terminal box, all bounds and d(r_k) >= radius.
struct NlpProblem {
  int N = 10;
  Transcription method = Transcription::HermiteSimpson;
  std::shared_ptr<const AircraftParams> params;
  std::shared_ptr<const DistanceField> field;  // null disables the collision constraint
  double radius = 0.55;

  StateVector x_i = StateVector::Zero();
  StateVector x_f = StateVector::Zero();
  StateVector delta_i = StateVector::Constant(kDefaultInitialBox);
  StateVector delta_f = default_terminal_box();

  StateVector x_min = StateVector::Constant(-1e3);
  StateVector x_max = StateVector::Constant(1e3);
  InputVector u_min = InputVector::Constant(-1.0);
  InputVector u_max = InputVector::Constant(1.0);
  double h_min = 0.02;
  double h_max = 0.3;
  bool linked_ailerons = true;

  StateVector state_scale() const { return 0.5 * (x_max - x_min); }
  InputVector input_scale() const { return 0.5 * (u_max - u_min); }

  /// Box for x_0 and x_N after intersecting with the global bounds.
  StateVector initial_lo() const { return (x_i - delta_i).cwiseMax(x_min); }
  StateVector initial_hi() const { return (x_i + delta_i).cwiseMin(x_max); }
  StateVector terminal_lo() const { return (x_f - delta_f).cwiseMax(x_min); }
  StateVector terminal_hi() const { return (x_f + delta_f).cwiseMin(x_max); }

  void check() const {
    if (N < 1) throw DomainError("need at least one knot interval");
    if (!params) throw DomainError("problem has no vehicle parameters");
    if (!(h_min > 0.0) || !(h_max >= h_min)) throw DomainError("bad time-step bounds");
    if ((delta_i.array() < 0.0).any() || (delta_f.array() < 0.0).any()) throw DomainError("negative box width");
    if (!((x_max - x_min).array() > 0.0).all() || !((u_max - u_min).array() > 0.0).all())
      throw DomainError("empty state or input bounds");
  }
};

/// Bounds from vehicle limits; positions are kept two voxels inside the field.
inline void apply_limits(NlpProblem& p, const VehicleLimits& lim) {
  const double inf = 1e3;
  Vec3 lo = Vec3::Constant(-inf), hi = Vec3::Constant(inf);
  if (p.field) {
    lo = p.field->lower_corner().array() + 2.0 * p.field->resolution();
    hi = p.field->upper_corner().array() - 2.0 * p.field->resolution();
  }
  const double yaw0 = p.x_i(idx::yaw);
  p.x_min << lo, -lim.roll, -lim.pitch, yaw0 - lim.yaw_span, Vec4::Constant(-lim.surface_deflection), 0.0, lim.v_min,
      Vec3::Constant(-lim.rate);
  p.x_max << hi, lim.roll, lim.pitch, yaw0 + lim.yaw_span, Vec4::Constant(lim.surface_deflection),
      p.params ? p.params->max_thrust() : 10.0, lim.v_max, Vec3::Constant(lim.rate);
  p.u_min << Vec4::Constant(-lim.surface_rate), 0.0;
  p.u_max << Vec4::Constant(lim.surface_rate), 1.0;
}

}  // namespace poststall
