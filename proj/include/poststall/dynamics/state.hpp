#pragma once

#include <poststall/core.hpp>

namespace poststall {

/// Full 17-dimensional aircraft state.
///
/// Positions are in the world frame (z down); velocities and rates are in the
/// body frame (x forward, y right, z down). Euler angles are z-y-x
/// (roll, pitch, yaw).
struct AircraftState {
  Vec3 r = Vec3::Zero();      ///< CoM position [m]
  Vec3 theta = Vec3::Zero();  ///< roll, pitch, yaw [rad]
  Vec4 delta = Vec4::Zero();  ///< aileron right/left, elevator, rudder [rad]
  double delta_t = 0.0;       ///< thrust [N]
  Vec3 v = Vec3::Zero();      ///< body velocity [m/s]
  Vec3 omega = Vec3::Zero();  ///< body angular velocity [rad/s]

  StateVector flatten() const {
    StateVector x;
    x.segment<3>(idx::r) = r;
    x.segment<3>(idx::theta) = theta;
    x.segment<4>(idx::delta) = delta;
    x(idx::delta_t) = delta_t;
    x.segment<3>(idx::v) = v;
    x.segment<3>(idx::omega) = omega;
    return x;
  }

  static AircraftState unflatten(const StateVector& x) {
    AircraftState s;
    s.r = x.segment<3>(idx::r);
    s.theta = x.segment<3>(idx::theta);
    s.delta = x.segment<4>(idx::delta);
    s.delta_t = x(idx::delta_t);
    s.v = x.segment<3>(idx::v);
    s.omega = x.segment<3>(idx::omega);
    return s;
  }

  bool is_finite() const { return flatten().allFinite(); }
};

/// Control input u_cs: four surface rates and the normalized throttle.
struct ControlInput {
  Vec4 surface_rates = Vec4::Zero();  ///< [rad/s]
  double throttle = 0.0;              ///< u_t in [0, 1]

  InputVector flatten() const {
    InputVector u;
    u.head<4>() = surface_rates;
    u(idx::u_throttle) = throttle;
    return u;
  }

  static ControlInput unflatten(const InputVector& u) {
    return ControlInput{u.head<4>(), u(idx::u_throttle)};
  }
};

}  // namespace poststall
