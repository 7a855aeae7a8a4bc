#pragma once

// 17-state equations of motion and their finite-difference linearization.

#include <poststall/dynamics/aero.hpp>

namespace poststall {

/// Full state derivative x_dot = f(x, u).
///
///   r_dot     = R_b^r v
///   theta_dot = R_w^{-1} omega
///   delta_dot = u_cs (surface rates)
///   dt_dot    = a_t delta_t + b_t u_t
///   v_dot     = f / m - omega x v
///   omega_dot = J^{-1} (m - omega x J omega)
inline StateVector state_derivative(const AircraftState& s, const ControlInput& u,
                                    const AircraftParams& p,
                                    double gimbal_tolerance = kGimbalTolerance) {
  StateVector xd;
  const Mat3 Rbr = euler_to_rotation(s.theta);
  xd.segment<3>(idx::r) = Rbr * s.v;
  xd.segment<3>(idx::theta) = euler_rate_map(s.theta, s.omega, gimbal_tolerance);
  xd.segment<4>(idx::delta) = u.surface_rates;
  xd(idx::delta_t) = p.thrust_a * s.delta_t + p.thrust_b * u.throttle;
  const ForcesMoments fm = total_forces_moments(s, p, u.surface_rates);
  xd.segment<3>(idx::v) = fm.force / p.mass - s.omega.cross(s.v);
  const Vec3 Jw = p.inertia * s.omega;
  xd.segment<3>(idx::omega) = p.inertia.ldlt().solve(fm.moment - s.omega.cross(Jw));
  return xd;
}

inline StateVector state_derivative(const StateVector& x, const InputVector& u,
                                    const AircraftParams& p) {
  return state_derivative(AircraftState::unflatten(x), ControlInput::unflatten(u), p);
}

struct Linearization {
  StateMatrix A;
  InputMatrix B;
};

/// Central-difference Jacobians of f about (x, u).
template <typename Dynamics>
Linearization linearize_fn(const Dynamics& f, const StateVector& x, const InputVector& u, double eps) {
  if (!(eps > 0.0)) throw DomainError("linearization step must be positive");
  Linearization lin;
  for (int j = 0; j < kStateDim; ++j) {
    StateVector xp = x, xm = x;
    xp(j) += eps;
    xm(j) -= eps;
    lin.A.col(j) = (f(xp, u) - f(xm, u)) / (2.0 * eps);
  }
  for (int j = 0; j < kInputDim; ++j) {
    InputVector up = u, um = u;
    up(j) += eps;
    um(j) -= eps;
    lin.B.col(j) = (f(x, up) - f(x, um)) / (2.0 * eps);
  }
  return lin;
}

inline constexpr double kDefaultLinearizationStep = 1e-6;

inline Linearization linearize(const AircraftState& s, const ControlInput& u, const AircraftParams& p,
                               double eps = kDefaultLinearizationStep) {
  auto f = [&p](const StateVector& x, const InputVector& in) { return state_derivative(x, in, p); };
  return linearize_fn(f, s.flatten(), u.flatten(), eps);
}

/// Callable wrapper so generic transcription code can treat the aircraft like any
/// other f(x, u).
struct AircraftModel {
  const AircraftParams* params = nullptr;

  StateVector operator()(const StateVector& x, const InputVector& u) const {
    return state_derivative(x, u, *params);
  }
};

}  // namespace poststall
