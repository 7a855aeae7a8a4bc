#pragma once

// Truth propagation and the trajectory-following metric.

#include <poststall/control/tvlqr.hpp>
#include <poststall/trajopt/problem.hpp>

#include <limits>

namespace poststall {

inline constexpr double kTruthStep = 1e-3;

/// One classical RK4 step with the input held over the step.
inline StateVector rk4_step(const AircraftParams& p, const StateVector& x, const InputVector& u, double dt) {
  const StateVector k1 = state_derivative(x, u, p);
  const StateVector k2 = state_derivative(StateVector(x + 0.5 * dt * k1), u, p);
  const StateVector k3 = state_derivative(StateVector(x + 0.5 * dt * k2), u, p);
  const StateVector k4 = state_derivative(StateVector(x + dt * k3), u, p);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct InputBounds {
  InputVector lo, hi;
  double travel = deg2rad(45.0);  ///< mechanical stop of every surface [rad]
};

inline InputBounds input_bounds(const VehicleLimits& lim = {}) {
  InputBounds b;
  b.lo << Vec4::Constant(-lim.surface_rate), 0.0;
  b.hi << Vec4::Constant(lim.surface_rate), 1.0;
  b.travel = lim.surface_deflection;
  return b;
}

/// A surface resting on its stop cannot be driven further into it.
inline InputVector stop_limited(const StateVector& x, InputVector u, double travel) {
  for (int i = 0; i < 4; ++i) {
    const double d = x(idx::delta + i);
    if ((d >= travel && u(i) > 0.0) || (d <= -travel && u(i) < 0.0)) u(i) = 0.0;
  }
  return u;
}

/// RK4 step of the physical airframe: surfaces stay within their stops.
inline StateVector plant_step(const AircraftParams& p, const StateVector& x, const InputVector& u, double dt,
                              double travel) {
  StateVector next = rk4_step(p, x, stop_limited(x, u, travel), dt);
  next.segment<4>(idx::delta) = next.segment<4>(idx::delta).cwiseMax(-travel).cwiseMin(travel);
  return next;
}

struct FollowingResult {
  double cost = std::numeric_limits<double>::infinity();
  bool gimbal_lock = false;
  long saturations = 0;
  StateVector final_state = StateVector::Zero();
};

/// Flies `truth` from x0(t0) under the policy (or its open-loop inputs) over
/// the nominal horizon and scores the terminal error with Q_f. The input is
/// recomputed every `dt` and held across the step.
inline FollowingResult follow(const TvlqrPolicy& policy, const AircraftParams& truth, bool feedback = true,
                              const StateVector* x_start = nullptr, double dt = kTruthStep,
                              const InputBounds& bounds = input_bounds()) {
  FollowingResult out;
  const double T = policy.nominal().duration();
  const int steps = std::max(1, static_cast<int>(std::lround(T / dt)));
  const double step = T / steps;
  StateVector x = x_start ? *x_start : policy.nominal().x.front();
  try {
    for (int i = 0; i < steps; ++i) {
      const double t = policy.t0() + i * step;
      const InputVector u = feedback ? policy.feedback_control(t, x, bounds.lo, bounds.hi, &out.saturations)
                                     : policy.open_loop_control(t, bounds.lo, bounds.hi, &out.saturations);
      x = plant_step(truth, x, u, step, bounds.travel);
      if (!x.allFinite()) return out;
    }
  } catch (const GimbalLock&) {
    out.gimbal_lock = true;
    return out;
  }
  out.final_state = x;
  const StateVector e = state_error(x, policy.nominal().x.back());
  out.cost = e.dot(policy.weights().Qf * e);
  return out;
}

/// Terminal quadratic (x(T) - x_f)' Q_f (x(T) - x_f) after following the
/// policy on the truth model from the nominal start. +inf on gimbal lock.
inline double following_cost(const TvlqrPolicy& policy, const AircraftParams& truth) {
  return follow(policy, truth).cost;
}

}  // namespace poststall
