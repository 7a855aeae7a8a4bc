#pragma once

// Initial guesses for the transcription.

#include <poststall/dynamics/trim.hpp>
#include <poststall/planning/time_param.hpp>
#include <poststall/trajopt/trajectory.hpp>

namespace poststall {

/// Flight state following a path tangent at a given speed. Roll is zero; pitch
/// is the level-trim angle of attack at that speed when a trim table is given.
inline AircraftState tangent_state(const Vec3& position, const Vec3& velocity, double yaw_rate,
                                   const LevelTrimTable* trims, double yaw_hint = 0.0) {
  AircraftState s;
  s.r = position;
  const double speed = velocity.norm();
  double yaw = std::atan2(velocity.y(), velocity.x());
  yaw = yaw_hint + wrap_angle(yaw - yaw_hint);
  const double horizontal = std::hypot(velocity.x(), velocity.y());
  const double gamma = std::atan2(-velocity.z(), horizontal);  // climb angle, z down
  double alpha = 0.0;
  if (trims) {
    const LevelTrim t = trims->at(std::max(speed, 1e-3));
    alpha = t.alpha;
    s.delta(2) = t.elevator;
    s.delta_t = t.thrust;
  }
  s.theta = Vec3(0.0, gamma + alpha, yaw);
  s.v = speed * Vec3(std::cos(alpha), 0.0, std::sin(alpha));
  s.omega = Vec3(0.0, 0.0, yaw_rate);
  return s;
}

inline InputVector trim_input(const AircraftState& s, const AircraftParams& p) {
  InputVector u = InputVector::Zero();
  u(idx::u_throttle) = std::clamp(-p.thrust_a * s.delta_t / p.thrust_b, 0.0, 1.0);
  return u;
}

/// Samples the time-parametrized path at N + 1 uniform times over
/// min(horizon, total time); h is that span over N, clamped to [h_min, h_max].
inline Trajectory seed_from_path(const TimeParamPath& tp, int N, const AircraftParams& p, double horizon,
                                 const LevelTrimTable* trims = nullptr, double h_min = 0.02, double h_max = 0.3,
                                 double yaw_hint = 0.0) {
  if (N < 2) throw DomainError("seed needs at least two intervals");
  const double span = std::min(horizon, tp.total_time());
  Trajectory t;
  t.h = std::clamp(span / N, h_min, h_max);
  t.x.resize(N + 1);
  t.u.resize(N + 1);
  double prev_yaw = yaw_hint;
  for (int k = 0; k <= N; ++k) {
    const double tk = std::min(span * k / N, tp.total_time());
    const double s = tp.arclength_at(tk);
    const Vec3 vel = tp.velocity(tk);
    // Signed turn rate about world z (down): speed * curvature, sign from the tangent change.
    const Vec3 tan = tp.smooth().tangent(s);
    const Vec3 ahead = tp.smooth().tangent(std::min(s + 1e-3, tp.smooth().length()));
    const double sign = tan.cross(ahead).z() >= 0.0 ? 1.0 : -1.0;
    const double yaw_rate = sign * vel.norm() * tp.smooth().curvature(s);
    const AircraftState st = tangent_state(tp.position(tk), vel, yaw_rate, trims, prev_yaw);
    prev_yaw = st.theta(2);
    t.x[k] = st.flatten();
    t.u[k] = trim_input(st, p);
  }
  return t;
}

/// Straight-line interpolation between two states with trim inputs.
inline Trajectory linear_seed(const StateVector& x_i, const StateVector& x_f, int N, const AircraftParams& p,
                              double h) {
  if (N < 1) throw DomainError("seed needs at least one interval");
  Trajectory t;
  t.h = h;
  t.x.resize(N + 1);
  t.u.resize(N + 1);
  for (int k = 0; k <= N; ++k) {
    const double w = double(k) / N;
    t.x[k] = (1.0 - w) * x_i + w * x_f;
    t.u[k] = trim_input(AircraftState::unflatten(t.x[k]), p);
  }
  return t;
}

}  // namespace poststall
