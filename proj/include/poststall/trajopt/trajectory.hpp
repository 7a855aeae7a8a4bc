#pragma once

#include <poststall/dynamics/state.hpp>

#include <vector>

namespace poststall {

/// Knot-point trajectory: N + 1 states and inputs spaced h apart from t0.
struct Trajectory {
  std::vector<StateVector> x;
  std::vector<InputVector> u;
  double h = 0.1;
  double t0 = 0.0;

  int intervals() const { return static_cast<int>(x.size()) - 1; }
  double duration() const { return h * intervals(); }
  double time(int k) const { return t0 + h * k; }

  static Trajectory constant(int N, const StateVector& x0, const InputVector& u0, double h) {
    if (N < 1) throw DomainError("a trajectory needs at least one interval");
    Trajectory t;
    t.x.assign(N + 1, x0);
    t.u.assign(N + 1, u0);
    t.h = h;
    return t;
  }
};

/// Size of the decision vector [x_0..x_N, u_0..u_N, h].
inline int decision_size(int N) { return (N + 1) * (kStateDim + kInputDim) + 1; }
inline int state_offset(int k) { return k * kStateDim; }
inline int input_offset(int N, int k) { return (N + 1) * kStateDim + k * kInputDim; }
inline int step_offset(int N) { return (N + 1) * (kStateDim + kInputDim); }

inline Eigen::VectorXd pack(const Trajectory& t) {
  const int N = t.intervals();
  if (N < 1 || static_cast<int>(t.u.size()) != N + 1) throw DomainError("malformed trajectory");
  Eigen::VectorXd z(decision_size(N));
  for (int k = 0; k <= N; ++k) {
    z.segment<kStateDim>(state_offset(k)) = t.x[k];
    z.segment<kInputDim>(input_offset(N, k)) = t.u[k];
  }
  z(step_offset(N)) = t.h;
  return z;
}

inline Trajectory unpack(const Eigen::VectorXd& z, int N, double t0 = 0.0) {
  if (z.size() != decision_size(N)) throw DomainError("decision vector has the wrong length");
  Trajectory t;
  t.x.resize(N + 1);
  t.u.resize(N + 1);
  for (int k = 0; k <= N; ++k) {
    t.x[k] = z.segment<kStateDim>(state_offset(k));
    t.u[k] = z.segment<kInputDim>(input_offset(N, k));
  }
  t.h = z(step_offset(N));
  t.t0 = t0;
  return t;
}

}  // namespace poststall
