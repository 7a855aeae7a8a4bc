#pragma once

// Reference integrator shared by the trajopt suite and the acceptance gate.

#include <poststall/dynamics/model.hpp>
#include <poststall/trajopt/transcription.hpp>

#include <boost/numeric/odeint.hpp>

#include <vector>

namespace poststall::test {

/// x(h) under constant input with Dormand-Prince at 1e-14 abs/rel tolerance.
inline StateVector propagate_exact(const AircraftParams& p, const StateVector& x0, const InputVector& u, double h) {
  namespace ode = boost::numeric::odeint;
  using V = std::vector<double>;
  V y(x0.data(), x0.data() + kStateDim);
  auto sys = [&](const V& a, V& d, double) {
    const StateVector xd = state_derivative(StateVector(Eigen::Map<const StateVector>(a.data())), u, p);
    d.assign(xd.data(), xd.data() + kStateDim);
  };
  ode::integrate_adaptive(ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_dopri5<V>()), sys, y, 0.0, h, h / 100);
  return Eigen::Map<StateVector>(y.data());
}

struct DefectOrder {
  double hs_coarse = 0.0, hs_fine = 0.0;
  double euler_coarse = 0.0, euler_fine = 0.0;
  double hs_ratio() const { return hs_coarse / hs_fine; }
  double euler_ratio() const { return euler_coarse / euler_fine; }
};

/// Inf-norm defects of both transcriptions on exactly propagated endpoints at h and h/2.
inline DefectOrder defect_order(const AircraftParams& p, const StateVector& x0, const InputVector& u, double h) {
  auto f = [&](const StateVector& x, const InputVector& v) { return state_derivative(x, v, p); };
  DefectOrder d;
  const StateVector a = propagate_exact(p, x0, u, h), b = propagate_exact(p, x0, u, h / 2);
  d.hs_coarse = hermite_simpson_defect(f, x0, u, a, u, h).cwiseAbs().maxCoeff();
  d.hs_fine = hermite_simpson_defect(f, x0, u, b, u, h / 2).cwiseAbs().maxCoeff();
  d.euler_coarse = euler_defect(f, x0, u, a, h).cwiseAbs().maxCoeff();
  d.euler_fine = euler_defect(f, x0, u, b, h / 2).cwiseAbs().maxCoeff();
  return d;
}

}  // namespace poststall::test
