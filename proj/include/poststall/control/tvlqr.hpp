#pragma once

// Time-varying LQR about a knot trajectory.
//
//   -S_dot = A'S + SA - S B R^-1 B'S + Q,   S(T) = Q_f,   K = R^-1 B'S
//
// integrated backwards with fixed-step RK4 on a grid that refines the knot
// grid. The aircraft policy acts on the reduced input [aileron, elevator,
// rudder, throttle]; the ailerons are linked (w_ar = +a, w_al = -a).

#include <poststall/dynamics/model.hpp>
#include <poststall/trajopt/trajectory.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <tuple>
#include <ostream>
#include <vector>

namespace poststall {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct RiccatiGrid {
  std::vector<double> times;  // increasing
  std::vector<MatrixXd> S;
  std::vector<MatrixXd> K;
  std::vector<MatrixXd> A;
  std::vector<MatrixXd> B;
};

inline constexpr int kDefaultGridRefinement = 4;
inline constexpr double kDefaultRiccatiCap = 1e10;

/// Backward RK4 on `knots` split into `refinement` equal steps per interval.
/// `ab(t)` returns (A, B) at time t. S is symmetrized after every step. Grid
/// steps are subdivided where the Riccati flow is too stiff for one RK4 step.
inline RiccatiGrid riccati_backward_fn(const std::vector<double>& knots,
                                       const std::function<std::pair<MatrixXd, MatrixXd>(double)>& ab,
                                       const MatrixXd& Q, const MatrixXd& R, const MatrixXd& Qf,
                                       int refinement = kDefaultGridRefinement, double cap = kDefaultRiccatiCap) {
  if (knots.size() < 2) throw DomainError("riccati grid needs at least two knots");
  if (refinement < 1) throw DomainError("grid refinement must be at least 1");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw DomainError("knot times must increase");
  const Eigen::LLT<MatrixXd> Rllt(R);
  if (Rllt.info() != Eigen::Success) throw DomainError("R must be positive definite");
  const MatrixXd Rinv = Rllt.solve(MatrixXd::Identity(R.rows(), R.cols()));

  RiccatiGrid g;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    for (int j = 0; j < refinement; ++j)
      g.times.push_back(knots[i] + (knots[i + 1] - knots[i]) * j / refinement);
  g.times.push_back(knots.back());

  const std::size_t M = g.times.size();
  g.S.resize(M);
  g.K.resize(M);
  g.A.resize(M);
  g.B.resize(M);

  auto rhs = [&](const MatrixXd& S, const MatrixXd& A, const MatrixXd& B) -> MatrixXd {
    const MatrixXd SB = S * B;
    return -(A.transpose() * S + S * A - SB * Rinv * SB.transpose() + Q);
  };

  // The quadratic term makes the flow stiff (throttle channel b^2/r ~ 2e3), so
  // each grid step is split into substeps with |dt| * 2|A_cl|_inf <= 1. At the
  // RK4 stability edge the fast modes are damped inaccurately enough that
  // S(0) moves by ~1e-5 with the grid; at 1 it is grid-independent to ~1e-7.
  auto stable_step = [&](const MatrixXd& S, const MatrixXd& A, const MatrixXd& B) {
    const MatrixXd Acl = A - B * (Rinv * (B.transpose() * S));
    const double rate = 2.0 * Acl.cwiseAbs().rowwise().sum().maxCoeff();
    return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
  };

  MatrixXd S = Qf;
  g.S[M - 1] = S;
  std::tie(g.A[M - 1], g.B[M - 1]) = ab(g.times.back());
  for (std::size_t i = M - 1; i-- > 0;) {
    double t = g.times[i + 1];
    MatrixXd A = g.A[i + 1], B = g.B[i + 1];
    while (t > g.times[i]) {
      const double remaining = t - g.times[i];
      const double max_step = stable_step(S, A, B);
      // Land exactly on the grid point once close enough.
      const double step = remaining <= max_step ? remaining : remaining / std::ceil(remaining / max_step);
      const double t_next = remaining <= max_step ? g.times[i] : t - step;
      const auto [Am, Bm] = ab(t - 0.5 * step);
      const auto [A1, B1] = ab(t_next);
      const double dt = -step;
      const MatrixXd k1 = rhs(S, A, B);
      const MatrixXd k2 = rhs(S + 0.5 * dt * k1, Am, Bm);
      const MatrixXd k3 = rhs(S + 0.5 * dt * k2, Am, Bm);
      const MatrixXd k4 = rhs(S + dt * k3, A1, B1);
      S += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      S = 0.5 * (S + S.transpose()).eval();
      if (!S.allFinite() || S.cwiseAbs().maxCoeff() > cap)
        throw RiccatiBlowup("cost-to-go exceeded the cap at t = " + std::to_string(t_next));
      t = t_next;
      A = A1;
      B = B1;
    }
    g.S[i] = S;
    g.A[i] = A;
    g.B[i] = B;
  }
  for (std::size_t i = 0; i < M; ++i) g.K[i] = Rinv * g.B[i].transpose() * g.S[i];
  return g;
}

struct TvlqrWeights {
  MatrixXd Q, R, Qf;

  /// Diagonal weights from their inverse diagonals.
  static TvlqrWeights from_inverse_diagonals(const VectorXd& q_inv, const VectorXd& r_inv, const VectorXd& qf_inv) {
    return {q_inv.cwiseInverse().asDiagonal(), r_inv.cwiseInverse().asDiagonal(), qf_inv.cwiseInverse().asDiagonal()};
  }

  static TvlqrWeights defaults() {
    VectorXd q(kStateDim), r(kReducedInputDim), qf(kStateDim);
    q << 25, 25, 25, 50, 50, 50, VectorXd::Constant(11, 2.0);
    r << 0.1, 0.1, 0.1, 25;
    qf << VectorXd::Constant(6, 100.0), VectorXd::Constant(11, 1.0);
    return from_inverse_diagonals(q, r, qf);
  }
};

/// Maps the reduced input [aileron, elevator, rudder, throttle] to u_cs.
inline Eigen::Matrix<double, kInputDim, kReducedInputDim> reduced_input_map() {
  Eigen::Matrix<double, kInputDim, kReducedInputDim> M = Eigen::Matrix<double, kInputDim, kReducedInputDim>::Zero();
  M(0, 0) = 1.0;
  M(1, 0) = -1.0;
  M(2, 1) = 1.0;
  M(3, 2) = 1.0;
  M(4, 3) = 1.0;
  return M;
}

/// State difference with the three Euler-angle components wrapped to (-pi, pi].
inline StateVector state_error(const StateVector& x, const StateVector& ref) {
  StateVector e = x - ref;
  for (int i = idx::roll; i <= idx::yaw; ++i) e(i) = wrap_angle(e(i));
  return e;
}

class TvlqrPolicy {
 public:
  TvlqrPolicy() = default;

  /// Builds the policy about `traj` with the model `params`.
  TvlqrPolicy(const Trajectory& traj, const AircraftParams& params, const TvlqrWeights& w = TvlqrWeights::defaults(),
              int grid_refinement = kDefaultGridRefinement, double cap = kDefaultRiccatiCap)
      : traj_(traj), weights_(w) {
    const int N = traj.intervals();
    if (N < 1) throw DomainError("policy needs at least one interval");
    if (!(traj.h > 0.0)) throw DomainError("policy needs a positive step");
    xdot_.resize(N + 1);
    for (int k = 0; k <= N; ++k) xdot_[k] = state_derivative(traj.x[k], traj.u[k], params);

    const auto M = reduced_input_map();
    std::vector<double> knots(N + 1);
    for (int k = 0; k <= N; ++k) knots[k] = traj.time(k);
    auto ab = [&](double t) {
      const Linearization lin = linearize(AircraftState::unflatten(nominal_state(t)),
                                          ControlInput::unflatten(nominal_input(t)), params);
      return std::pair<MatrixXd, MatrixXd>(lin.A, lin.B * M);
    };
    grid_ = riccati_backward_fn(knots, ab, w.Q, w.R, w.Qf, grid_refinement, cap);
    K_.resize(grid_.times.size());
    for (std::size_t i = 0; i < K_.size(); ++i) K_[i] = M * grid_.K[i];
  }

  double t0() const { return traj_.t0; }
  double t_end() const { return traj_.t0 + traj_.duration(); }
  const Trajectory& nominal() const { return traj_; }
  const TvlqrWeights& weights() const { return weights_; }
  const RiccatiGrid& grid() const { return grid_; }
  const std::vector<double>& times() const { return grid_.times; }
  const MatrixXd& S(std::size_t i) const { return grid_.S[i]; }
  /// Full 5-input gain at grid point i.
  const Eigen::Matrix<double, kInputDim, kStateDim>& K(std::size_t i) const { return K_[i]; }

  /// Cubic Hermite interpolation of the knots using f(x_k, u_k) as slopes;
  /// clamped outside the horizon.
  StateVector nominal_state(double t) const {
    const auto [k, tau] = locate(t);
    if (tau <= 0.0) return traj_.x[k];
    const double h = traj_.h;
    const double t2 = tau * tau, t3 = t2 * tau;
    return (2 * t3 - 3 * t2 + 1) * traj_.x[k] + (t3 - 2 * t2 + tau) * h * xdot_[k] +
           (-2 * t3 + 3 * t2) * traj_.x[k + 1] + (t3 - t2) * h * xdot_[k + 1];
  }

  /// Linear interpolation of the knot inputs; clamped outside the horizon.
  InputVector nominal_input(double t) const {
    const auto [k, tau] = locate(t);
    if (tau <= 0.0) return traj_.u[k];
    return (1.0 - tau) * traj_.u[k] + tau * traj_.u[k + 1];
  }

  /// First-order hold between grid gains; clamped outside the grid.
  Eigen::Matrix<double, kInputDim, kStateDim> gain_at(double t) const {
    const auto& ts = grid_.times;
    if (t <= ts.front()) return K_.front();
    if (t >= ts.back()) return K_.back();
    const std::size_t i = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin() - 1;
    const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
    if (w == 0.0) return K_[i];
    return (1.0 - w) * K_[i] + w * K_[i + 1];
  }

  /// u = u0(t) - K(t)(x - x0(t)), saturated to [u_min, u_max].
  /// `saturations` (when given) is incremented once per clipped channel.
  InputVector feedback_control(double t, const StateVector& x, const InputVector& u_min, const InputVector& u_max,
                               long* saturations = nullptr) const {
    const InputVector u = nominal_input(t) - gain_at(t) * state_error(x, nominal_state(t));
    return saturate(u, u_min, u_max, saturations);
  }

  /// Raw nominal input, saturated the same way (the open-loop variant).
  InputVector open_loop_control(double t, const InputVector& u_min, const InputVector& u_max,
                                long* saturations = nullptr) const {
    return saturate(nominal_input(t), u_min, u_max, saturations);
  }

  /// Per-grid-point gains and cost-to-go diagonals.
  void write_csv(std::ostream& os) const {
    os << "t";
    for (int i = 0; i < kStateDim; ++i) os << ",S" << i;
    for (int r = 0; r < kInputDim; ++r)
      for (int c = 0; c < kStateDim; ++c) os << ",K" << r << '_' << c;
    os << '\n';
    for (std::size_t g = 0; g < grid_.times.size(); ++g) {
      os << grid_.times[g];
      for (int i = 0; i < kStateDim; ++i) os << ',' << grid_.S[g](i, i);
      for (int r = 0; r < kInputDim; ++r)
        for (int c = 0; c < kStateDim; ++c) os << ',' << K_[g](r, c);
      os << '\n';
    }
  }

 private:
  static InputVector saturate(InputVector u, const InputVector& lo, const InputVector& hi, long* count) {
    for (int i = 0; i < kInputDim; ++i) {
      const double c = std::clamp(u(i), lo(i), hi(i));
      if (c != u(i) && count) ++*count;
      u(i) = c;
    }
    return u;
  }

  std::pair<int, double> locate(double t) const {
    const int N = traj_.intervals();
    const double s = (t - traj_.t0) / traj_.h;
    if (!(s > 0.0)) return {0, 0.0};
    if (s >= N) return {N, 0.0};
    const int k = std::min(static_cast<int>(std::floor(s)), N - 1);
    return {k, s - k};
  }

  Trajectory traj_;
  TvlqrWeights weights_;
  std::vector<StateVector> xdot_;
  RiccatiGrid grid_;
  std::vector<Eigen::Matrix<double, kInputDim, kStateDim>> K_;
};

/// Convenience wrapper matching the construction signature.
inline TvlqrPolicy riccati_backward(const Trajectory& traj, const AircraftParams& params,
                                    const TvlqrWeights& w = TvlqrWeights::defaults(),
                                    int grid_refinement = kDefaultGridRefinement, double cap = kDefaultRiccatiCap) {
  return TvlqrPolicy(traj, params, w, grid_refinement, cap);
}

}  // namespace poststall
