#pragma once

// Augmented-Lagrangian feasibility solver for the transcribed problem.
//
// Outer loop: multiplier and penalty updates on the equality defects and the
// collision inequalities. Inner loop: projected Levenberg-Marquardt on the
// augmented residual, with simple bounds kept by projection and an active set.
// Decision variables are scaled by the half-width of their bounds.

#include <poststall/trajopt/problem.hpp>

#include <chrono>
#include <ostream>
#include <optional>

namespace poststall {

struct SolverConfig {
  double tol_defect = 1e-4;  ///< inf-norm of defects in normalized state units
  double tol_cons = 1e-6;    ///< bound and collision violation [m]
  int max_outer = 10;
  int max_inner = 40;
  int max_iterations = 150;  ///< total Levenberg-Marquardt iterations
  double rho_init = 1.0;
  double rho_growth = 10.0;
  double rho_max = 1e6;
  double lm_init = 1e-3;
  double lm_max = 1e10;
  double fd_step = 1e-6;
  double collision_margin = 1e-4;  ///< inner target keeps this much extra clearance [m]
  double stationarity_tol = 1e-12;
  std::ostream* trace = nullptr;   ///< per-iteration progress lines when set
};

enum class NlpStatus { Feasible, Infeasible, IterationLimit };

inline const char* to_string(NlpStatus s) {
  switch (s) {
    case NlpStatus::Feasible: return "feasible";
    case NlpStatus::Infeasible: return "infeasible";
    case NlpStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

struct NlpReport {
  NlpStatus status = NlpStatus::Infeasible;
  int iterations = 0;        ///< Levenberg-Marquardt iterations
  int outer_iterations = 0;
  double solve_time = 0.0;     ///< wall clock [s]
  double dynamics_time = 0.0;  ///< wall clock spent inside f, A, B [s]
  long dynamics_evals = 0;
  double max_defect = 0.0;     ///< normalized, including aileron linkage
  double max_violation = 0.0;  ///< bounds and collision [m or native units]
  bool warm_started = false;
};

/// Solver state carried between solves of neighbouring problems.
struct WarmStart {
  Trajectory traj;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  double rho = 1.0;
  double lm = 1e-3;
};

struct NlpResult {
  Trajectory traj;
  NlpReport report;
  WarmStart warm;
};

namespace detail {

/// Constraint values and Jacobians of one problem, in unscaled variables.
class NlpEvaluator {
 public:
  NlpEvaluator(const NlpProblem& p, const SolverConfig& cfg) : p_(p), cfg_(cfg), model_{p.params.get()} {
    N_ = p.N;
    sx_ = p.state_scale();
    su_ = p.input_scale();
    n_defect_ = kStateDim * N_;
    n_link_ = p.linked_ailerons ? N_ + 1 : 0;
    n_col_ = p.field ? (p.method == Transcription::HermiteSimpson ? 2 * N_ : N_) : 0;
  }

  int n_var() const { return decision_size(N_); }
  int n_eq() const { return n_defect_ + n_link_; }
  int n_ineq() const { return n_col_; }

  struct Values {
    Eigen::VectorXd c;  // normalized equalities
    Eigen::VectorXd g;  // clearance minus the inner radius [m]
    double max_defect = 0.0;
    double max_collision = 0.0;  // against the true radius
  };

  double dynamics_time = 0.0;
  long dynamics_evals = 0;

  /// Returns false when the dynamics cannot be evaluated (gimbal lock).
  bool evaluate(const Eigen::VectorXd& z, Values& out, Eigen::MatrixXd* Jc, Eigen::MatrixXd* Jg) {
    try {
      eval_impl(z, out, Jc, Jg);
      return out.c.allFinite() && out.g.allFinite();
    } catch (const GimbalLock&) {
      return false;
    }
  }

 private:
  StateVector f(const StateVector& x, const InputVector& u) {
    const auto t0 = std::chrono::steady_clock::now();
    StateVector xd = model_(x, u);
    dynamics_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++dynamics_evals;
    return xd;
  }

  Linearization lin(const StateVector& x, const InputVector& u) {
    const auto t0 = std::chrono::steady_clock::now();
    Linearization l = linearize_fn(model_, x, u, cfg_.fd_step);
    dynamics_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    dynamics_evals += 2 * (kStateDim + kInputDim);
    return l;
  }

  // Clearance and the exact gradient of its interpolant.
  std::pair<double, Vec3> clearance(const Vec3& pos) const {
    const double d = p_.field->min_distance(pos);
    return {d, p_.field->interpolant_gradient(pos)};
  }

  void eval_impl(const Eigen::VectorXd& z, Values& out, Eigen::MatrixXd* Jc, Eigen::MatrixXd* Jg) {
    const bool jac = Jc != nullptr;
    const int n = n_var();
    const double h = z(step_offset(N_));
    const int hcol = step_offset(N_);
    out.c.setZero(n_eq());
    out.g.setZero(n_ineq());
    out.max_defect = 0.0;
    out.max_collision = 0.0;
    if (jac) {
      Jc->setZero(n_eq(), n);
      Jg->setZero(n_ineq(), n);
    }
    auto X = [&](int k) { return StateVector(z.segment<kStateDim>(state_offset(k))); };
    auto U = [&](int k) { return InputVector(z.segment<kInputDim>(input_offset(N_, k))); };

    std::vector<StateVector> fk(N_ + 1);
    std::vector<Linearization> lk(jac ? N_ + 1 : 0);
    for (int k = 0; k <= N_; ++k) {
      fk[k] = f(X(k), U(k));
      if (jac) lk[k] = lin(X(k), U(k));
    }
    const StateMatrix I = StateMatrix::Identity();
    const double r_inner = p_.radius + cfg_.collision_margin;
    int gi = 0;

    auto add_collision = [&](const Vec3& pos, auto&& write_gradient) {
      const auto [d, grad] = clearance(pos);
      out.g(gi) = d - r_inner;
      out.max_collision = std::max(out.max_collision, p_.radius - d);
      if (jac) write_gradient(gi, grad);
      ++gi;
    };

    for (int k = 0; k < N_; ++k) {
      const int row = kStateDim * k;
      const StateVector xk = X(k), xk1 = X(k + 1);
      const InputVector uk = U(k), uk1 = U(k + 1);
      StateVector D;
      if (p_.method == Transcription::Euler) {
        D = xk + h * fk[k] - xk1;
        if (jac) {
          Jc->block<kStateDim, kStateDim>(row, state_offset(k)) = I + h * lk[k].A;
          Jc->block<kStateDim, kStateDim>(row, state_offset(k + 1)) = -I;
          Jc->block<kStateDim, kInputDim>(row, input_offset(N_, k)) = h * lk[k].B;
          Jc->block<kStateDim, 1>(row, hcol) = fk[k];
        }
      } else {
        const StateVector xc = hermite_midpoint(xk, xk1, fk[k], fk[k + 1], h);
        const InputVector uc = 0.5 * (uk + uk1);
        const StateVector fc = f(xc, uc);
        D = xk - xk1 + (h / 6.0) * (fk[k] + 4.0 * fc + fk[k + 1]);
        if (jac) {
          const Linearization lc = lin(xc, uc);
          const StateMatrix Xk = 0.5 * I + (h / 8.0) * lk[k].A;
          const StateMatrix Xk1 = 0.5 * I - (h / 8.0) * lk[k + 1].A;
          const InputMatrix Uk = (h / 8.0) * lk[k].B;
          const InputMatrix Uk1 = -(h / 8.0) * lk[k + 1].B;
          const StateVector Hc = (fk[k] - fk[k + 1]) / 8.0;
          const StateMatrix Fxk = lc.A * Xk, Fxk1 = lc.A * Xk1;
          const InputMatrix Fuk = lc.A * Uk + 0.5 * lc.B, Fuk1 = lc.A * Uk1 + 0.5 * lc.B;
          Jc->block<kStateDim, kStateDim>(row, state_offset(k)) = I + (h / 6.0) * (lk[k].A + 4.0 * Fxk);
          Jc->block<kStateDim, kStateDim>(row, state_offset(k + 1)) = -I + (h / 6.0) * (4.0 * Fxk1 + lk[k + 1].A);
          Jc->block<kStateDim, kInputDim>(row, input_offset(N_, k)) = (h / 6.0) * (lk[k].B + 4.0 * Fuk);
          Jc->block<kStateDim, kInputDim>(row, input_offset(N_, k + 1)) = (h / 6.0) * (4.0 * Fuk1 + lk[k + 1].B);
          Jc->block<kStateDim, 1>(row, hcol) =
              (fk[k] + 4.0 * fc + fk[k + 1]) / 6.0 + (h / 6.0) * 4.0 * (lc.A * Hc);
          if (p_.field) {
            add_collision(xc.head<3>(), [&](int r, const Vec3& gr) {
              Jg->block<1, kStateDim>(r, state_offset(k)) = gr.transpose() * Xk.topRows<3>();
              Jg->block<1, kStateDim>(r, state_offset(k + 1)) = gr.transpose() * Xk1.topRows<3>();
              Jg->block<1, kInputDim>(r, input_offset(N_, k)) = gr.transpose() * Uk.topRows<3>();
              Jg->block<1, kInputDim>(r, input_offset(N_, k + 1)) = gr.transpose() * Uk1.topRows<3>();
              (*Jg)(r, hcol) = gr.dot(Hc.head<3>());
            });
          }
        } else if (p_.field) {
          add_collision(xc.head<3>(), [](int, const Vec3&) {});
        }
      }
      const StateVector Dn = D.cwiseQuotient(sx_);
      out.c.segment<kStateDim>(row) = Dn;
      out.max_defect = std::max(out.max_defect, Dn.cwiseAbs().maxCoeff());
      if (jac) Jc->middleRows<kStateDim>(row) = sx_.cwiseInverse().asDiagonal() * Jc->middleRows<kStateDim>(row);
    }
    if (p_.field) {
      for (int k = 1; k <= N_; ++k) {
        add_collision(X(k).head<3>(), [&](int r, const Vec3& gr) {
          Jg->block<1, 3>(r, state_offset(k)) = gr.transpose();
        });
      }
    }
    for (int k = 0; k < n_link_; ++k) {
      const int row = n_defect_ + k;
      const double s = su_(0);
      out.c(row) = (z(input_offset(N_, k)) + z(input_offset(N_, k) + 1)) / s;
      out.max_defect = std::max(out.max_defect, std::abs(out.c(row)));
      if (jac) {
        (*Jc)(row, input_offset(N_, k)) = 1.0 / s;
        (*Jc)(row, input_offset(N_, k) + 1) = 1.0 / s;
      }
    }
  }

  const NlpProblem& p_;
  const SolverConfig& cfg_;
  AircraftModel model_;
  int N_ = 0;
  StateVector sx_;
  InputVector su_;
  int n_defect_ = 0, n_link_ = 0, n_col_ = 0;
};

struct VariableBox {
  Eigen::VectorXd lo, hi, scale;
};

inline VariableBox variable_box(const NlpProblem& p) {
  const int n = decision_size(p.N);
  VariableBox b{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int k = 0; k <= p.N; ++k) {
    StateVector lo = p.x_min, hi = p.x_max;
    if (k == 0) {
      lo = p.initial_lo();
      hi = p.initial_hi();
    } else if (k == p.N) {
      lo = p.terminal_lo();
      hi = p.terminal_hi();
    }
    b.lo.segment<kStateDim>(state_offset(k)) = lo;
    b.hi.segment<kStateDim>(state_offset(k)) = hi;
    b.scale.segment<kStateDim>(state_offset(k)) = p.state_scale();
    b.lo.segment<kInputDim>(input_offset(p.N, k)) = p.u_min;
    b.hi.segment<kInputDim>(input_offset(p.N, k)) = p.u_max;
    b.scale.segment<kInputDim>(input_offset(p.N, k)) = p.input_scale();
  }
  b.lo(step_offset(p.N)) = p.h_min;
  b.hi(step_offset(p.N)) = p.h_max;
  b.scale(step_offset(p.N)) = std::max(0.5 * (p.h_max - p.h_min), 1e-3);
  return b;
}

/// One damped Gauss-Newton step restricted to the box. Components that would
/// leave the box are pinned at the bound and the reduced system is re-solved,
/// so the returned point is the exact minimizer over the final free set.
/// Returns nullopt when the damped matrix is not positive definite.
inline std::optional<Eigen::VectorXd> bounded_lm_step(const Eigen::MatrixXd& H, const Eigen::VectorXd& grad,
                                                      const Eigen::VectorXd& y, const Eigen::VectorXd& lo,
                                                      const Eigen::VectorXd& hi, std::vector<char> pinned,
                                                      double lm) {
  const int n = static_cast<int>(y.size());
  Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    if (pinned[i]) step(i) = std::clamp(y(i), lo(i), hi(i)) - y(i);
  for (int pass = 0; pass < 8; ++pass) {
    std::vector<int> free, fixed;
    for (int i = 0; i < n; ++i) (pinned[i] ? fixed : free).push_back(i);
    if (free.empty()) return Eigen::VectorXd(y + step);
    Eigen::MatrixXd HF = H(free, free);
    HF.diagonal().array() += lm;
    Eigen::VectorXd rhs = -grad(free);
    if (!fixed.empty()) rhs -= H(free, fixed) * step(fixed);
    Eigen::LLT<Eigen::MatrixXd> llt(HF);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd dF = llt.solve(rhs);
    bool clipped = false;
    for (std::size_t j = 0; j < free.size(); ++j) {
      const int i = free[j];
      step(i) = dF(j);
      const double target = y(i) + dF(j);
      if (target < lo(i) || target > hi(i)) {
        pinned[i] = 1;
        step(i) = std::clamp(target, lo(i), hi(i)) - y(i);
        clipped = true;
      }
    }
    if (!clipped) break;
  }
  return Eigen::VectorXd((y + step).cwiseMax(lo).cwiseMin(hi));
}

}  // namespace detail

/// Recomputes every constraint of the problem for a trajectory, independently
/// of the solver's internal bookkeeping. Fills max_defect / max_violation and
/// sets status to Feasible or Infeasible.
inline NlpReport verify_feasibility(const NlpProblem& p, const Trajectory& t, const SolverConfig& cfg = {}) {
  p.check();
  NlpReport rep;
  if (t.intervals() != p.N) throw DomainError("trajectory and problem disagree on N");
  const AircraftParams& params = *p.params;
  auto f = [&](const StateVector& x, const InputVector& u) { return state_derivative(x, u, params); };
  const StateVector sx = p.state_scale();
  double defect = 0.0, viol = 0.0;
  auto box = [&](double v, double lo, double hi) { viol = std::max({viol, lo - v, v - hi}); };
  try {
    for (int k = 0; k < p.N; ++k) {
      const StateVector d = p.method == Transcription::HermiteSimpson
                                ? hermite_simpson_defect(f, t.x[k], t.u[k], t.x[k + 1], t.u[k + 1], t.h)
                                : euler_defect(f, t.x[k], t.u[k], t.x[k + 1], t.h);
      defect = std::max(defect, d.cwiseQuotient(sx).cwiseAbs().maxCoeff());
      if (p.field) {
        viol = std::max(viol, p.radius - p.field->min_distance(t.x[k + 1].head<3>()));
        if (p.method == Transcription::HermiteSimpson) {
          const StateVector xc =
              hermite_midpoint(t.x[k], t.x[k + 1], f(t.x[k], t.u[k]), f(t.x[k + 1], t.u[k + 1]), t.h);
          viol = std::max(viol, p.radius - p.field->min_distance(xc.head<3>()));
        }
      }
    }
  } catch (const GimbalLock&) {
    rep.max_defect = std::numeric_limits<double>::infinity();
    rep.status = NlpStatus::Infeasible;
    return rep;
  }
  if (p.linked_ailerons)
    for (const auto& u : t.u) defect = std::max(defect, std::abs(u(0) + u(1)) / p.input_scale()(0));
  for (int k = 0; k <= p.N; ++k) {
    for (int i = 0; i < kStateDim; ++i) box(t.x[k](i), p.x_min(i), p.x_max(i));
    for (int i = 0; i < kInputDim; ++i) box(t.u[k](i), p.u_min(i), p.u_max(i));
  }
  for (int i = 0; i < kStateDim; ++i) {
    box(t.x.front()(i), p.x_i(i) - p.delta_i(i), p.x_i(i) + p.delta_i(i));
    box(t.x.back()(i), p.x_f(i) - p.delta_f(i), p.x_f(i) + p.delta_f(i));
  }
  box(t.h, p.h_min, p.h_max);
  rep.max_defect = defect;
  rep.max_violation = std::max(viol, 0.0);
  rep.status = defect <= cfg.tol_defect && rep.max_violation <= cfg.tol_cons ? NlpStatus::Feasible
                                                                             : NlpStatus::Infeasible;
  return rep;
}

/// Solves the feasibility problem from `init`, optionally reusing multipliers,
/// penalty and damping from a previous solve. Always returns the least
/// violating iterate seen together with its report.
inline NlpResult solve(const NlpProblem& prob, const Trajectory& init, const SolverConfig& cfg = {},
                       const WarmStart* warm = nullptr) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  prob.check();
  if (init.intervals() != prob.N || static_cast<int>(init.u.size()) != prob.N + 1)
    throw DomainError("initial trajectory does not match the problem's knot count");

  detail::NlpEvaluator ev(prob, cfg);
  const detail::VariableBox box = detail::variable_box(prob);
  const int n = ev.n_var(), ne = ev.n_eq(), ni = ev.n_ineq();

  NlpResult res;
  res.report.warm_started = warm != nullptr;
  auto finish = [&](const Eigen::VectorXd& z, NlpStatus status, const detail::NlpEvaluator::Values& v,
                    const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu, double rho, double lm) {
    res.traj = unpack(z, prob.N, init.t0);
    res.report.status = status;
    res.report.max_defect = v.max_defect;
    res.report.max_violation = std::max(v.max_collision, 0.0);
    res.report.dynamics_time = ev.dynamics_time;
    res.report.dynamics_evals = ev.dynamics_evals;
    res.report.solve_time = std::chrono::duration<double>(Clock::now() - t_start).count();
    res.warm = WarmStart{res.traj, lambda, mu, rho, lm};
    return res;
  };

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(ne), mu = Eigen::VectorXd::Zero(ni);
  double rho = cfg.rho_init, lm = cfg.lm_init;
  if (warm && warm->lambda.size() == ne && warm->mu.size() == ni) {
    lambda = warm->lambda;
    mu = warm->mu;
    rho = warm->rho;
    lm = std::max(warm->lm, 1e-8);
  }

  // Scaled variables y = z / scale, projected into the box.
  const Eigen::VectorXd lo = box.lo.cwiseQuotient(box.scale), hi = box.hi.cwiseQuotient(box.scale);
  Eigen::VectorXd y = pack(init).cwiseQuotient(box.scale);
  detail::NlpEvaluator::Values v;
  if ((lo.array() > hi.array()).any()) {
    ev.evaluate(y.cwiseProduct(box.scale), v, nullptr, nullptr);
    v.max_collision = std::numeric_limits<double>::infinity();
    return finish(y.cwiseProduct(box.scale), NlpStatus::Infeasible, v, lambda, mu, rho, lm);
  }
  y = y.cwiseMax(lo).cwiseMin(hi);

  Eigen::MatrixXd Jc, Jg;
  auto feasible = [&](const detail::NlpEvaluator::Values& val) {
    return val.max_defect <= cfg.tol_defect && val.max_collision <= cfg.tol_cons;
  };
  auto violation = [&](const detail::NlpEvaluator::Values& val) {
    return std::max(val.max_defect, std::max(val.max_collision, 0.0));
  };
  // Augmented residual: merit = 0.5 |R|^2.
  auto residual = [&](const detail::NlpEvaluator::Values& val) {
    Eigen::VectorXd R(ne + ni);
    R.head(ne) = val.c + lambda / rho;
    R.tail(ni) = (mu / rho - val.g).cwiseMax(0.0);
    return R;
  };

  if (!ev.evaluate(y.cwiseProduct(box.scale), v, &Jc, &Jg)) {
    v.max_defect = std::numeric_limits<double>::infinity();
    return finish(y.cwiseProduct(box.scale), NlpStatus::Infeasible, v, lambda, mu, rho, lm);
  }
  Eigen::VectorXd best_y = y;
  detail::NlpEvaluator::Values best_v = v;
  if (feasible(v)) return finish(y.cwiseProduct(box.scale), NlpStatus::Feasible, v, lambda, mu, rho, lm);

  int total = 0;
  double prev_violation = violation(v);
  int stalled_outers = 0;
  NlpStatus status = NlpStatus::IterationLimit;
  for (int outer = 0; outer < cfg.max_outer && total < cfg.max_iterations; ++outer) {
    res.report.outer_iterations = outer + 1;
    bool stationary = false;
    for (int inner = 0; inner < cfg.max_inner && total < cfg.max_iterations; ++inner) {
      ++total;
      Eigen::VectorXd R = residual(v);
      Eigen::MatrixXd J(ne + ni, n);
      J.topRows(ne) = Jc;
      for (int i = 0; i < ni; ++i) J.row(ne + i) = R(ne + i) > 0.0 ? Eigen::RowVectorXd(-Jg.row(i)) : Eigen::RowVectorXd::Zero(n);
      J = J * box.scale.asDiagonal();
      const Eigen::VectorXd grad = J.transpose() * R;
      const double merit = 0.5 * R.squaredNorm();

      // Variables pinned at a bound with the gradient pushing outwards start active.
      std::vector<char> pinned(n, 0);
      double pg = 0.0;
      for (int i = 0; i < n; ++i) {
        const bool at_lo = y(i) <= lo(i) && grad(i) > 0.0;
        const bool at_hi = y(i) >= hi(i) && grad(i) < 0.0;
        if (at_lo || at_hi || hi(i) - lo(i) <= 1e-12) pinned[i] = 1;
        else pg = std::max(pg, std::abs(grad(i)));
      }
      if (pg <= cfg.stationarity_tol) {
        stationary = true;
        break;
      }
      const Eigen::MatrixXd H = J.transpose() * J;

      bool accepted = false;
      double nu = 2.0;
      while (lm <= cfg.lm_max) {
        const auto yt = detail::bounded_lm_step(H, grad, y, lo, hi, pinned, lm);
        if (!yt) {
          lm *= nu;
          nu *= 2.0;
          continue;
        }
        const Eigen::VectorXd step = *yt - y;
        const double pred = merit - 0.5 * (R + J * step).squaredNorm();
        detail::NlpEvaluator::Values vt;
        if (pred > 0.0 && ev.evaluate(yt->cwiseProduct(box.scale), vt, nullptr, nullptr)) {
          const double actual = merit - 0.5 * residual(vt).squaredNorm();
          const double ratio = actual / pred;
          if (cfg.trace) *cfg.trace << "  it " << total << " merit " << merit << " pred " << pred << " actual " << actual << " lm " << lm << " defect " << vt.max_defect << " col " << vt.max_collision << "\n";
          if (ratio > 1e-4) {
            lm *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * ratio - 1.0, 3));
            lm = std::max(lm, 1e-12);
            y = *yt;
            accepted = true;
            break;
          }
        }
        lm *= nu;
        nu *= 2.0;
      }
      if (!accepted) {
        lm = std::min(lm, cfg.lm_max);
        stationary = true;
        break;
      }
      if (!ev.evaluate(y.cwiseProduct(box.scale), v, &Jc, &Jg)) {
        // Unreachable in practice: the residual at y evaluated fine above.
        stationary = true;
        break;
      }
      if (violation(v) < violation(best_v)) {
        best_y = y;
        best_v = v;
      }
      if (feasible(v)) {
        res.report.iterations = total;
        return finish(y.cwiseProduct(box.scale), NlpStatus::Feasible, v, lambda, mu, rho, lm);
      }
    }
    // Multiplier and penalty update.
    lambda += rho * v.c;
    mu = (mu - rho * v.g).cwiseMax(0.0);
    const double viol = violation(v);
    if (viol > 0.25 * prev_violation) rho = std::min(rho * cfg.rho_growth, cfg.rho_max);
    stalled_outers = stationary && viol > 0.9 * prev_violation ? stalled_outers + 1 : 0;
    prev_violation = std::min(prev_violation, viol);
    if (stalled_outers >= 2) {
      status = NlpStatus::Infeasible;
      break;
    }
  }
  res.report.iterations = total;
  return finish(best_y.cwiseProduct(box.scale), status, best_v, lambda, mu, rho, lm);
}

/// Re-solves after the measured initial state moved, reusing the previous
/// solution and solver state.
inline NlpResult resolve_warm(NlpProblem prob, const WarmStart& previous, const StateVector& new_x_i,
                              const SolverConfig& cfg = {}) {
  prob.x_i = new_x_i;
  Trajectory init = previous.traj;
  if (init.intervals() != prob.N) throw DomainError("warm start has a different knot count");
  init.x.front() = new_x_i;
  return solve(prob, init, cfg, &previous);
}

}  // namespace poststall
