#include <gtest/gtest.h>

#include <poststall/control/tvlqr.hpp>
#include <poststall/environment/hallway.hpp>
#include <poststall/harness/pipeline.hpp>

#include "support.hpp"

#include <Eigen/Eigenvalues>

using namespace poststall;
using poststall::test::edge540;
using Eigen::MatrixXd;

namespace {

std::vector<double> uniform_knots(double T, int n) {
  std::vector<double> k(n + 1);
  for (int i = 0; i <= n; ++i) k[i] = T * i / n;
  return k;
}

// Newton-Kleinman iteration for A'P + PA - PBR^-1B'P + Q = 0 from a stabilizing K0.
// Each Lyapunov step is solved through its Kronecker form.
MatrixXd kleinman_care(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R, MatrixXd K) {
  const int n = A.rows();
  const MatrixXd I = MatrixXd::Identity(n, n);
  MatrixXd P;
  for (int it = 0; it < 100; ++it) {
    const MatrixXd Acl = A - B * K;
    const MatrixXd Qbar = Q + K.transpose() * R * K;
    MatrixXd L = MatrixXd::Zero(n * n, n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // vec(Acl' P + P Acl) = (I kron Acl' + Acl' kron I) vec(P)
        L.block(j * n, j * n, n, n) += Acl.transpose() * (i == j ? 1.0 : 0.0);
        L.block(i * n, j * n, n, n) += Acl(j, i) * I;
      }
    const Eigen::VectorXd vq = Eigen::Map<const Eigen::VectorXd>(Qbar.data(), n * n);
    const Eigen::VectorXd vp = L.fullPivLu().solve(-vq);
    const MatrixXd Pn = Eigen::Map<const MatrixXd>(vp.data(), n, n);
    K = R.llt().solve(B.transpose() * Pn);
    if (it > 0 && (Pn - P).norm() <= 1e-14 * Pn.norm()) return Pn;
    P = Pn;
  }
  return P;
}

Trajectory trim_trajectory(int N, double h) {
  const AircraftParams& p = edge540();
  const LevelTrim t = level_trim(p, 4.0);
  Trajectory tr;
  tr.h = h;
  for (int k = 0; k <= N; ++k) {
    AircraftState s = t.state();
    s.r = Vec3(4.0 * h * k, 0.0, -1.0);
    tr.x.push_back(s.flatten());
    tr.u.push_back(t.input(p).flatten());
  }
  return tr;
}

}  // namespace

TEST(Riccati, ScalarClosedForm) {
  // a = 0, b = q = r = 1: S(t) = tanh(T - t + atanh(S_f)).
  const MatrixXd one = MatrixXd::Identity(1, 1);
  auto ab = [&](double) { return std::pair<MatrixXd, MatrixXd>(MatrixXd::Zero(1, 1), one); };
  const double T = 2.0, sf = 0.3;
  const RiccatiGrid g = riccati_backward_fn(uniform_knots(T, 20), ab, one, one, sf * one, 8);
  for (std::size_t i = 0; i < g.times.size(); ++i) {
    EXPECT_NEAR(g.S[i](0, 0), std::tanh(T - g.times[i] + std::atanh(sf)), 1e-9) << g.times[i];
    EXPECT_EQ(g.K[i](0, 0), g.S[i](0, 0));
  }
}

TEST(Riccati, LongHorizonMatchesKleinmanCare) {
  // Lightly damped oscillator plus an integrator, two inputs.
  MatrixXd A(3, 3), B(3, 2), Q(3, 3), R(2, 2);
  A << 0, 1, 0, -2, -0.1, 0, 1, 0, 0;
  B << 0, 0, 1, 0.5, 0, 1;
  Q = Eigen::Vector3d(1, 0.5, 2).asDiagonal();
  R = Eigen::Vector2d(0.3, 1.0).asDiagonal();
  MatrixXd K0(2, 3);
  K0 << 1, 1, 0, 0, 0, 1;
  ASSERT_LT((A - B * K0).eigenvalues().real().maxCoeff(), 0.0);
  const MatrixXd P = kleinman_care(A, B, Q, R, K0);

  auto ab = [&](double) { return std::pair<MatrixXd, MatrixXd>(A, B); };
  const RiccatiGrid g = riccati_backward_fn(uniform_knots(40.0, 400), ab, Q, R, Q);
  EXPECT_LT((g.S.front() - P).norm() / P.norm(), 1e-6);
  EXPECT_LT((g.K.front() - R.llt().solve(B.transpose() * P)).norm() / P.norm(), 1e-6);
}

TEST(Riccati, TerminalValueIsExact) {
  const MatrixXd Qf = Eigen::Vector2d(3.7, 0.1).asDiagonal();
  MatrixXd A(2, 2), B(2, 1);
  A << 0, 1, 0, 0;
  B << 0, 1;
  auto ab = [&](double) { return std::pair<MatrixXd, MatrixXd>(A, B); };
  const RiccatiGrid g = riccati_backward_fn(uniform_knots(1.0, 5), ab, MatrixXd::Identity(2, 2),
                                            MatrixXd::Identity(1, 1), Qf, 3);
  EXPECT_EQ(g.S.back(), Qf);
  EXPECT_EQ(g.times.size(), 16u);
}

TEST(Riccati, InputChecks) {
  const MatrixXd I = MatrixXd::Identity(1, 1);
  auto ab = [&](double) { return std::pair<MatrixXd, MatrixXd>(I, I); };
  EXPECT_THROW(riccati_backward_fn({0.0}, ab, I, I, I), DomainError);
  EXPECT_THROW(riccati_backward_fn({0.0, 0.0}, ab, I, I, I), DomainError);
  EXPECT_THROW(riccati_backward_fn({0.0, 1.0}, ab, I, -I, I), DomainError);
  EXPECT_THROW(riccati_backward_fn({0.0, 1.0}, ab, I, I, I, 0), DomainError);
}

TEST(Riccati, BlowupIsReported) {
  // Unstable and uncontrollable: S grows like e^{2t}.
  const MatrixXd I = MatrixXd::Identity(1, 1);
  auto ab = [&](double) { return std::pair<MatrixXd, MatrixXd>(5.0 * I, MatrixXd::Zero(1, 1)); };
  EXPECT_THROW(riccati_backward_fn(uniform_knots(10.0, 10), ab, I, I, I, 4, 1e6), RiccatiBlowup);
}

TEST(Policy, TerminalSymmetryAndGainStructure) {
  const Trajectory tr = trim_trajectory(10, 0.1);
  const TvlqrWeights w = TvlqrWeights::defaults();
  const TvlqrPolicy pol(tr, edge540(), w);
  const auto& g = pol.grid();
  EXPECT_EQ(g.S.back(), w.Qf);
  EXPECT_EQ(g.times.size(), 10u * kDefaultGridRefinement + 1);
  const auto M = reduced_input_map();
  for (std::size_t i = 0; i < g.times.size(); ++i) {
    EXPECT_EQ(g.S[i], g.S[i].transpose());
    EXPECT_GT(g.S[i].ldlt().vectorD().minCoeff(), 0.0);
    const MatrixXd K = M * w.R.llt().solve(g.B[i].transpose() * g.S[i]);
    EXPECT_LT((pol.K(i) - K).norm(), 1e-9 * K.norm());
    // Linked ailerons get opposite gains.
    EXPECT_EQ(pol.K(i).row(0), -pol.K(i).row(1));
  }
}

TEST(Policy, GridRefinementConverges) {
  const Trajectory tr = trim_trajectory(10, 0.1);
  const TvlqrPolicy a(tr, edge540(), TvlqrWeights::defaults(), 4), b(tr, edge540(), TvlqrWeights::defaults(), 8);
  EXPECT_LT((a.S(0) - b.S(0)).norm() / b.S(0).norm(), 1e-6);
}

TEST(Policy, InterpolationAndClamping) {
  Trajectory tr = trim_trajectory(6, 0.1);
  tr.t0 = 2.0;
  for (int k = 0; k <= 6; ++k) tr.u[k](2) = 0.1 * k;
  const TvlqrPolicy pol(tr, edge540());
  for (int k = 0; k <= 6; ++k) {
    EXPECT_LT((pol.nominal_state(tr.time(k)) - tr.x[k]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((pol.nominal_input(tr.time(k)) - tr.u[k]).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_NEAR(pol.nominal_input(2.25)(2), 0.25, 1e-12);
  EXPECT_EQ(pol.nominal_state(0.0), tr.x.front());
  EXPECT_EQ(pol.nominal_state(9.0), tr.x.back());
  EXPECT_EQ(pol.gain_at(-1.0), pol.K(0));
  EXPECT_EQ(pol.gain_at(99.0), pol.K(pol.times().size() - 1));
  const double tm = 0.5 * (pol.times()[3] + pol.times()[4]);
  EXPECT_LT((pol.gain_at(tm) - 0.5 * (pol.K(3) + pol.K(4))).norm(), 1e-12 * pol.K(3).norm());
}

TEST(Policy, FeedbackLaw) {
  const Trajectory tr = trim_trajectory(6, 0.1);
  const TvlqrPolicy pol(tr, edge540());
  struct { InputVector lo, hi; } wide{InputVector::Constant(-1e9), InputVector::Constant(1e9)};
  long sat = 0;
  EXPECT_EQ(pol.feedback_control(0.2, pol.nominal_state(0.2), wide.lo, wide.hi, &sat), pol.nominal_input(0.2));
  EXPECT_EQ(sat, 0);

  StateVector x = pol.nominal_state(0.2);
  x(idx::v + 2) += 0.1;
  const InputVector u = pol.feedback_control(0.2, x, wide.lo, wide.hi);
  StateVector e = StateVector::Zero();
  e(idx::v + 2) = 0.1;
  EXPECT_LT((u - (pol.nominal_input(0.2) - pol.gain_at(0.2) * e)).norm(), 1e-12);

  // Yaw errors are wrapped before the gain applies.
  StateVector y = pol.nominal_state(0.2);
  y(idx::yaw) += 2.0 * std::numbers::pi;
  EXPECT_LT((pol.feedback_control(0.2, y, wide.lo, wide.hi) - pol.nominal_input(0.2)).norm(), 1e-9);

  const InputVector lo = InputVector::Constant(-0.01), hi = InputVector::Constant(0.01);
  x(idx::v + 2) += 5.0;
  const InputVector s = pol.feedback_control(0.2, x, lo, hi, &sat);
  EXPECT_GT(sat, 0);
  EXPECT_LE(s.maxCoeff(), 0.01);
  EXPECT_GE(s.minCoeff(), -0.01);
  long open = 0;
  EXPECT_EQ(pol.open_loop_control(0.2, lo, hi, &open)(4), 0.01);
  EXPECT_EQ(open, 1);
}

TEST(Policy, FeedbackRestoresSpeedAndSinkRate) {
  // Sign check: the gain pushes throttle up when the plane is slow.
  const Trajectory tr = trim_trajectory(6, 0.1);
  const TvlqrPolicy pol(tr, edge540());
  StateVector slow = pol.nominal_state(0.0);
  slow(idx::v) -= 0.5;
  const InputVector wide = InputVector::Constant(1e9);
  EXPECT_GT(pol.feedback_control(0.0, slow, -wide, wide)(idx::u_throttle), pol.nominal_input(0.0)(idx::u_throttle));
}

TEST(Policy, CornerSolutionWithDefaultWeights) {
  const HallwaySpec spec = l_corner_hallway();
  auto field = std::make_shared<const DistanceField>(build_field(spec));
  auto params = std::make_shared<const AircraftParams>(edge540());
  const LevelTrimTable trims(*params);
  AircraftState s = trims.at(4.0).state();
  s.r = spec.start.position + Vec3(2.9, 0, 0);
  PlannerConfig pc;
  SeedPlan plan = plan_seed(*field, s.flatten(), spec.goal, pc, 100);
  const NlpProblem prob = make_problem(field, params, trims, s.flatten(), plan, pc);
  const NlpResult r = solve(prob, plan.seed);
  ASSERT_EQ(r.report.status, NlpStatus::Feasible);
  TvlqrPolicy pol;
  ASSERT_NO_THROW(pol = TvlqrPolicy(r.traj, *params));
  for (std::size_t i = 0; i < pol.times().size(); ++i) EXPECT_TRUE(pol.S(i).allFinite());
  const TvlqrPolicy fine(r.traj, *params, TvlqrWeights::defaults(), 8);
  EXPECT_LT((pol.S(0) - fine.S(0)).norm() / fine.S(0).norm(), 1e-6);
}
