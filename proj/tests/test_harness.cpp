#include <gtest/gtest.h>

#include <poststall/harness/benchmark.hpp>
#include <poststall/harness/closed_loop.hpp>
#include <poststall/harness/trim_turn.hpp>
#include <poststall/io/solver_io.hpp>
#include <poststall/io/tables.hpp>

#include "support.hpp"

#include <sstream>

using namespace poststall;
using poststall::test::edge540;

namespace {

double area_of(const AircraftParams& p, const std::string& name) {
  for (const auto& s : p.surfaces)
    if (s.name == name) return s.area;
  ADD_FAILURE() << "no surface " << name;
  return 0.0;
}

std::vector<double> sweep_caps() {
  std::vector<double> c;
  for (int d = 10; d <= 70; d += 5) c.push_back(deg2rad(d));
  return c;
}

}  // namespace

TEST(TrimTurn, RadiusShrinksWithTheCap) {
  const std::vector<double> caps = sweep_caps();
  const auto rows = trim_turn_radius(caps, edge540());
  ASSERT_EQ(rows.size(), caps.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].alpha_cap, caps[i]);
    EXPECT_LT(rows[i].residual, 1e-8) << i;
    EXPECT_LE(rows[i].wing_aoa, caps[i] + 1e-9);
    EXPECT_NEAR(rows[i].radius, turn_radius(rows[i].speed, rows[i].yaw_rate), 1e-9 * rows[i].radius);
    if (i > 0) EXPECT_LE(rows[i].radius, rows[i - 1].radius) << i;
  }
  const double r15 = rows[1].radius, r60 = rows[10].radius;
  EXPECT_LT(r60, 0.5 * r15);
}

TEST(TrimTurn, UnsortedCapsKeepTheirOrder) {
  const auto rows = trim_turn_radius({deg2rad(40), deg2rad(20)}, edge540());
  EXPECT_EQ(rows[0].alpha_cap, deg2rad(40));
  EXPECT_LE(rows[0].radius, rows[1].radius);
}

TEST(TrimTurn, Sentinels) {
  EXPECT_TRUE(std::isinf(turn_radius(4.0, 0.0)));
  EXPECT_EQ(turn_radius(4.0, -2.0), 2.0);
  EXPECT_TRUE(trim_turn_radius({}, edge540()).empty());
  EXPECT_THROW(trim_turn_radius({0.0}, edge540()), DomainError);
  EXPECT_THROW(trim_turn_radius({2.0}, edge540()), DomainError);
  const AircraftParams bare = without_control_surfaces(edge540());
  for (const auto& s : bare.surfaces) EXPECT_FALSE(s.actuated()) << s.name;
  EXPECT_EQ(bare.surfaces.size(), 6u);
}

TEST(Mismatch, UncorrectedModelUndoesIdentification) {
  const AircraftParams& truth = edge540();
  const AircraftParams m = uncorrected_model(truth);
  EXPECT_DOUBLE_EQ(area_of(m, "wing_right"), 0.5 * area_of(truth, "wing_right"));
  EXPECT_DOUBLE_EQ(area_of(m, "wing_left"), 0.5 * area_of(truth, "wing_left"));
  EXPECT_DOUBLE_EQ(area_of(m, "fuselage_horizontal"), 0.5 * area_of(truth, "fuselage_horizontal"));
  EXPECT_DOUBLE_EQ(area_of(m, "rudder"), area_of(truth, "rudder") / 0.75);
  EXPECT_EQ(area_of(m, "elevator"), area_of(truth, "elevator"));
  EXPECT_EQ(area_of(m, "fuselage_vertical"), area_of(truth, "fuselage_vertical"));
  EXPECT_EQ(m.mass, truth.mass);
}

TEST(Mismatch, PerturbedModelIsSeededAndBounded) {
  const AircraftParams& p = edge540();
  const AircraftParams a = perturbed_model(p, 3), b = perturbed_model(p, 3), c = perturbed_model(p, 4);
  bool differs = false;
  for (std::size_t i = 0; i < p.surfaces.size(); ++i) {
    EXPECT_EQ(a.surfaces[i].area, b.surfaces[i].area);
    differs |= a.surfaces[i].area != c.surfaces[i].area;
    const double f = a.surfaces[i].area / p.surfaces[i].area;
    EXPECT_GE(f, 0.85);
    EXPECT_LE(f, 1.15);
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.inertia, a.inertia.transpose());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(a.inertia).eigenvalues().minCoeff(), 0.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GE(a.inertia(i, i) / p.inertia(i, i), 0.9 - 1e-12);
    EXPECT_LE(a.inertia(i, i) / p.inertia(i, i), 1.1 + 1e-12);
  }
}

TEST(Plant, SurfacesStopAtTheirTravel) {
  const double travel = deg2rad(45);
  StateVector x = test::fixture_state().flatten();
  x(idx::elevator) = travel;
  InputVector u = InputVector::Zero();
  u(2) = 10.0;
  u(3) = -10.0;
  EXPECT_EQ(stop_limited(x, u, travel)(2), 0.0);
  EXPECT_EQ(stop_limited(x, u, travel)(3), -10.0);
  for (int i = 0; i < 100; ++i) x = plant_step(edge540(), x, u, 1e-3, travel);
  EXPECT_EQ(x(idx::elevator), travel);
  EXPECT_EQ(x(idx::rudder), -travel);
}

namespace {

Trajectory trim_trajectory(int N, double h) {
  const LevelTrim t = level_trim(edge540(), 4.0);
  Trajectory tr;
  tr.h = h;
  for (int k = 0; k <= N; ++k) {
    AircraftState s = t.state();
    s.r = Vec3(4.0 * h * k, 0.0, -1.0);
    tr.x.push_back(s.flatten());
    tr.u.push_back(t.input(edge540()).flatten());
  }
  return tr;
}

}  // namespace

TEST(Following, ExactModelTracksItsOwnTrim) {
  const TvlqrPolicy pol(trim_trajectory(10, 0.1), edge540());
  EXPECT_LT(following_cost(pol, edge540()), 1e-8);
  const FollowingResult open = follow(pol, edge540(), false);
  EXPECT_LT(open.cost, 1e-8);
  EXPECT_EQ(open.saturations, 0);
}

TEST(Following, FeedbackBeatsOpenLoopFromAnOffset) {
  const TvlqrPolicy pol(trim_trajectory(10, 0.1), edge540());
  StateVector x0 = pol.nominal().x.front();
  x0(idx::v + 2) += 0.5;
  x0(idx::roll) += 0.2;
  const double fb = follow(pol, edge540(), true, &x0).cost;
  const double ol = follow(pol, edge540(), false, &x0).cost;
  EXPECT_LT(fb, ol);
}

TEST(SolverIo, DefaultsAndOverrides) {
  const auto d = io::parse_solver_string("format: poststall-solver\nversion: 1\n");
  EXPECT_EQ(d.solver.tol_defect, SolverConfig{}.tol_defect);
  EXPECT_EQ(d.planner.knots, 10);
  const auto s = io::parse_solver_string(
      "format: poststall-solver\nversion: 1\nsolver: {tol_defect: 1e-5, max_outer: 3}\n"
      "problem: {knots: 14, method: euler}\nlimits: {surface_deflection_deg: 30}\nplanner: {kappa_max: 1.5}\n");
  EXPECT_EQ(s.solver.tol_defect, 1e-5);
  EXPECT_EQ(s.solver.max_outer, 3);
  EXPECT_EQ(s.planner.knots, 14);
  EXPECT_EQ(s.planner.method, Transcription::Euler);
  EXPECT_NEAR(s.planner.limits.surface_deflection, deg2rad(30), 1e-15);
  EXPECT_EQ(s.planner.kappa_max, 1.5);
}

TEST(SolverIo, RejectsBadFiles) {
  const std::string head = "format: poststall-solver\nversion: 1\n";
  EXPECT_THROW(io::parse_solver_string("format: other\nversion: 1\n"), ConfigError);
  EXPECT_THROW(io::parse_solver_string("format: poststall-solver\nversion: 9\n"), ConfigError);
  EXPECT_THROW(io::parse_solver_string(head + "solver: {tol_defect: -1}\n"), ConfigError);
  EXPECT_THROW(io::parse_solver_string(head + "solver: {max_outer: abc}\n"), ConfigError);
  EXPECT_THROW(io::parse_solver_string(head + "problem: {knots: 1}\n"), ConfigError);
  EXPECT_THROW(io::parse_solver_string(head + "problem: {method: rk4}\n"), ConfigError);
  EXPECT_THROW(io::parse_solver_string(head + "problem: {delta_f: [1, 2]}\n"), ConfigError);
  EXPECT_THROW(io::parse_solver_string("{{{"), ConfigError);
}

TEST(StateIo, ParsesPlainAndTrajectoryForms) {
  std::string plain = "# state\n";
  for (int i = 0; i < 17; ++i) plain += std::to_string(i) + (i % 5 == 4 ? "\n" : ", ");
  const StateVector x = io::parse_state(plain);
  for (int i = 0; i < 17; ++i) EXPECT_EQ(x(i), i);

  std::ostringstream csv;
  Trajectory t = trim_trajectory(3, 0.1);
  t.x[0] = x;
  io::write_trajectory_csv(csv, t);
  EXPECT_EQ(io::parse_state(csv.str()), x);

  EXPECT_THROW(io::parse_state("1 2 3"), ConfigError);
  EXPECT_THROW(io::parse_state(plain + "17"), ConfigError);
  EXPECT_THROW(io::parse_state(std::string(plain).replace(plain.find('3'), 1, "x")), ConfigError);
  EXPECT_THROW(io::parse_state(std::string(plain).replace(plain.find('3'), 1, "nan")), ConfigError);
}

TEST(Benchmark, MedianAndOffsets) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_TRUE(std::isnan(median({})));
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_LE(start_offset(s, 0.1).norm(), 0.1 + 1e-15);
    EXPECT_EQ(start_offset(s, 0.1), start_offset(s, 0.1));
  }
}

TEST(Benchmark, SingleRowAccounting) {
  const CornerFixture fx = corner_fixture(edge540());
  EXPECT_NEAR((fx.start.head<3>() - fx.map.start.position).norm(), kFixtureAdvance, 1e-12);
  BenchmarkConfig cfg;
  cfg.knots = {10};
  cfg.trials = 2;
  std::vector<TrialRecord> trials;
  const auto rows = benchmark_knots(fx, cfg, &trials);
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_EQ(trials.size(), 2u);
  EXPECT_EQ(rows[0].N, 10);
  EXPECT_EQ(rows[0].trials, 2);
  int feasible = 0;
  for (const auto& t : trials) feasible += t.planned && t.status == NlpStatus::Feasible;
  EXPECT_DOUBLE_EQ(rows[0].feasibility_rate, feasible / 2.0);
  EXPECT_EQ(rows[0].median_solve_time, median({trials[0].solve_time, trials[1].solve_time}));
  std::ostringstream os;
  write_benchmark_csv(os, rows);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  cfg.knots = {};
  EXPECT_THROW(benchmark_knots(fx, cfg), DomainError);
}

TEST(Benchmark, HermiteSimpsonFollowingCostFallsWithKnots) {
  const CornerFixture fx = corner_fixture(edge540());
  BenchmarkConfig cfg;  // default knot list, 5 trials
  const auto rows = benchmark_knots(fx, cfg);
  ASSERT_EQ(rows.size(), cfg.knots.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_TRUE(std::isfinite(rows[i].median_following_cost)) << "N " << rows[i].N;
    if (i > 0) EXPECT_LE(rows[i].median_following_cost, rows[i - 1].median_following_cost) << "N " << rows[i].N;
  }
}

namespace {

RunConfig exact_config(double t_max) {
  RunConfig c;
  c.truth = c.model = std::make_shared<const AircraftParams>(edge540());
  c.max_sim_time = t_max;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(ClosedLoop, ConfigChecks) {
  RunConfig c = exact_config(1.0);
  c.replan_hz = 0.0;
  EXPECT_THROW(closed_loop_run(l_corner_hallway(), c), ConfigError);
  c = exact_config(1.0);
  c.model = nullptr;
  EXPECT_THROW(closed_loop_run(l_corner_hallway(), c), ConfigError);
  c = exact_config(1.0);
  c.sample_period = 1e-4;
  EXPECT_THROW(closed_loop_run(l_corner_hallway(), c), ConfigError);
}

TEST(ClosedLoop, ShortLockstepRunAccounting) {
  const RunConfig c = exact_config(0.5);
  const RunLog a = closed_loop_run(l_corner_hallway(), c);
  EXPECT_EQ(a.outcome, Outcome::Timeout);
  EXPECT_NEAR(a.end_time, 0.5, 1e-9);
  ASSERT_EQ(a.replans.size(), 3u);  // t = 0, 0.2, 0.4
  for (std::size_t i = 0; i < a.replans.size(); ++i) {
    EXPECT_EQ(a.replans[i].tick, static_cast<int>(i));
    EXPECT_NEAR(a.replans[i].t_request, 0.2 * i, 1e-12);
    EXPECT_EQ(a.replans[i].t_active, a.replans[i].t_request);
  }
  EXPECT_TRUE(a.replans[0].accepted);
  EXPECT_EQ(a.samples.size(), 51u);
  for (std::size_t i = 1; i < a.samples.size(); ++i) EXPECT_NEAR(a.samples[i].t - a.samples[i - 1].t, 0.01, 1e-12);
  EXPECT_GE(a.min_clearance, c.r_hard);
  EXPECT_GT(a.peak_wing_aoa, 0.0);

  const RunLog b = closed_loop_run(l_corner_hallway(), c);
  std::ostringstream sa, sb, ra, rb;
  write_samples_csv(sa, a);
  write_samples_csv(sb, b);
  write_replans_csv(ra, a);
  write_replans_csv(rb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(ra.str(), rb.str());
}

TEST(ClosedLoop, RealtimeRunPublishesLate) {
  RunConfig c = exact_config(0.6);
  c.mode = RunMode::Realtime;
  const RunLog log = closed_loop_run(l_corner_hallway(), c);
  ASSERT_FALSE(log.replans.empty());
  for (const auto& r : log.replans) EXPECT_GE(r.t_active, r.t_request);
  std::ostringstream s;
  write_summary(s, log, c);
  EXPECT_NE(s.str().find("mode: realtime"), std::string::npos);
}

TEST(ClosedLoop, ExactModelReachesTheGoal) {
  const RunConfig c = exact_config(8.0);
  const RunLog log = closed_loop_run(l_corner_hallway(), c);
  EXPECT_EQ(log.outcome, Outcome::ReachedGoal) << log.detail;
  EXPECT_GE(log.min_clearance, c.r_hard);
}
