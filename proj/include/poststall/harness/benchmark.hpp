#pragma once

// Knot-count / transcription benchmark on the corner problem.
//
// Trial t plans a seed path with RRT seed `seed + t` from the fixture state
// (2.9 m ahead of the launch point, level trim at 4 m/s). With
// `perturb > 0` the measured start is moved by a seeded offset of norm at most
// `perturb`; a warm row first solves the unperturbed problem cold and then
// re-solves the perturbed one from that solution, timing only the re-solve.

#include <poststall/environment/hallway.hpp>
#include <poststall/harness/pipeline.hpp>
#include <poststall/harness/simulate.hpp>

#include <algorithm>
#include <iomanip>
#include <memory>
#include <ostream>
#include <random>
#include <vector>

namespace poststall {

struct CornerFixture {
  HallwaySpec map;
  std::shared_ptr<const DistanceField> field;
  std::shared_ptr<const AircraftParams> params;
  std::shared_ptr<const LevelTrimTable> trims;
  StateVector start;
};

inline constexpr double kFixtureAdvance = 2.9;  ///< ahead of the launch point [m]
inline constexpr double kFixtureSpeed = 4.0;

inline CornerFixture corner_fixture(const AircraftParams& params, HallwaySpec map = l_corner_hallway(),
                                    std::shared_ptr<const DistanceField> field = nullptr) {
  CornerFixture f;
  f.map = std::move(map);
  f.field = field ? std::move(field) : std::make_shared<const DistanceField>(build_field(f.map));
  f.params = std::make_shared<const AircraftParams>(params);
  f.trims = std::make_shared<const LevelTrimTable>(params);
  AircraftState s = f.trims->at(kFixtureSpeed).state();
  const Vec3 heading(std::cos(f.map.start.yaw), std::sin(f.map.start.yaw), 0.0);
  s.r = f.map.start.position + kFixtureAdvance * heading;
  s.theta.z() = f.map.start.yaw;
  f.start = s.flatten();
  return f;
}

struct BenchmarkConfig {
  Transcription method = Transcription::HermiteSimpson;
  std::vector<int> knots = {6, 8, 10, 14, 20};
  int trials = 5;
  bool warm = false;
  double perturb = 0.0;  ///< start offset bound [m]; warm rows use 0.1 when left at 0
  std::uint64_t seed = 100;
  PlannerConfig planner;
  SolverConfig solver;
  TvlqrWeights weights = TvlqrWeights::defaults();
};

struct TrialRecord {
  int N = 0;
  int trial = 0;
  NlpStatus status = NlpStatus::IterationLimit;
  double solve_time = 0.0;
  double dynamics_time = 0.0;
  double cold_time = 0.0;  ///< cold solve of the same perturbed problem (warm rows only)
  int outer_iterations = 0;
  double max_defect = 0.0;
  double max_violation = 0.0;
  double following_cost = 0.0;
  bool planned = true;
};

struct BenchmarkRow {
  Transcription method = Transcription::HermiteSimpson;
  int N = 0;
  int trials = 0;
  bool warm = false;
  double median_solve_time = 0.0;
  double median_dynamics_time = 0.0;
  double median_cold_time = 0.0;
  double feasibility_rate = 0.0;
  double median_following_cost = 0.0;
  double median_outer_iterations = 0.0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Start offset for a trial: uniform direction, norm uniform in [0, bound].
inline Vec3 start_offset(std::uint64_t trial_seed, double bound) {
  std::mt19937_64 rng(trial_seed);
  std::normal_distribution<double> n;
  Vec3 d(n(rng), n(rng), n(rng));
  return d.normalized() * std::uniform_real_distribution<double>(0.0, bound)(rng);
}

/// Terminal following error of the model flying its own solution; +inf when
/// the policy cannot be built or the flight locks up.
inline double solution_following_cost(const Trajectory& t, const AircraftParams& p, const TvlqrWeights& w) {
  try {
    return following_cost(TvlqrPolicy(t, p, w), p);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

inline TrialRecord run_trial(const CornerFixture& fx, const BenchmarkConfig& cfg, int N, int trial) {
  TrialRecord rec;
  rec.N = N;
  rec.trial = trial;
  PlannerConfig pc = cfg.planner;
  pc.knots = N;
  pc.method = cfg.method;
  const double bound = cfg.warm && cfg.perturb <= 0.0 ? 0.1 : cfg.perturb;

  SeedPlan plan;
  NlpProblem prob;
  try {
    plan = plan_seed(*fx.field, fx.start, fx.map.goal, pc, cfg.seed + trial);
    prob = make_problem(fx.field, fx.params, *fx.trims, fx.start, plan, pc);
  } catch (const Error&) {
    rec.planned = false;
    rec.following_cost = std::numeric_limits<double>::infinity();
    return rec;
  }
  StateVector x_i = fx.start;
  if (bound > 0.0) x_i.head<3>() += start_offset(cfg.seed + 7777u * (trial + 1), bound);
  NlpProblem perturbed = prob;
  perturbed.x_i = x_i;
  perturbed.x_min = perturbed.x_min.cwiseMin(x_i);
  perturbed.x_max = perturbed.x_max.cwiseMax(x_i);
  Trajectory init = plan.seed;
  init.x.front() = x_i;

  NlpResult res;
  if (cfg.warm) {
    const NlpResult base = solve(prob, plan.seed, cfg.solver);
    rec.cold_time = solve(perturbed, init, cfg.solver).report.solve_time;
    res = resolve_warm(perturbed, base.warm, x_i, cfg.solver);
  } else {
    res = solve(perturbed, init, cfg.solver);
  }
  rec.status = res.report.status;
  rec.solve_time = res.report.solve_time;
  rec.dynamics_time = res.report.dynamics_time;
  rec.outer_iterations = res.report.outer_iterations;
  rec.max_defect = res.report.max_defect;
  rec.max_violation = res.report.max_violation;
  rec.following_cost = solution_following_cost(res.traj, *fx.params, cfg.weights);
  return rec;
}

inline BenchmarkRow summarize(const std::vector<TrialRecord>& recs, const BenchmarkConfig& cfg, int N) {
  BenchmarkRow row;
  row.method = cfg.method;
  row.N = N;
  row.trials = static_cast<int>(recs.size());
  row.warm = cfg.warm;
  std::vector<double> t, dyn, cold, cost, outer;
  int feasible = 0;
  for (const auto& r : recs) {
    t.push_back(r.solve_time);
    dyn.push_back(r.dynamics_time);
    cold.push_back(r.cold_time);
    cost.push_back(r.following_cost);
    outer.push_back(r.outer_iterations);
    feasible += r.planned && r.status == NlpStatus::Feasible;
  }
  row.median_solve_time = median(t);
  row.median_dynamics_time = median(dyn);
  row.median_cold_time = cfg.warm ? median(cold) : row.median_solve_time;
  row.feasibility_rate = recs.empty() ? 0.0 : static_cast<double>(feasible) / recs.size();
  row.median_following_cost = median(cost);
  row.median_outer_iterations = median(outer);
  return row;
}

/// One row per N; failures stay in the table as infeasible trials.
inline std::vector<BenchmarkRow> benchmark_knots(const CornerFixture& fx, const BenchmarkConfig& cfg,
                                                 std::vector<TrialRecord>* trials_out = nullptr) {
  if (cfg.knots.empty()) throw DomainError("benchmark needs at least one knot count");
  if (cfg.trials < 1) throw DomainError("benchmark needs at least one trial");
  std::vector<BenchmarkRow> rows;
  for (int N : cfg.knots) {
    if (N < 2) throw DomainError("knot count must be at least 2");
    std::vector<TrialRecord> recs;
    for (int t = 0; t < cfg.trials; ++t) recs.push_back(run_trial(fx, cfg, N, t));
    rows.push_back(summarize(recs, cfg, N));
    if (trials_out) trials_out->insert(trials_out->end(), recs.begin(), recs.end());
  }
  return rows;
}

inline void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  os << "method,N,trials,warm,median_solve_time,median_dynamics_time,median_cold_time,feasibility_rate,"
        "median_following_cost,median_outer_iterations\n"
     << std::setprecision(10);
  for (const auto& r : rows)
    os << to_string(r.method) << ',' << r.N << ',' << r.trials << ',' << (r.warm ? 1 : 0) << ',' << r.median_solve_time
       << ',' << r.median_dynamics_time << ',' << r.median_cold_time << ',' << r.feasibility_rate << ','
       << r.median_following_cost << ',' << r.median_outer_iterations << '\n';
}

inline void write_trials_csv(std::ostream& os, Transcription method, const std::vector<TrialRecord>& recs) {
  os << "method,N,trial,planned,status,solve_time,dynamics_time,cold_time,outer_iterations,max_defect,max_violation,"
        "following_cost\n"
     << std::setprecision(10);
  for (const auto& r : recs)
    os << to_string(method) << ',' << r.N << ',' << r.trial << ',' << (r.planned ? 1 : 0) << ',' << to_string(r.status)
       << ',' << r.solve_time << ',' << r.dynamics_time << ',' << r.cold_time << ',' << r.outer_iterations << ','
       << r.max_defect << ',' << r.max_violation << ',' << r.following_cost << '\n';
}

}  // namespace poststall
