// Command-line driver: plan, optimize, simulate, benchmark, trim.
//
// Exit codes: 0 success, 1 domain failure (infeasible solve, planner
// timeout, failed run under --expect success), 2 usage or configuration error.

#include <poststall/harness/benchmark.hpp>
#include <poststall/harness/closed_loop.hpp>
#include <poststall/harness/mismatch.hpp>
#include <poststall/harness/trim_turn.hpp>
#include <poststall/io/map_io.hpp>
#include <poststall/io/params_io.hpp>
#include <poststall/io/solver_io.hpp>
#include <poststall/io/tables.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#ifndef POSTSTALL_DATA_DIR
#define POSTSTALL_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace poststall;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct DomainFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string params = std::string(POSTSTALL_DATA_DIR) + "/edge540-24in.params";
  std::string map = std::string(POSTSTALL_DATA_DIR) + "/maps/l_corner.map";
  std::string solver_config;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
};

/// Everything a subcommand needs, parsed before any computation starts.
struct Loaded {
  AircraftParams params;
  HallwaySpec map;
  io::SolverSettings settings;
};

Loaded load(const Globals& g) {
  Loaded l;
  l.params = io::load_vehicle(g.params);
  l.map = io::load_map(g.map);
  if (!g.solver_config.empty()) l.settings = io::load_solver(g.solver_config);
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec || !fs::is_directory(g.out_dir)) throw ConfigError("cannot create output directory '" + g.out_dir + "'");
  return l;
}

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write '" + tmp.string() + "'");
    body(os);
    os.flush();
    if (!os) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw ConfigError("bad integer '" + tok + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

/// "lo:hi:step" in degrees, inclusive of hi when it lands on the grid.
std::vector<double> parse_caps(const std::string& text) {
  double lo = 0, hi = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(text);
  if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) || hi < lo)
    throw ConfigError("--caps expects lo:hi:step in degrees, got '" + text + "'");
  std::vector<double> caps;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= n; ++i) caps.push_back(deg2rad(lo + i * step));
  return caps;
}

/// Level trim at the map's launch pose.
StateVector launch_trim(const Loaded& l, const LevelTrimTable& trims) {
  AircraftState s = trims.at(l.map.start.speed).state(l.map.start.yaw);
  s.r = l.map.start.position;
  return s.flatten();
}

int run_plan(const Globals& g, int knots) {
  Loaded l = load(g);
  PlannerConfig pc = l.settings.planner;
  if (knots > 0) pc.knots = knots;
  auto field = std::make_shared<const DistanceField>(build_field(l.map));
  auto params = std::make_shared<const AircraftParams>(l.params);
  LevelTrimTable trims(l.params);
  const StateVector x0 = launch_trim(l, trims);
  SeedPlan plan = plan_seed(*field, x0, l.map.goal, pc, g.seed);
  make_problem(field, params, trims, x0, plan, pc);
  const fs::path out(g.out_dir);
  write_atomic(out / "rrt_raw.csv", [&](std::ostream& os) { io::write_points_csv(os, plan.raw); });
  write_atomic(out / "rrt_pruned.csv", [&](std::ostream& os) { io::write_points_csv(os, plan.pruned); });
  write_atomic(out / "path.csv", [&](std::ostream& os) { io::write_timed_path_csv(os, plan.timed); });
  write_atomic(out / "seed.csv", [&](std::ostream& os) { io::write_trajectory_csv(os, plan.seed); });
  write_atomic(out / "plan.txt", [&](std::ostream& os) {
    os << std::setprecision(10) << "waypoints_raw: " << plan.raw.size() << "\nwaypoints_pruned: " << plan.pruned.size()
       << "\nlength: " << plan.smooth.length() << "\ntotal_time: " << plan.timed.total_time()
       << "\nkappa_max: " << plan.kappa_max << "\nradius: " << plan.radius << "\nendpoint: " << plan.endpoint.position.x()
       << ' ' << plan.endpoint.position.y() << ' ' << plan.endpoint.position.z() << '\n';
  });
  write_atomic(out / "field_slice.csv",
               [&](std::ostream& os) { io::write_field_slice_csv(os, *field, l.map.start.position.z()); });
  std::cout << "plan: " << plan.pruned.size() << " waypoints, " << plan.smooth.length() << " m, kappa_max "
            << plan.kappa_max << '\n';
  return kExitOk;
}

int run_optimize(const Globals& g, int knots, const std::string& method, const std::string& warm_file) {
  Loaded l = load(g);
  PlannerConfig pc = l.settings.planner;
  if (knots > 0) pc.knots = knots;
  if (!method.empty()) pc.method = parse_transcription(method);
  const StateVector warm_state = warm_file.empty() ? StateVector::Zero() : io::load_state(warm_file);

  CornerFixture fx = corner_fixture(l.params, l.map);
  SeedPlan plan = plan_seed(*fx.field, fx.start, l.map.goal, pc, g.seed);
  NlpProblem prob = make_problem(fx.field, fx.params, *fx.trims, fx.start, plan, pc);
  NlpResult res = solve(prob, plan.seed, l.settings.solver);
  const NlpResult cold = res;
  if (!warm_file.empty()) {
    NlpProblem moved = prob;
    moved.x_min = moved.x_min.cwiseMin(warm_state);
    moved.x_max = moved.x_max.cwiseMax(warm_state);
    res = resolve_warm(moved, cold.warm, warm_state, l.settings.solver);
  }
  const fs::path out(g.out_dir);
  write_atomic(out / "trajectory.csv", [&](std::ostream& os) { io::write_trajectory_csv(os, res.traj); });
  write_atomic(out / "report.txt", [&](std::ostream& os) {
    os << "method: " << to_string(pc.method) << "\nknots: " << pc.knots << '\n';
    io::write_report(os, res.report);
    if (!warm_file.empty()) io::write_report(os, cold.report, "base_");
  });
  std::cout << "optimize: " << to_string(res.report.status) << " in " << res.report.solve_time << " s\n";
  if (res.report.status != NlpStatus::Feasible) throw DomainFailure(std::string("solve ended ") + to_string(res.report.status));
  return kExitOk;
}

struct SimulateOptions {
  std::string feedback = "on";
  std::string mismatch = "paper";
  std::string mode = "lockstep";
  std::string expect;
  double max_time = 8.0;
  bool timings = false;
};

int run_simulate(const Globals& g, const SimulateOptions& o) {
  Loaded l = load(g);
  RunConfig cfg;
  cfg.planner = l.settings.planner;
  cfg.solver = l.settings.solver;
  cfg.horizon = cfg.planner.horizon;
  cfg.seed = g.seed;
  cfg.max_sim_time = o.max_time;
  cfg.feedback = o.feedback == "on";
  cfg.mode = o.mode == "realtime" ? RunMode::Realtime : RunMode::Lockstep;
  const auto file = std::make_shared<const AircraftParams>(l.params);
  cfg.truth = file;
  cfg.model = file;
  if (o.mismatch == "none") {
    cfg.mismatch_label = "none";
  } else if (o.mismatch == "paper") {
    cfg.model = std::make_shared<const AircraftParams>(uncorrected_model(l.params));
    cfg.mismatch_label = "reverse-identification";
  } else if (o.mismatch == "random") {
    cfg.truth = std::make_shared<const AircraftParams>(perturbed_model(l.params, g.seed));
    cfg.mismatch_label = "random";
  } else {
    // A second vehicle file: it becomes the controller's model.
    cfg.model = std::make_shared<const AircraftParams>(io::load_vehicle(o.mismatch));
    cfg.mismatch_label = "file:" + fs::path(o.mismatch).filename().string();
  }
  cfg.check();

  RunLog log = closed_loop_run(l.map, cfg);
  const fs::path out(g.out_dir);
  write_atomic(out / "samples.csv", [&](std::ostream& os) { write_samples_csv(os, log); });
  write_atomic(out / "replans.csv", [&](std::ostream& os) { write_replans_csv(os, log); });
  write_atomic(out / "summary.txt", [&](std::ostream& os) { write_summary(os, log, cfg); });
  if (o.timings) write_atomic(out / "timings.csv", [&](std::ostream& os) { write_timings_csv(os, log); });
  std::cout << "simulate: " << to_string(log.outcome) << " at t=" << log.end_time << " s, min clearance "
            << log.min_clearance << " m, peak wing AoA " << rad2deg(log.peak_wing_aoa) << " deg\n";
  if (o.expect == "success" && log.outcome != Outcome::ReachedGoal)
    throw DomainFailure(std::string("run ended ") + to_string(log.outcome) + ": " + log.detail);
  return kExitOk;
}

int run_benchmark(const Globals& g, const std::string& method, const std::string& knots, int trials, bool warm,
                  double perturb) {
  Loaded l = load(g);
  BenchmarkConfig cfg;
  cfg.method = parse_transcription(method);
  cfg.knots = parse_int_list(knots);
  cfg.trials = trials;
  cfg.warm = warm;
  cfg.perturb = perturb;
  cfg.seed = g.seed;
  cfg.planner = l.settings.planner;
  cfg.solver = l.settings.solver;
  if (trials < 1) throw ConfigError("--trials must be >= 1");
  for (int n : cfg.knots)
    if (n < 2) throw ConfigError("knot counts must be >= 2");
  CornerFixture fx = corner_fixture(l.params, l.map);
  std::vector<TrialRecord> recs;
  const auto rows = benchmark_knots(fx, cfg, &recs);
  const std::string stem = std::string("benchmark_") + to_string(cfg.method) + (warm ? "_warm" : "");
  const fs::path out(g.out_dir);
  write_atomic(out / (stem + ".csv"), [&](std::ostream& os) { write_benchmark_csv(os, rows); });
  write_atomic(out / (stem + "_trials.csv"), [&](std::ostream& os) { write_trials_csv(os, cfg.method, recs); });
  write_benchmark_csv(std::cout, rows);
  return kExitOk;
}

int run_trim(const Globals& g, const std::string& caps, double v_min, double v_max) {
  Loaded l = load(g);
  TurnTrimConfig cfg;
  cfg.v_min = v_min;
  cfg.v_max = v_max;
  const auto rows = trim_turn_radius(parse_caps(caps), l.params, cfg);
  write_atomic(fs::path(g.out_dir) / "trim.csv", [&](std::ostream& os) { io::write_trim_csv(os, rows); });
  io::write_trim_csv(std::cout, rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-stall fixed-wing planning and control simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--params", g.params, "vehicle parameter file")->capture_default_str();
  app.add_option("--map", g.map, "hallway map file")->capture_default_str();
  app.add_option("--solver-config", g.solver_config, "solver/planner settings file");
  app.add_option("--out-dir", g.out_dir, "directory for output files")->capture_default_str();
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();

  int plan_knots = 0;
  auto* plan = app.add_subcommand("plan", "seed path: RRT, pruning, smoothing, time map");
  plan->add_option("--knots", plan_knots, "knot intervals of the seed trajectory");

  int opt_knots = 0;
  std::string opt_method, opt_warm;
  auto* optimize = app.add_subcommand("optimize", "feasibility solve on the corner problem");
  optimize->add_option("--knots", opt_knots, "knot intervals N");
  optimize->add_option("--method", opt_method, "hs | euler")->check(CLI::IsMember({"hs", "euler"}));
  optimize->add_option("--warm", opt_warm, "state file: warm re-solve from this initial state")->check(CLI::ExistingFile);

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "closed-loop receding-horizon run");
  simulate->add_option("--feedback", so.feedback, "on | off")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  simulate->add_option("--mismatch", so.mismatch, "none | paper (model keeps the pre-identification areas) | random | <vehicle file used as the model>")
      ->capture_default_str();
  simulate->add_option("--mode", so.mode, "lockstep | realtime")->check(CLI::IsMember({"lockstep", "realtime"}))->capture_default_str();
  simulate->add_option("--max-time", so.max_time, "simulated seconds before timeout")->capture_default_str();
  simulate->add_option("--expect", so.expect, "success: exit 1 unless the goal is reached")->check(CLI::IsMember({"success"}));
  simulate->add_flag("--timings", so.timings, "also write wall-clock timings.csv");

  std::string b_method = "hs", b_knots = "6,8,10,14,20";
  int b_trials = 5;
  bool b_warm = false;
  double b_perturb = 0.0;
  auto* benchmark = app.add_subcommand("benchmark", "knot-count / transcription benchmark");
  benchmark->add_option("--method", b_method, "hs | euler")->check(CLI::IsMember({"hs", "euler"}))->capture_default_str();
  benchmark->add_option("--knots", b_knots, "comma-separated knot counts")->capture_default_str();
  benchmark->add_option("--trials", b_trials, "trials per knot count")->capture_default_str();
  benchmark->add_flag("--warm", b_warm, "time warm re-solves after a start perturbation");
  benchmark->add_option("--perturb", b_perturb, "start perturbation bound [m] (warm default 0.1)");

  std::string t_caps = "10:70:5";
  double t_vmin = 1.0, t_vmax = 10.0;
  auto* trim = app.add_subcommand("trim", "minimum steady-turn radius per wing AoA cap");
  trim->add_option("--caps", t_caps, "lo:hi:step in degrees")->capture_default_str();
  trim->add_option("--v-min", t_vmin, "speed lower bound [m/s]")->capture_default_str();
  trim->add_option("--v-max", t_vmax, "speed upper bound [m/s]")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kExitUsage;
  }

  try {
    if (*plan) return run_plan(g, plan_knots);
    if (*optimize) return run_optimize(g, opt_knots, opt_method, opt_warm);
    if (*simulate) return run_simulate(g, so);
    if (*benchmark) return run_benchmark(g, b_method, b_knots, b_trials, b_warm, b_perturb);
    if (*trim) return run_trim(g, t_caps, t_vmin, t_vmax);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainFailure& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kExitDomain;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
