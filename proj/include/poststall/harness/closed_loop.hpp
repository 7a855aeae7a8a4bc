#pragma once

// Receding-horizon closed loop: every 1/replan_hz the truth state is handed to
// the seed planner and the NLP, a TVLQR policy is built about the result, and
// the truth model is flown under that policy with RK4 at 1 ms.
//
// Lockstep mode treats planning as instantaneous at the tick and is
// deterministic. Realtime mode plans on a worker thread, paces the plant to
// the wall clock and activates each plan when it is published.

#include <poststall/environment/hallway.hpp>
#include <poststall/harness/mismatch.hpp>
#include <poststall/harness/pipeline.hpp>
#include <poststall/harness/simulate.hpp>

#include <atomic>
#include <chrono>
#include <future>
#include <iomanip>
#include <mutex>
#include <random>
#include <thread>

namespace poststall {

enum class Outcome { ReachedGoal, Collided, Diverged, Timeout };
enum class RunMode { Lockstep, Realtime };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::ReachedGoal: return "reached_goal";
    case Outcome::Collided: return "collided";
    case Outcome::Diverged: return "diverged";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

inline const char* to_string(RunMode m) { return m == RunMode::Lockstep ? "lockstep" : "realtime"; }

struct RunConfig {
  double replan_hz = 5.0;
  double horizon = 1.0;  ///< T_H [s]; overrides planner.horizon
  bool feedback = true;
  std::shared_ptr<const AircraftParams> truth;
  std::shared_ptr<const AircraftParams> model;
  std::string mismatch_label = "none";
  std::uint64_t seed = 1;
  double max_sim_time = 8.0;
  double dt = kTruthStep;
  RunMode mode = RunMode::Lockstep;
  double r_hard = 0.15;         ///< body radius for true collisions [m]
  double sample_period = 0.01;  ///< log spacing [s]
  bool warm_start = true;       ///< seed each solve from the time-shifted previous plan
  // A non-converged iterate still replaces the flying plan when it is this close
  // to feasible (normalized defect, bound/collision violation).
  double elastic_defect = 0.02;
  double elastic_violation = 0.05;
  PlannerConfig planner;
  SolverConfig solver;
  TvlqrWeights weights = TvlqrWeights::defaults();
  int grid_refinement = kDefaultGridRefinement;
  InputBounds bounds = input_bounds();

  // Seeded launch dispersion: uniform in +-value.
  double start_lateral = 0.05;  ///< y and z offset [m]
  double start_yaw = deg2rad(3.0);
  double start_speed = 0.2;     ///< [m/s]

  double max_speed = 30.0;  ///< divergence thresholds
  double max_rate = 50.0;

  void check() const {
    if (!(replan_hz > 0.0)) throw ConfigError("replan_hz must be positive");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(dt > 0.0) || !(sample_period >= dt)) throw ConfigError("bad integrator or sample period");
    if (!(max_sim_time > 0.0)) throw ConfigError("max_sim_time must be positive");
    if (!truth || !model) throw ConfigError("truth and model parameters are required");
  }
};

struct RunSample {
  double t = 0.0;
  StateVector x = StateVector::Zero();
  InputVector u = InputVector::Zero();
  int plan_id = -1;
  double clearance = 0.0;
};

struct ReplanRecord {
  int id = -1;            ///< plan id when accepted, else -1
  int tick = 0;
  double t_request = 0.0;
  double t_active = 0.0;  ///< sim time the plan took over (equals t_request in lockstep)
  bool accepted = false;
  bool elastic = false;   ///< accepted although the solve did not converge
  std::string error;
  NlpReport report;
  double kappa_max = 0.0;
  double radius = 0.0;
  bool warm = false;          ///< the accepted solve started from the shifted previous plan
  double tvlqr_time = 0.0;    ///< wall clock [s]
};

struct RunLog {
  std::vector<RunSample> samples;
  std::vector<ReplanRecord> replans;
  std::vector<std::string> surface_names;
  std::vector<double> peak_aoa;  ///< |AoA| per surface [rad]
  double peak_wing_aoa = 0.0;    ///< max over surfaces named wing* [rad]
  double min_clearance = std::numeric_limits<double>::infinity();
  double min_clearance_time = 0.0;
  Outcome outcome = Outcome::Timeout;
  double end_time = 0.0;
  long saturations = 0;
  int plan_swaps = 0;
  std::string detail;
};

namespace detail {

struct ActivePlan {
  int id = -1;
  TvlqrPolicy policy;
};

/// Previous plan resampled on a grid starting at `t`; beyond its horizon the
/// last state coasts along its velocity.
inline Trajectory shifted_plan(const TvlqrPolicy& prev, double t, int N, const StateVector& x_now) {
  const Trajectory& old = prev.nominal();
  Trajectory out;
  out.h = old.h;
  out.t0 = t;
  out.x.resize(N + 1);
  out.u.resize(N + 1);
  const StateVector& last = old.x.back();
  const Vec3 v_world = euler_to_rotation(last.segment<3>(idx::theta)) * last.segment<3>(idx::v);
  for (int k = 0; k <= N; ++k) {
    const double tk = t + k * out.h;
    out.x[k] = prev.nominal_state(tk);
    out.u[k] = prev.nominal_input(tk);
    if (tk > prev.t_end()) out.x[k].head<3>() += (tk - prev.t_end()) * v_world;
  }
  out.x.front() = x_now;
  return out;
}

inline double infeasibility(const NlpReport& r) { return r.max_defect + r.max_violation; }

struct PlanAttempt {
  std::shared_ptr<const ActivePlan> plan;
  ReplanRecord record;
};

class Planner {
 public:
  Planner(const RunConfig& cfg, std::shared_ptr<const DistanceField> field, const HallwaySpec& map)
      : cfg_(cfg), field_(std::move(field)), goal_(map.goal), trims_(*cfg.model) {
    planner_ = cfg.planner;
    planner_.horizon = cfg.horizon;
  }

  PlanAttempt plan(int tick, double t, const StateVector& x, const ActivePlan* prev, int next_id) const {
    PlanAttempt out;
    ReplanRecord& rec = out.record;
    rec.tick = tick;
    rec.t_request = t;
    rec.t_active = t;
    try {
      SeedPlan sp = plan_seed(*field_, x, goal_, planner_, cfg_.seed * 1000003u + tick);
      rec.kappa_max = sp.kappa_max;
      rec.radius = sp.radius;
      const NlpProblem prob = make_problem(field_, cfg_.model, trims_, x, sp, planner_);
      NlpResult res;
      bool solved = false;
      if (cfg_.warm_start && prev && prev->policy.nominal().intervals() == planner_.knots) {
        res = solve(prob, shifted_plan(prev->policy, t, planner_.knots, x), cfg_.solver);
        solved = res.report.status == NlpStatus::Feasible;
        rec.warm = solved;
      }
      if (!solved) {
        NlpResult cold = solve(prob, sp.seed, cfg_.solver);
        cold.report.solve_time += res.report.solve_time;
        cold.report.dynamics_time += res.report.dynamics_time;
        cold.report.dynamics_evals += res.report.dynamics_evals;
        const bool keep_warm = !res.traj.x.empty() && cold.report.status != NlpStatus::Feasible &&
                               infeasibility(res.report) < infeasibility(cold.report);
        if (keep_warm) {
          cold.traj = res.traj;
          cold.report.status = res.report.status;
          cold.report.max_defect = res.report.max_defect;
          cold.report.max_violation = res.report.max_violation;
        }
        rec.warm = keep_warm;
        res = std::move(cold);
      }
      rec.report = res.report;
      if (res.report.status != NlpStatus::Feasible) {
        const bool close = res.report.max_defect <= cfg_.elastic_defect &&
                           res.report.max_violation <= cfg_.elastic_violation;
        // With no plan to fall back on, the best iterate beats flying blind.
        if (!close && prev) {
          rec.error = std::string("optimizer: ") + to_string(res.report.status);
          return out;
        }
        rec.elastic = true;
        rec.error = std::string("elastic: ") + to_string(res.report.status);
      }
      res.traj.t0 = t;
      const auto t0 = std::chrono::steady_clock::now();
      auto plan = std::make_shared<ActivePlan>();
      plan->policy = TvlqrPolicy(res.traj, *cfg_.model, cfg_.weights, cfg_.grid_refinement);
      rec.tvlqr_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      plan->id = next_id;
      rec.id = next_id;
      rec.accepted = true;
      out.plan = std::move(plan);
    } catch (const Error& e) {
      rec.error = e.what();
    }
    return out;
  }

 private:
  const RunConfig& cfg_;
  std::shared_ptr<const DistanceField> field_;
  Vec3 goal_;
  LevelTrimTable trims_;
  PlannerConfig planner_;
};

/// Launch state: level trim of the truth model at the (dispersed) start speed.
inline StateVector launch_state(const RunConfig& cfg, const HallwaySpec& map) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double dy = cfg.start_lateral * unit(rng);
  const double dz = cfg.start_lateral * unit(rng);
  const double dyaw = cfg.start_yaw * unit(rng);
  const double dv = cfg.start_speed * unit(rng);
  const LevelTrimTable trims(*cfg.truth);
  AircraftState s = trims.at(map.start.speed + dv).state(map.start.yaw + dyaw);
  s.r = map.start.position + Vec3(0.0, dy, dz);
  return s.flatten();
}

/// Mutex-guarded slot holding the immutable plan the plant is flying.
class PlanSlot {
 public:
  std::shared_ptr<const ActivePlan> load() const {
    std::lock_guard lock(m_);
    return plan_;
  }
  void store(std::shared_ptr<const ActivePlan> p) {
    std::lock_guard lock(m_);
    plan_ = std::move(p);
  }

 private:
  mutable std::mutex m_;
  std::shared_ptr<const ActivePlan> plan_;
};

}  // namespace detail

/// Flies the hallway map once. Planner and optimizer failures are logged and
/// the previous plan keeps flying.
inline RunLog closed_loop_run(const HallwaySpec& map, const RunConfig& cfg,
                              std::shared_ptr<const DistanceField> field = nullptr) {
  cfg.check();
  validate(map);
  if (!field) field = std::make_shared<const DistanceField>(build_field(map));
  const AircraftParams& truth = *cfg.truth;

  RunLog log;
  for (const auto& s : truth.surfaces) log.surface_names.push_back(s.name);
  log.peak_aoa.assign(truth.surfaces.size(), 0.0);

  StateVector x = detail::launch_state(cfg, map);
  if (!in_free_space(map, x.head<3>())) throw ConfigError("start pose is not in free space");

  const detail::Planner planner(cfg, field, map);
  const long steps_per_replan = std::max(1L, std::lround(1.0 / (cfg.replan_hz * cfg.dt)));
  const long steps_per_sample = std::max(1L, std::lround(cfg.sample_period / cfg.dt));
  const long max_steps = std::lround(cfg.max_sim_time / cfg.dt);
  const bool realtime = cfg.mode == RunMode::Realtime;

  detail::PlanSlot slot;
  std::shared_ptr<const detail::ActivePlan> active;
  int next_id = 0;
  int tick = 0;

  // Realtime worker state.
  std::future<detail::PlanAttempt> pending;
  std::mutex log_mutex;
  const auto wall0 = std::chrono::steady_clock::now();

  auto accept = [&](detail::PlanAttempt&& a, double t_now) {
    a.record.t_active = t_now;
    if (a.plan) {
      slot.store(a.plan);
      ++next_id;
    }
    std::lock_guard lock(log_mutex);
    log.replans.push_back(std::move(a.record));
  };

  auto finish = [&](Outcome o, double t, std::string why) {
    log.outcome = o;
    log.end_time = t;
    log.detail = std::move(why);
  };

  const InputVector hold_input = [&] {
    InputVector u = InputVector::Zero();
    u(idx::u_throttle) = std::clamp(-truth.thrust_a * x(idx::delta_t) / truth.thrust_b, 0.0, 1.0);
    return u;
  }();

  bool done = false;
  for (long step = 0; !done; ++step) {
    const double t = step * cfg.dt;

    if (step % steps_per_replan == 0) {
      if (!realtime) {
        accept(planner.plan(tick, t, x, active.get(), next_id), t);
      } else if (!pending.valid()) {
        pending = std::async(std::launch::async, [&planner, tick, t, x, prev = active, id = next_id] {
          return planner.plan(tick, t, x, prev.get(), id);
        });
      }
      ++tick;
    }
    if (realtime) {
      if (pending.valid() && pending.wait_for(std::chrono::seconds(0)) == std::future_status::ready)
        accept(pending.get(), t);
      // Keep simulated time from running ahead of the wall clock.
      const auto due = wall0 + std::chrono::duration<double>(t);
      if (step % 5 == 0 && std::chrono::steady_clock::now() < due) std::this_thread::sleep_until(due);
    }

    auto current = slot.load();
    if (current != active) {
      if (active) ++log.plan_swaps;
      active = current;
    }

    InputVector u = hold_input;
    if (active) {
      u = cfg.feedback ? active->policy.feedback_control(t, x, cfg.bounds.lo, cfg.bounds.hi, &log.saturations)
                       : active->policy.open_loop_control(t, cfg.bounds.lo, cfg.bounds.hi, &log.saturations);
    }

    const double clearance = field->min_distance(x.head<3>());
    if (clearance < log.min_clearance) {
      log.min_clearance = clearance;
      log.min_clearance_time = t;
    }
    try {
      const auto angles = surface_angles(AircraftState::unflatten(x), truth, u.head<4>());
      for (std::size_t i = 0; i < angles.size(); ++i) {
        if (std::isnan(angles[i])) continue;
        log.peak_aoa[i] = std::max(log.peak_aoa[i], std::abs(angles[i]));
        if (log.surface_names[i].rfind("wing", 0) == 0) log.peak_wing_aoa = std::max(log.peak_wing_aoa, std::abs(angles[i]));
      }
    } catch (const Error&) {
    }

    const bool at_goal = (x.head<3>() - map.goal).norm() < map.goal_radius;
    const bool collided = clearance < cfg.r_hard;
    const bool timeout = step >= max_steps;
    if (step % steps_per_sample == 0 || collided || at_goal || timeout)
      log.samples.push_back({t, x, u, active ? active->id : -1, clearance});

    if (collided) {
      finish(Outcome::Collided, t, "clearance " + std::to_string(clearance) + " m below the body radius");
      break;
    }
    if (at_goal) {
      finish(Outcome::ReachedGoal, t, "inside the goal ball");
      break;
    }
    if (timeout) {
      finish(Outcome::Timeout, t, "simulation time exhausted");
      break;
    }

    try {
      x = plant_step(truth, x, u, cfg.dt, cfg.bounds.travel);
    } catch (const Error& e) {
      finish(Outcome::Diverged, t + cfg.dt, e.what());
      break;
    }
    if (!x.allFinite() || x.segment<3>(idx::v).norm() > cfg.max_speed ||
        x.segment<3>(idx::omega).norm() > cfg.max_rate) {
      finish(Outcome::Diverged, t + cfg.dt, "state left the divergence bounds");
      if (x.allFinite()) log.samples.push_back({t + cfg.dt, x, u, active ? active->id : -1, field->min_distance(x.head<3>())});
      break;
    }
  }
  if (pending.valid()) accept(pending.get(), log.end_time);
  return log;
}

/// Samples as CSV: t, 17 states, 5 inputs, plan id, clearance.
inline void write_samples_csv(std::ostream& os, const RunLog& log) {
  os << "t";
  for (const char* n : kStateNames) os << ',' << n;
  for (const char* n : kInputNames) os << ',' << n;
  os << ",plan_id,clearance\n";
  os << std::setprecision(10);
  for (const auto& s : log.samples) {
    os << s.t;
    for (int i = 0; i < kStateDim; ++i) os << ',' << s.x(i);
    for (int i = 0; i < kInputDim; ++i) os << ',' << s.u(i);
    os << ',' << s.plan_id << ',' << s.clearance << '\n';
  }
}

/// Per-replan solver outcomes; wall-clock figures are kept out so the file is
/// reproducible in lockstep mode.
inline void write_replans_csv(std::ostream& os, const RunLog& log) {
  os << "tick,plan_id,t_request,t_active,accepted,status,iterations,outer_iterations,max_defect,max_violation,"
        "kappa_max,radius,warm,elastic,error\n";
  os << std::setprecision(10);
  for (const auto& r : log.replans) {
    os << r.tick << ',' << r.id << ',' << r.t_request << ',' << r.t_active << ',' << r.accepted << ','
       << to_string(r.report.status) << ',' << r.report.iterations << ',' << r.report.outer_iterations << ','
       << r.report.max_defect << ',' << r.report.max_violation << ',' << r.kappa_max << ',' << r.radius << ','
       << r.warm << ',' << r.elastic << ',' << '"' << r.error << '"' << '\n';
  }
}

inline void write_timings_csv(std::ostream& os, const RunLog& log) {
  os << "tick,solve_time,dynamics_time,dynamics_evals,tvlqr_time\n";
  for (const auto& r : log.replans)
    os << r.tick << ',' << r.report.solve_time << ',' << r.report.dynamics_time << ',' << r.report.dynamics_evals << ','
       << r.tvlqr_time << '\n';
}

inline void write_summary(std::ostream& os, const RunLog& log, const RunConfig& cfg) {
  os << std::setprecision(6);
  os << "outcome: " << to_string(log.outcome) << '\n'
     << "detail: " << log.detail << '\n'
     << "end_time: " << log.end_time << '\n'
     << "mode: " << to_string(cfg.mode) << '\n'
     << "feedback: " << (cfg.feedback ? "on" : "off") << '\n'
     << "mismatch: " << cfg.mismatch_label << '\n'
     << "seed: " << cfg.seed << '\n'
     << "min_clearance: " << log.min_clearance << '\n'
     << "min_clearance_time: " << log.min_clearance_time << '\n'
     << "planning_radius: " << cfg.planner.radius << '\n'
     << "hard_radius: " << cfg.r_hard << '\n'
     << "peak_wing_aoa_deg: " << rad2deg(log.peak_wing_aoa) << '\n'
     << "replans: " << log.replans.size() << '\n'
     << "plan_swaps: " << log.plan_swaps << '\n'
     << "saturations: " << log.saturations << '\n'
     << "peak_aoa_deg:\n";
  for (std::size_t i = 0; i < log.surface_names.size(); ++i)
    os << "  " << log.surface_names[i] << ": " << rad2deg(log.peak_aoa[i]) << '\n';
}

}  // namespace poststall
