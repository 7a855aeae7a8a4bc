#pragma once

// Seed planning and problem construction from a measured state:
// RRT -> prune -> G2CBS -> time map -> horizon endpoint -> NLP + seed.

#include <poststall/planning/rrt.hpp>
#include <poststall/trajopt/seed.hpp>
#include <poststall/trajopt/solver.hpp>

namespace poststall {

struct PlannerConfig {
  RrtConfig rrt;
  double radius = 0.55;        ///< planning (NLP) collision radius [m]
  double kappa_max = kDefaultKappaMax;
  double kappa_relax = 1.5;    ///< factor applied when a corner does not fit
  double kappa_limit = 3.0;    ///< give up relaxing beyond this curvature
  int rrt_attempts = 4;        ///< fresh RRT seeds tried before failing
  SpeedProfile speed;
  double horizon = 1.0;        ///< T_H [s]
  int knots = 10;              ///< N
  Transcription method = Transcription::HermiteSimpson;
  VehicleLimits limits;
  double h_min = 0.02;
  double h_max = 0.3;
  StateVector delta_f = default_terminal_box();
  double delta_i = kDefaultInitialBox;
  bool linked_ailerons = true;
  bool linear_seed = false;    ///< straight interpolation to x_f instead of the path samples
};

struct SeedPlan {
  WaypointPath raw;
  WaypointPath pruned;
  SmoothPath smooth;
  TimeParamPath timed;
  Endpoint endpoint;
  double kappa_max = 0.0;
  double radius = 0.0;
  StateVector x_f;
  Trajectory seed;
};

/// Runs the seed planner from `start` (position part used) towards `goal`.
/// The planning radius shrinks to 0.9 of the start (or goal) clearance when
/// that is below `cfg.radius`.
inline SeedPlan plan_seed(const DistanceField& field, const StateVector& start, const Vec3& goal, const PlannerConfig& cfg, std::uint64_t seed) {
  SeedPlan out;
  const Vec3 p0 = start.head<3>();
  out.radius = std::min({cfg.radius, 0.9 * field.min_distance(p0), 0.9 * field.min_distance(goal)});
  if (!(out.radius > 0.0)) throw DomainError("start or goal is inside an obstacle");

  std::optional<Error> last;
  for (int attempt = 0; attempt < cfg.rrt_attempts; ++attempt) {
    try {
      out.raw = rrt_plan(field, p0, goal, out.radius, seed + 7919u * attempt, cfg.rrt);
    } catch (const PlanTimeout& e) {
      last = e;
      continue;
    }
    out.pruned = prune_path(out.raw, field, out.radius);
    if (out.pruned.size() < 2) throw DomainError("already at the goal");
    for (double kappa = cfg.kappa_max; kappa <= cfg.kappa_limit * (1.0 + 1e-12); kappa *= cfg.kappa_relax) {
      try {
        out.smooth = g2cbs_smooth(out.pruned, kappa);
        out.kappa_max = kappa;
        out.timed = reparametrize_time(out.smooth, cfg.speed);
        out.endpoint = select_endpoint(out.timed, cfg.horizon);
        return out;
      } catch (const CornerTooTight& e) {
        last = e;
      } catch (const VelocityUnderflow& e) {
        last = e;
        break;
      }
    }
  }
  if (last) throw CornerTooTight(std::string("seed planning failed: ") + last->what());
  throw PlanTimeout("seed planning failed");
}

/// Builds the feasibility problem anchored at the measured state and the
/// endpoint of the seed plan, plus the matching initial guess.
inline NlpProblem make_problem(std::shared_ptr<const DistanceField> field, std::shared_ptr<const AircraftParams> model,
                               const LevelTrimTable& trims, const StateVector& x_i, SeedPlan& plan,
                               const PlannerConfig& cfg) {
  NlpProblem prob;
  prob.N = cfg.knots;
  prob.method = cfg.method;
  prob.params = std::move(model);
  prob.field = std::move(field);
  prob.radius = plan.radius;
  prob.x_i = x_i;
  prob.delta_i = StateVector::Constant(cfg.delta_i);
  prob.delta_f = cfg.delta_f;
  prob.h_min = cfg.h_min;
  prob.h_max = cfg.h_max;
  prob.linked_ailerons = cfg.linked_ailerons;
  apply_limits(prob, cfg.limits);
  // The measured state always lies inside the bounds.
  prob.x_min = prob.x_min.cwiseMin(x_i);
  prob.x_max = prob.x_max.cwiseMax(x_i);

  const double yaw0 = x_i(idx::yaw);
  const TimeParamPath& tp = plan.timed;
  const double t_end = std::min(cfg.horizon, tp.total_time());
  const double s_end = tp.arclength_at(t_end);
  const Vec3 tan = tp.smooth().tangent(s_end);
  const Vec3 ahead = tp.smooth().tangent(std::min(s_end + 1e-3, tp.smooth().length()));
  const double sign = tan.cross(ahead).z() >= 0.0 ? 1.0 : -1.0;
  const double yaw_rate = sign * plan.endpoint.velocity.norm() * tp.smooth().curvature(s_end);
  // Unwrap the terminal yaw towards the initial one.
  const AircraftState xf = tangent_state(plan.endpoint.position, plan.endpoint.velocity, yaw_rate, &trims, yaw0);
  prob.x_f = xf.flatten();
  plan.x_f = prob.x_f;

  if (cfg.linear_seed) {
    plan.seed = linear_seed(x_i, prob.x_f, cfg.knots, *prob.params, std::clamp(t_end / cfg.knots, cfg.h_min, cfg.h_max));
  } else {
    plan.seed = seed_from_path(tp, cfg.knots, *prob.params, cfg.horizon, &trims, cfg.h_min, cfg.h_max, yaw0);
  }
  plan.seed.x.front() = x_i;
  return prob;
}

}  // namespace poststall
