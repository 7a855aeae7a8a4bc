#pragma once

// Solver/planner settings files. Every key is optional; absent keys keep the
// built-in defaults. Angles are in degrees in the file.
//
//   format: poststall-solver
//   version: 1
//   solver:  {tol_defect, tol_cons, max_outer, max_inner, max_iterations,
//             rho_init, rho_growth, rho_max, lm_init, lm_max, fd_step, collision_margin}
//   problem: {knots, method, h_min, h_max, delta_i, delta_f: [17], radius, horizon, linked_ailerons}
//   limits:  {surface_deflection_deg, surface_rate, pitch_deg, rate, v_min: [3], v_max: [3]}
//   planner: {rrt_step, goal_tolerance, goal_bias, max_iters, rrt_attempts,
//             kappa_max, kappa_relax, kappa_limit, v_max, kappa_gain, v_floor}

#include <poststall/harness/pipeline.hpp>
#include <poststall/io/params_io.hpp>

namespace poststall::io {

inline constexpr const char* kSolverFormat = "poststall-solver";
inline constexpr int kSolverVersion = 1;

struct SolverSettings {
  SolverConfig solver;
  PlannerConfig planner;
};

namespace detail {

template <typename T>
void optional_key(const YAML::Node& n, const char* key, T& out) {
  if (n && n[key]) {
    try {
      out = n[key].as<T>();
    } catch (const YAML::Exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

inline void optional_deg(const YAML::Node& n, const char* key, double& out_rad) {
  double deg = rad2deg(out_rad);
  optional_key(n, key, deg);
  out_rad = deg2rad(deg);
}

}  // namespace detail

inline SolverSettings parse_solver(const YAML::Node& root) {
  using namespace detail;
  check_header(root, kSolverFormat, kSolverVersion);
  SolverSettings s;

  const YAML::Node sv = root["solver"];
  SolverConfig& c = s.solver;
  optional_key(sv, "tol_defect", c.tol_defect);
  optional_key(sv, "tol_cons", c.tol_cons);
  optional_key(sv, "max_outer", c.max_outer);
  optional_key(sv, "max_inner", c.max_inner);
  optional_key(sv, "max_iterations", c.max_iterations);
  optional_key(sv, "rho_init", c.rho_init);
  optional_key(sv, "rho_growth", c.rho_growth);
  optional_key(sv, "rho_max", c.rho_max);
  optional_key(sv, "lm_init", c.lm_init);
  optional_key(sv, "lm_max", c.lm_max);
  optional_key(sv, "fd_step", c.fd_step);
  optional_key(sv, "collision_margin", c.collision_margin);
  if (!(c.tol_defect > 0.0 && c.tol_cons > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (c.max_outer < 1 || c.max_inner < 1 || c.max_iterations < 1) throw ConfigError("iteration caps must be >= 1");
  if (!(c.rho_init > 0.0 && c.rho_growth > 1.0 && c.rho_max >= c.rho_init)) throw ConfigError("bad penalty schedule");

  PlannerConfig& p = s.planner;
  const YAML::Node pr = root["problem"];
  optional_key(pr, "knots", p.knots);
  if (pr && pr["method"]) p.method = parse_transcription(pr["method"].as<std::string>());
  optional_key(pr, "h_min", p.h_min);
  optional_key(pr, "h_max", p.h_max);
  optional_key(pr, "delta_i", p.delta_i);
  optional_key(pr, "radius", p.radius);
  optional_key(pr, "horizon", p.horizon);
  optional_key(pr, "linked_ailerons", p.linked_ailerons);
  if (pr && pr["delta_f"]) {
    const YAML::Node d = pr["delta_f"];
    if (!d.IsSequence() || d.size() != kStateDim) throw ConfigError("delta_f: expected 17 values");
    for (int i = 0; i < kStateDim; ++i) p.delta_f(i) = d[i].as<double>();
  }
  if (p.knots < 2) throw ConfigError("knots must be >= 2");
  if (!(p.h_min > 0.0 && p.h_max >= p.h_min)) throw ConfigError("bad step bounds");
  if (!(p.radius > 0.0 && p.horizon > 0.0)) throw ConfigError("radius and horizon must be positive");

  const YAML::Node li = root["limits"];
  VehicleLimits& l = p.limits;
  optional_deg(li, "surface_deflection_deg", l.surface_deflection);
  optional_key(li, "surface_rate", l.surface_rate);
  optional_deg(li, "pitch_deg", l.pitch);
  optional_key(li, "rate", l.rate);
  if (li && li["v_min"]) l.v_min = read_vec3(li["v_min"], "limits.v_min");
  if (li && li["v_max"]) l.v_max = read_vec3(li["v_max"], "limits.v_max");

  const YAML::Node pl = root["planner"];
  optional_key(pl, "rrt_step", p.rrt.step);
  optional_key(pl, "goal_tolerance", p.rrt.goal_tolerance);
  optional_key(pl, "goal_bias", p.rrt.goal_bias);
  optional_key(pl, "max_iters", p.rrt.max_iters);
  optional_key(pl, "rrt_attempts", p.rrt_attempts);
  optional_key(pl, "kappa_max", p.kappa_max);
  optional_key(pl, "kappa_relax", p.kappa_relax);
  optional_key(pl, "kappa_limit", p.kappa_limit);
  optional_key(pl, "v_max", p.speed.v_max);
  optional_key(pl, "kappa_gain", p.speed.kappa_gain);
  optional_key(pl, "v_floor", p.speed.v_floor);
  if (!(p.kappa_max > 0.0 && p.kappa_relax > 1.0)) throw ConfigError("bad curvature settings");
  return s;
}

inline SolverSettings load_solver(const std::string& path) { return parse_solver(detail::load_yaml_file(path)); }

inline SolverSettings parse_solver_string(const std::string& text) {
  try {
    return parse_solver(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace poststall::io
