#pragma once

// CSV and key:value writers for planner, optimizer and trim outputs, plus the
// plain-text state file read by `optimize --warm`.

#include <poststall/harness/pipeline.hpp>
#include <poststall/harness/trim_turn.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

namespace poststall::io {

inline void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  os << "k,t";
  for (const char* n : kStateNames) os << ',' << n;
  for (const char* n : kInputNames) os << ',' << n;
  os << '\n' << std::setprecision(12);
  for (int k = 0; k <= t.intervals(); ++k) {
    os << k << ',' << t.time(k);
    for (int i = 0; i < kStateDim; ++i) os << ',' << t.x[k](i);
    for (int i = 0; i < kInputDim; ++i) os << ',' << t.u[k](i);
    os << '\n';
  }
}

inline void write_report(std::ostream& os, const NlpReport& r, const std::string& prefix = "") {
  os << std::setprecision(10);
  os << prefix << "status: " << to_string(r.status) << '\n'
     << prefix << "iterations: " << r.iterations << '\n'
     << prefix << "outer_iterations: " << r.outer_iterations << '\n'
     << prefix << "solve_time: " << r.solve_time << '\n'
     << prefix << "dynamics_time: " << r.dynamics_time << '\n'
     << prefix << "dynamics_evals: " << r.dynamics_evals << '\n'
     << prefix << "max_defect: " << r.max_defect << '\n'
     << prefix << "max_violation: " << r.max_violation << '\n'
     << prefix << "warm_started: " << (r.warm_started ? "true" : "false") << '\n';
}

inline void write_points_csv(std::ostream& os, const WaypointPath& pts) {
  os << "i,x,y,z\n" << std::setprecision(10);
  for (std::size_t i = 0; i < pts.size(); ++i) os << i << ',' << pts[i].x() << ',' << pts[i].y() << ',' << pts[i].z() << '\n';
}

/// Time-parametrized path sampled every `ds` of arclength.
inline void write_timed_path_csv(std::ostream& os, const TimeParamPath& tp, double ds = 0.02) {
  os << "s,t,x,y,z,vx,vy,vz,curvature,speed\n" << std::setprecision(10);
  const double L = tp.smooth().length();
  const int n = std::max(1, static_cast<int>(std::ceil(L / ds)));
  for (int i = 0; i <= n; ++i) {
    const double s = std::min(L, i * ds);
    const double t = tp.time_at(s);
    const Vec3 p = tp.smooth().point(s);
    const Vec3 v = tp.velocity(t);
    os << s << ',' << t << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << v.x() << ',' << v.y() << ',' << v.z()
       << ',' << tp.smooth().curvature(s) << ',' << tp.speed_at_arclength(s) << '\n';
  }
}

inline void write_trim_csv(std::ostream& os, const std::vector<TrimResult>& rows) {
  os << "alpha_cap_deg,radius,speed,alpha_deg,roll_deg,pitch_deg,yaw_rate,thrust,wing_aoa_deg,residual\n"
     << std::setprecision(10);
  for (const auto& r : rows)
    os << rad2deg(r.alpha_cap) << ',' << r.radius << ',' << r.speed << ',' << rad2deg(r.alpha) << ',' << rad2deg(r.roll)
       << ',' << rad2deg(r.pitch) << ',' << r.yaw_rate << ',' << r.thrust << ',' << rad2deg(r.wing_aoa) << ','
       << r.residual << '\n';
}

/// 17 numbers separated by commas or whitespace; '#' starts a comment.
/// A trajectory CSV is accepted too: its first data row after the header is
/// read, skipping the leading k and t columns.
inline StateVector parse_state(const std::string& text) {
  std::vector<double> vals;
  std::istringstream lines(text);
  std::string line;
  bool trajectory = false;
  while (std::getline(lines, line)) {
    if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
    if (line.rfind("k,t", 0) == 0) {
      trajectory = true;
      continue;
    }
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw ConfigError("bad number '" + tok + "' in state file");
      } catch (const std::logic_error&) {
        throw ConfigError("bad number '" + tok + "' in state file");
      }
    }
    if (row.empty()) continue;
    if (trajectory) {
      if (row.size() < 2 + kStateDim) throw ConfigError("trajectory row too short");
      vals.assign(row.begin() + 2, row.begin() + 2 + kStateDim);
      break;
    }
    vals.insert(vals.end(), row.begin(), row.end());
  }
  if (vals.size() != kStateDim)
    throw ConfigError("state file must hold 17 values, found " + std::to_string(vals.size()));
  StateVector x;
  for (int i = 0; i < kStateDim; ++i) x(i) = vals[i];
  if (!x.allFinite()) throw ConfigError("state file holds non-finite values");
  return x;
}

inline StateVector load_state(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_state(ss.str());
}

}  // namespace poststall::io
