#pragma once

// Curvature-limited speed profile v(s) = v_max - kappa(s) * kappa_gain and the
// resulting monotone time <-> arclength map.

#include <poststall/planning/smooth_path.hpp>

namespace poststall {

struct SpeedProfile {
  double v_max = 4.0;       ///< [m/s]
  double kappa_gain = 1.0;  ///< speed lost per unit curvature [m^2/s]
  double v_floor = 0.5;     ///< smallest admissible speed [m/s]
  double ds = 0.01;         ///< arclength grid spacing [m]
};

class TimeParamPath {
 public:
  TimeParamPath() = default;
  TimeParamPath(SmoothPath path, SpeedProfile profile, std::vector<double> s, std::vector<double> t,
                std::vector<double> v)
      : path_(std::move(path)), profile_(profile), s_(std::move(s)), t_(std::move(t)), v_(std::move(v)) {}

  const SmoothPath& smooth() const { return path_; }
  const SpeedProfile& profile() const { return profile_; }
  double total_time() const { return t_.back(); }
  const std::vector<double>& s_grid() const { return s_; }
  const std::vector<double>& t_grid() const { return t_; }
  const std::vector<double>& v_grid() const { return v_; }

  double time_at(double s) const { return interp(s_, t_, s); }
  double arclength_at(double t) const { return interp(t_, s_, t); }
  double speed_at_arclength(double s) const { return interp(s_, v_, s); }

  Vec3 position(double t) const { return path_.point(arclength_at(t)); }
  Vec3 velocity(double t) const {
    const double s = arclength_at(t);
    return speed_at_arclength(s) * path_.tangent(s);
  }

 private:
  static double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + w * (ys[i + 1] - ys[i]);
  }

  SmoothPath path_;
  SpeedProfile profile_;
  std::vector<double> s_, t_, v_;
};

/// Integrates t(s) = int ds / v(s) with the trapezoid rule on a grid no coarser
/// than profile.ds. Piece boundaries are always grid nodes.
inline TimeParamPath reparametrize_time(const SmoothPath& path, const SpeedProfile& profile = {}) {
  if (path.empty()) throw DomainError("cannot time-parametrize an empty path");
  if (!(profile.ds > 0.0)) throw DomainError("arclength step must be positive");
  if (!(profile.v_floor > 0.0)) throw DomainError("speed floor must be positive");

  std::vector<double> s{0.0};
  const auto& starts = path.piece_starts();
  for (std::size_t i = 0; i < path.pieces().size(); ++i) {
    const double len = path.pieces()[i].length;
    const int n = std::max(1, static_cast<int>(std::ceil(len / profile.ds)));
    for (int j = 1; j <= n; ++j) s.push_back(starts[i] + len * j / n);
  }
  std::vector<double> v(s.size()), t(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    v[i] = profile.v_max - path.curvature(s[i]) * profile.kappa_gain;
    if (!(v[i] > profile.v_floor))
      throw VelocityUnderflow("speed " + std::to_string(v[i]) + " m/s at s = " + std::to_string(s[i]) +
                              " is below the floor");
  }
  for (std::size_t i = 1; i < s.size(); ++i) t[i] = t[i - 1] + 0.5 * (s[i] - s[i - 1]) * (1.0 / v[i] + 1.0 / v[i - 1]);
  return TimeParamPath(path, profile, std::move(s), std::move(t), std::move(v));
}

struct Endpoint {
  Vec3 position;
  Vec3 velocity;
};

/// Position and velocity a horizon T_H ahead along the path (clamped to its end).
inline Endpoint select_endpoint(const TimeParamPath& tp, double horizon) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  const double t = std::min(horizon, tp.total_time());
  return Endpoint{tp.position(t), tp.velocity(t)};
}

}  // namespace poststall
