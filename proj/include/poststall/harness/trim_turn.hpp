#pragma once

// Tightest steady level turn under a cap on wing angle of attack.
//
// The airframe is reduced to its fixed surfaces (control surfaces removed) and
// only the force balance is imposed: body-frame acceleration f/m - w x v = 0,
// zero vertical velocity, no sideslip. Unknowns are
//   z = [V, alpha, roll, pitch, yaw_rate, thrust, s_1..s_w]
// where s_i >= 0 are slacks turning each wing cap into an equality. For a
// given radius R the conditions plus V = R * yaw_rate form a bounded
// least-squares feasibility problem solved with the trajopt LM step; the
// smallest feasible R is found by bisection.

#include <poststall/trajopt/solver.hpp>

#include <algorithm>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace poststall {

struct TrimResult {
  double alpha_cap = 0.0;  ///< [rad]
  double radius = std::numeric_limits<double>::infinity();  ///< [m], +inf for straight flight
  double speed = 0.0;      ///< [m/s]
  double alpha = 0.0;      ///< body angle of attack [rad]
  double roll = 0.0;
  double pitch = 0.0;
  double yaw_rate = 0.0;   ///< [rad/s]
  double thrust = 0.0;     ///< [N]
  double wing_aoa = 0.0;   ///< largest wing |AoA| at the solution [rad]
  double residual = 0.0;   ///< inf-norm of the balance equations [m/s^2, m/s]
};

struct TurnTrimConfig {
  double v_min = 1.0;  ///< speed bounds [m/s]
  double v_max = 10.0;
  double r_min = 0.02;  ///< bisection bracket [m]
  double r_max = 50.0;
  double r_tol = 1e-4;  ///< relative bracket width at which bisection stops
  double tol = 1e-11;   ///< feasibility tolerance on the scaled residual
  int max_lm = 200;
};

/// Horizontal speed over turn rate; +inf when the turn rate vanishes.
inline double turn_radius(double horizontal_speed, double yaw_rate, double eps = 1e-12) {
  if (std::abs(yaw_rate) < eps) return std::numeric_limits<double>::infinity();
  return horizontal_speed / std::abs(yaw_rate);
}

/// Copy of the airframe with every actuated surface removed.
inline AircraftParams without_control_surfaces(AircraftParams p) {
  std::erase_if(p.surfaces, [](const AeroSurface& s) { return s.actuated(); });
  return p;
}

namespace detail {

class TurnTrimProblem {
 public:
  TurnTrimProblem(const AircraftParams& p, const TurnTrimConfig& cfg) : p_(without_control_surfaces(p)), cfg_(cfg) {
    for (std::size_t i = 0; i < p_.surfaces.size(); ++i)
      if (p_.surfaces[i].name.rfind("wing", 0) == 0) wings_.push_back(i);
    if (wings_.empty()) throw ConfigError("vehicle has no surface named wing*");
  }

  int size() const { return 6 + static_cast<int>(wings_.size()); }

  AircraftState state(const Eigen::VectorXd& z) const {
    AircraftState s;
    const double V = z(0), a = z(1), phi = z(2), th = z(3), psid = z(4);
    s.theta = Vec3(phi, th, 0.0);
    s.v = V * Vec3(std::cos(a), 0.0, std::sin(a));
    s.omega = psid * Vec3(-std::sin(th), std::sin(phi) * std::cos(th), std::cos(phi) * std::cos(th));
    s.delta_t = z(5);
    return s;
  }

  /// Scaled residuals: acceleration / g (3), vertical speed / V, radius
  /// condition / V, and one cap equality per wing.
  Eigen::VectorXd residual(const Eigen::VectorXd& z, double radius, double cap) const {
    const AircraftState s = state(z);
    Eigen::VectorXd r(5 + wings_.size());
    r.head<3>() = acceleration(s) / p_.gravity;
    r(3) = vertical_speed(z) / z(0);
    r(4) = (z(0) - radius * z(4)) / z(0);
    const auto aoa = surface_angles(s, p_, Vec4::Zero());
    for (std::size_t i = 0; i < wings_.size(); ++i) r(5 + i) = cap - std::abs(aoa[wings_[i]]) - z(6 + i);
    return r;
  }

  Vec3 acceleration(const AircraftState& s) const {
    const ForcesMoments fm = total_forces_moments(s, p_, Vec4::Zero());
    return fm.force / p_.mass - s.omega.cross(s.v);
  }

  static double vertical_speed(const Eigen::VectorXd& z) {
    const double a = z(1), phi = z(2), th = z(3);
    return z(0) * (-std::sin(th) * std::cos(a) + std::cos(th) * std::cos(phi) * std::sin(a));
  }

  double wing_aoa(const Eigen::VectorXd& z) const {
    const auto aoa = surface_angles(state(z), p_, Vec4::Zero());
    double m = 0.0;
    for (auto i : wings_) m = std::max(m, std::abs(aoa[i]));
    return m;
  }

  Eigen::VectorXd lo() const {
    Eigen::VectorXd l(size());
    l << cfg_.v_min, -0.3, -1.5, -1.5, 1e-4, 0.0, Eigen::VectorXd::Zero(wings_.size());
    return l;
  }
  Eigen::VectorXd hi() const {
    Eigen::VectorXd h(size());
    h << cfg_.v_max, 1.55, 1.5, 1.5, 40.0, p_.max_thrust(), Eigen::VectorXd::Constant(wings_.size(), 3.2);
    return h;
  }

  /// Bounded Levenberg-Marquardt on |r|^2; returns the final point and its residual norm.
  std::pair<Eigen::VectorXd, double> solve(Eigen::VectorXd z, double radius, double cap) const {
    const Eigen::VectorXd l = lo(), h = hi();
    z = z.cwiseMax(l).cwiseMin(h);
    Eigen::VectorXd r = residual(z, radius, cap);
    double lm = 1e-3;
    for (int it = 0; it < cfg_.max_lm && r.lpNorm<Eigen::Infinity>() > cfg_.tol; ++it) {
      Eigen::MatrixXd J(r.size(), z.size());
      for (int j = 0; j < z.size(); ++j) {
        const double step = 1e-7 * std::max(1.0, std::abs(z(j)));
        Eigen::VectorXd zp = z, zm = z;
        zp(j) += step;
        zm(j) -= step;
        J.col(j) = (residual(zp, radius, cap) - residual(zm, radius, cap)) / (2.0 * step);
      }
      const Eigen::MatrixXd H = J.transpose() * J;
      const Eigen::VectorXd g = J.transpose() * r;
      std::vector<char> pinned(z.size(), 0);
      for (int i = 0; i < z.size(); ++i)
        pinned[i] = (z(i) <= l(i) && g(i) > 0.0) || (z(i) >= h(i) && g(i) < 0.0);
      bool improved = false;
      for (int tries = 0; tries < 30 && !improved; ++tries) {
        const auto zn = bounded_lm_step(H, g, z, l, h, pinned, lm);
        if (zn) {
          const Eigen::VectorXd rn = residual(*zn, radius, cap);
          if (rn.allFinite() && rn.squaredNorm() < r.squaredNorm()) {
            z = *zn;
            r = rn;
            lm = std::max(lm / 3.0, 1e-12);
            improved = true;
            break;
          }
        }
        lm *= 4.0;
      }
      if (!improved) break;
    }
    return {z, r.lpNorm<Eigen::Infinity>()};
  }

  TrimResult result(const Eigen::VectorXd& z, double cap) const {
    TrimResult t;
    t.alpha_cap = cap;
    t.speed = z(0);
    t.alpha = z(1);
    t.roll = z(2);
    t.pitch = z(3);
    t.yaw_rate = z(4);
    t.thrust = z(5);
    t.radius = turn_radius(z(0), z(4));
    t.wing_aoa = wing_aoa(z);
    const AircraftState s = state(z);
    t.residual = std::max(acceleration(s).lpNorm<Eigen::Infinity>(), std::abs(vertical_speed(z)));
    return t;
  }

  /// Initial guesses: a gentle banked turn at a few speeds, slacks filled in.
  std::vector<Eigen::VectorXd> guesses(double radius, double cap) const {
    std::vector<Eigen::VectorXd> out;
    for (double V : {cfg_.v_max, 0.5 * (cfg_.v_min + cfg_.v_max), cfg_.v_min + 0.5}) {
      V = std::clamp(V, cfg_.v_min, cfg_.v_max);
      Eigen::VectorXd z(size());
      const double a = std::min(0.15, 0.5 * cap);
      const double psid = V / radius;
      const double bank = std::atan(V * psid / p_.gravity);
      z << V, a, std::clamp(bank, -1.4, 1.4), a, psid, 0.3 * p_.max_thrust(), Eigen::VectorXd::Zero(wings_.size());
      out.push_back(fill_slacks(z, cap));
    }
    return out;
  }

  Eigen::VectorXd fill_slacks(Eigen::VectorXd z, double cap) const {
    const auto aoa = surface_angles(state(z), p_, Vec4::Zero());
    for (std::size_t i = 0; i < wings_.size(); ++i) z(6 + i) = std::max(0.0, cap - std::abs(aoa[wings_[i]]));
    return z;
  }

 private:
  AircraftParams p_;
  TurnTrimConfig cfg_;
  std::vector<std::size_t> wings_;
};

}  // namespace detail

/// Minimum steady-turn radius for each AoA cap. Caps are processed in
/// ascending order; a turn feasible under a smaller cap stays feasible under a
/// larger one, so each search starts from the previous answer and the radii
/// are non-increasing in the cap. Throws TrimInfeasible when no turn at
/// r_max satisfies a cap.
inline std::vector<TrimResult> trim_turn_radius(const std::vector<double>& caps, const AircraftParams& params,
                                                const TurnTrimConfig& cfg = {}) {
  if (caps.empty()) return {};
  if (!(cfg.v_min > 0.0) || !(cfg.v_max > cfg.v_min)) throw DomainError("bad speed bounds");
  std::vector<std::size_t> order(caps.size());
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (!(caps[i] > 0.0 && caps[i] < std::numbers::pi / 2)) throw DomainError("AoA cap must lie in (0, pi/2)");
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return caps[a] < caps[b]; });

  const detail::TurnTrimProblem prob(params, cfg);
  std::vector<TrimResult> out(caps.size());
  std::optional<Eigen::VectorXd> best;  // feasible point of the previous cap
  double r_hi = cfg.r_max;

  for (std::size_t oi : order) {
    const double cap = caps[oi];
    auto attempt = [&](double radius) -> std::optional<Eigen::VectorXd> {
      std::vector<Eigen::VectorXd> starts;
      if (best) starts.push_back(prob.fill_slacks(*best, cap));
      for (auto& g : prob.guesses(radius, cap)) starts.push_back(g);
      for (auto& z0 : starts) {
        auto [z, res] = prob.solve(z0, radius, cap);
        if (res <= cfg.tol) return z;
      }
      return std::nullopt;
    };

    // Upper end of the bracket: the previous cap's answer is still feasible.
    std::optional<Eigen::VectorXd> hi_point;
    if (best) {
      hi_point = prob.fill_slacks(*best, cap);
    } else {
      hi_point = attempt(r_hi);
      if (!hi_point) throw TrimInfeasible("no steady turn of radius " + std::to_string(r_hi) + " m under the cap");
    }
    double lo = cfg.r_min, hi = r_hi;
    while ((hi - lo) > cfg.r_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      best = hi_point;
      if (auto z = attempt(mid)) {
        hi = mid;
        hi_point = z;
      } else {
        lo = mid;
      }
    }
    best = hi_point;
    r_hi = hi;
    out[oi] = prob.result(*hi_point, cap);
  }
  return out;
}

}  // namespace poststall
