#pragma once

// Wings-level steady flight: solves for angle of attack, elevator and thrust.

#include <poststall/dynamics/model.hpp>

#include <algorithm>
#include <vector>

namespace poststall {

struct LevelTrim {
  double speed = 0.0;
  double alpha = 0.0;     ///< body angle of attack = pitch [rad]
  double elevator = 0.0;  ///< [rad]
  double thrust = 0.0;    ///< [N]
  double residual = 0.0;  ///< inf-norm of (u_dot, w_dot, q_dot) at the solution

  AircraftState state(double yaw = 0.0) const {
    AircraftState s;
    s.theta = Vec3(0.0, alpha, yaw);
    s.delta(2) = elevator;
    s.delta_t = thrust;
    s.v = speed * Vec3(std::cos(alpha), 0.0, std::sin(alpha));
    return s;
  }

  ControlInput input(const AircraftParams& p) const {
    ControlInput u;
    u.throttle = -p.thrust_a * thrust / p.thrust_b;
    return u;
  }
};

/// Damped Newton on the longitudinal balance. Throws TrimInfeasible when it
/// does not converge or the thrust leaves [0, max_thrust].
inline LevelTrim level_trim(const AircraftParams& p, double speed, const LevelTrim* guess = nullptr,
                            double tol = 1e-10) {
  if (!(speed > 0.0)) throw DomainError("trim speed must be positive");
  auto residual = [&](const Vec3& z) {
    LevelTrim t{speed, z(0), z(1), z(2), 0.0};
    const AircraftState s = t.state();
    const StateVector xd = state_derivative(s, t.input(p), p);
    return Vec3(xd(idx::v), xd(idx::v + 2), xd(idx::omega + 1));
  };
  Vec3 z = guess ? Vec3(guess->alpha, guess->elevator, guess->thrust) : Vec3(0.2, -0.2, 0.5 * p.max_thrust());
  Vec3 r = residual(z);
  for (int it = 0; it < 100 && r.cwiseAbs().maxCoeff() > tol; ++it) {
    Mat3 J;
    for (int j = 0; j < 3; ++j) {
      Vec3 dz = Vec3::Zero();
      dz(j) = 1e-7;
      J.col(j) = (residual(z + dz) - residual(z - dz)) / 2e-7;
    }
    const Vec3 step = J.fullPivLu().solve(-r);
    double a = 1.0;
    for (int ls = 0; ls < 30; ++ls, a *= 0.5) {
      Vec3 zt = z + a * step;
      zt(0) = std::clamp(zt(0), -1.4, 1.4);
      const Vec3 rt = residual(zt);
      if (rt.norm() < r.norm()) {
        z = zt;
        r = rt;
        break;
      }
    }
  }
  if (!(r.cwiseAbs().maxCoeff() <= 1e-8) || z(2) < 0.0 || z(2) > p.max_thrust())
    throw TrimInfeasible("no level trim at " + std::to_string(speed) + " m/s");
  return LevelTrim{speed, z(0), z(1), z(2), r.cwiseAbs().maxCoeff()};
}

/// Level trims tabulated over a speed range, linearly interpolated and clamped.
/// Speeds with no trim are skipped.
class LevelTrimTable {
 public:
  LevelTrimTable() = default;
  LevelTrimTable(const AircraftParams& p, double v_lo = 1.0, double v_hi = 8.0, double dv = 0.25) {
    // Sweep down from the fastest speed, continuing from the previous solution.
    for (double v = v_hi; v >= v_lo - 1e-9; v -= dv) {
      try {
        rows_.push_back(level_trim(p, v, rows_.empty() ? nullptr : &rows_.back()));
      } catch (const TrimInfeasible&) {
      }
    }
    if (rows_.empty()) throw TrimInfeasible("no level trim anywhere in the speed range");
    std::reverse(rows_.begin(), rows_.end());
  }

  const std::vector<LevelTrim>& rows() const { return rows_; }

  LevelTrim at(double speed) const {
    if (speed <= rows_.front().speed) return rows_.front();
    if (speed >= rows_.back().speed) return rows_.back();
    std::size_t i = 1;
    while (rows_[i].speed < speed) ++i;
    const LevelTrim& a = rows_[i - 1];
    const LevelTrim& b = rows_[i];
    const double w = (speed - a.speed) / (b.speed - a.speed);
    auto mix = [w](double x, double y) { return x + w * (y - x); };
    return LevelTrim{speed, mix(a.alpha, b.alpha), mix(a.elevator, b.elevator), mix(a.thrust, b.thrust),
                     std::max(a.residual, b.residual)};
  }

 private:
  std::vector<LevelTrim> rows_;
};

}  // namespace poststall
