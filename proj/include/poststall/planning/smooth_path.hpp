#pragma once

// Line / cubic-Bezier path with arclength parametrization, and the G2CBS
// corner smoother that produces it from a waypoint path.

#include <poststall/planning/bezier.hpp>

#include <algorithm>
#include <vector>

namespace poststall {

using WaypointPath = std::vector<Vec3>;

struct PathPiece {
  enum class Kind { Line, Bezier };
  Kind kind = Kind::Line;
  BezierControl ctrl{};  // a line uses ctrl[0] -> ctrl[3]
  double length = 0.0;
  // Bezier only: arclength at uniformly spaced parameter values.
  std::vector<double> s_table;

  static PathPiece line(const Vec3& p, const Vec3& q) {
    PathPiece piece;
    piece.kind = Kind::Line;
    piece.ctrl = {p, p, q, q};
    piece.length = (q - p).norm();
    return piece;
  }

  static PathPiece bezier(const BezierControl& c, int table_intervals = 256) {
    PathPiece piece;
    piece.kind = Kind::Bezier;
    piece.ctrl = c;
    piece.s_table.resize(table_intervals + 1);
    piece.s_table[0] = 0.0;
    const double du = 1.0 / table_intervals;
    for (int i = 0; i < table_intervals; ++i)
      piece.s_table[i + 1] = piece.s_table[i] + piece.arc(i * du, (i + 1) * du);
    piece.length = piece.s_table.back();
    return piece;
  }

  /// Arclength between two parameter values (5-point Gauss-Legendre).
  double arc(double a, double b) const {
    static constexpr double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                    0.9061798459386640};
    static constexpr double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                    0.4786286704993665, 0.2369268850561891};
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += w[i] * bezier_d1(ctrl, std::clamp(mid + half * x[i], 0.0, 1.0)).norm();
    return half * acc;
  }

  /// Bezier parameter at arclength s along this piece.
  double param_at(double s) const {
    if (kind == Kind::Line) return length > 0.0 ? std::clamp(s / length, 0.0, 1.0) : 0.0;
    s = std::clamp(s, 0.0, length);
    const int n = static_cast<int>(s_table.size()) - 1;
    const auto it = std::upper_bound(s_table.begin(), s_table.end(), s);
    const int i = std::clamp(static_cast<int>(it - s_table.begin()) - 1, 0, n - 1);
    const double u0 = double(i) / n, u1 = double(i + 1) / n;
    const double span = s_table[i + 1] - s_table[i];
    double u = span > 0.0 ? u0 + (s - s_table[i]) / span * (u1 - u0) : u0;
    for (int it_newton = 0; it_newton < 3; ++it_newton) {
      const double err = s_table[i] + arc(u0, u) - s;
      const double speed = bezier_d1(ctrl, u).norm();
      if (speed <= 0.0) break;
      u = std::clamp(u - err / speed, u0, u1);
    }
    return u;
  }

  Vec3 point(double s) const {
    if (kind == Kind::Line) return length > 0.0 ? ctrl[0] + (ctrl[3] - ctrl[0]) * std::clamp(s / length, 0.0, 1.0) : ctrl[0];
    return bezier_eval(ctrl, param_at(s));
  }

  Vec3 tangent(double s) const {
    if (kind == Kind::Line) return length > 0.0 ? Vec3((ctrl[3] - ctrl[0]) / length) : Vec3::UnitX();
    return bezier_d1(ctrl, param_at(s)).normalized();
  }

  double curvature(double s) const {
    if (kind == Kind::Line) return 0.0;
    return bezier_curvature(ctrl, param_at(s));
  }
};

/// Arclength-parametrized chain of pieces.
class SmoothPath {
 public:
  SmoothPath() = default;
  explicit SmoothPath(std::vector<PathPiece> pieces) : pieces_(std::move(pieces)) {
    start_.reserve(pieces_.size() + 1);
    start_.push_back(0.0);
    for (const auto& p : pieces_) start_.push_back(start_.back() + p.length);
  }

  const std::vector<PathPiece>& pieces() const { return pieces_; }
  /// Arclength at which piece i begins (size pieces + 1; the last entry is the length).
  const std::vector<double>& piece_starts() const { return start_; }
  double length() const { return start_.empty() ? 0.0 : start_.back(); }
  bool empty() const { return pieces_.empty(); }

  Vec3 point(double s) const {
    const auto [i, local] = locate(s);
    return pieces_[i].point(local);
  }
  Vec3 tangent(double s) const {
    const auto [i, local] = locate(s);
    return pieces_[i].tangent(local);
  }
  double curvature(double s) const {
    const auto [i, local] = locate(s);
    return pieces_[i].curvature(local);
  }

  std::pair<std::size_t, double> locate(double s) const {
    if (pieces_.empty()) throw DomainError("empty path");
    s = std::clamp(s, 0.0, length());
    const auto it = std::upper_bound(start_.begin(), start_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - start_.begin() - 1, 0));
    i = std::min(i, pieces_.size() - 1);
    return {i, s - start_[i]};
  }

 private:
  std::vector<PathPiece> pieces_;
  std::vector<double> start_;
};

/// Exact curvature along the path; 0 on line pieces.
inline double path_curvature(const SmoothPath& path, double s) {
  if (!(s >= 0.0 && s <= path.length() + 1e-12)) throw DomainError("arclength outside the path");
  return path.curvature(s);
}

inline constexpr double kDefaultKappaMax = 2.0;

namespace detail {

// Spiral shape constants. c1 = (c2 + 4)(c2 + 1) = 7.2351... is the value for
// which B3 and E3 coincide exactly; the commonly tabulated 7.2364 leaves a
// ~1e-4 gap at the join and moves the curvature peak off it.
inline const double kG2c2 = 0.4 * (std::sqrt(6.0) - 1.0);
inline const double kG2c1 = (kG2c2 + 4.0) * (kG2c2 + 1.0);
inline const double kG2c3 = (kG2c2 + 4.0) / (kG2c1 + 6.0);

struct CornerSplines {
  BezierControl b;  // B0..B3, B0 on the incoming leg
  BezierControl e;  // E0..E3, E0 on the outgoing leg
  double d = 0.0;   // distance from the corner to B0 and E0
};

/// Control points for a corner with unit leg directions u1 (towards the
/// previous waypoint) and u2 (towards the next one) scaled by d.
inline CornerSplines corner_splines(const Vec3& w2, const Vec3& u1, const Vec3& u2, double d) {
  const double c2 = kG2c2, c3 = kG2c3;
  const double h = c3 * d, g = c2 * c3 * d;
  CornerSplines cs;
  cs.d = d;
  cs.b[0] = w2 + d * u1;
  cs.b[1] = cs.b[0] - g * u1;
  cs.b[2] = cs.b[1] - h * u1;
  cs.e[0] = w2 + d * u2;
  cs.e[1] = cs.e[0] - g * u2;
  cs.e[2] = cs.e[1] - h * u2;
  // With the exact c1 the gap is rounding noise; splitting it keeps B3 == E3.
  const Vec3 gap = cs.e[2] - cs.b[2];
  cs.b[3] = cs.b[2] + 0.5 * gap;
  cs.e[3] = cs.b[3];
  return cs;
}

/// Curvature at the join of a Bezier spiral: (2/3) dist(P1, line P2P3) / |P3 - P2|^2.
inline double join_curvature(const BezierControl& P) {
  const Vec3 a = P[3] - P[2];
  const double base = a.norm();
  const double dist = (P[1] - P[2]).cross(a).norm() / base;
  return (2.0 / 3.0) * dist / (base * base);
}

}  // namespace detail

/// Distance from a corner at which the spline pair starts, for a turn whose legs
/// enclose `interior` radians, so the peak curvature equals kappa_max.
inline double g2cbs_corner_distance(double interior, double kappa_max) {
  const double beta = 0.5 * (std::numbers::pi - interior);
  if (!(std::cos(beta) > 1e-6)) throw CornerTooTight("path reverses on itself");
  const Vec3 u1 = Vec3::UnitX();
  const Vec3 u2(std::cos(interior), std::sin(interior), 0.0);
  const auto unit = detail::corner_splines(Vec3::Zero(), u1, u2, 1.0);
  return detail::join_curvature(unit.b) / kappa_max;
}

/// Replaces every corner of the waypoint path with a symmetric pair of cubic
/// Bezier spirals whose curvature peaks at kappa_max where they meet.
inline SmoothPath g2cbs_smooth(const WaypointPath& path, double kappa_max = kDefaultKappaMax,
                               double collinear_tol = 1e-9) {
  if (path.size() < 2) throw DomainError("smoothing needs at least two waypoints");
  if (!(kappa_max > 0.0)) throw DomainError("kappa_max must be positive");
  const std::size_t n = path.size();
  for (std::size_t i = 0; i + 1 < n; ++i)
    if ((path[i + 1] - path[i]).norm() <= 0.0) throw DomainError("repeated waypoint");

  // Corner distance per interior waypoint (0 where the path is straight).
  std::vector<double> dist(n, 0.0);
  std::vector<double> beta(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Vec3 u1 = (path[i - 1] - path[i]).normalized();
    const Vec3 u2 = (path[i + 1] - path[i]).normalized();
    const double interior = std::acos(std::clamp(u1.dot(u2), -1.0, 1.0));
    beta[i] = 0.5 * (std::numbers::pi - interior);
    if (beta[i] < collinear_tol) continue;
    dist[i] = g2cbs_corner_distance(interior, kappa_max);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double leg = (path[i + 1] - path[i]).norm();
    if (dist[i] + dist[i + 1] > leg * (1.0 + 1e-12))
      throw CornerTooTight("leg " + std::to_string(i) + " is " + std::to_string(leg) + " m but the spirals need " +
                           std::to_string(dist[i] + dist[i + 1]) + " m");
  }

  std::vector<PathPiece> pieces;
  Vec3 cursor = path.front();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (dist[i] == 0.0) continue;
    const Vec3 u1 = (path[i - 1] - path[i]).normalized();
    const Vec3 u2 = (path[i + 1] - path[i]).normalized();
    const auto cs = detail::corner_splines(path[i], u1, u2, dist[i]);
    if ((cs.b[0] - cursor).norm() > 1e-12) pieces.push_back(PathPiece::line(cursor, cs.b[0]));
    pieces.push_back(PathPiece::bezier(cs.b));
    pieces.push_back(PathPiece::bezier({cs.e[3], cs.e[2], cs.e[1], cs.e[0]}));
    cursor = cs.e[0];
  }
  if ((path.back() - cursor).norm() > 1e-12 || pieces.empty()) pieces.push_back(PathPiece::line(cursor, path.back()));
  return SmoothPath(std::move(pieces));
}

}  // namespace poststall
