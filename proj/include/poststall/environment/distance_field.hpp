#pragma once

// Dense voxel occupancy grid with an exact Euclidean distance transform.

#include <poststall/core.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace poststall {

namespace detail {

/// 1-D squared distance transform of a sampled function (Felzenszwalb & Huttenlocher).
/// `f` holds 0 at feature samples and +inf elsewhere on entry to the first pass.
inline void squared_dt_1d(const std::vector<double>& f, std::vector<double>& d,
                          std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  d.assign(n, inf);
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int first = 0;
  while (first < n && f[first] == inf) ++first;
  if (first == n) return;

  int k = 0;
  v[0] = first;
  z[0] = -inf;
  z[1] = inf;
  for (int q = first + 1; q < n; ++q) {
    if (f[q] == inf) continue;
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = double(q) - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace detail

/// Squared voxel-unit distance from every voxel to the nearest voxel with
/// `feature[i] != 0` (exact, separable). Entries are +inf when there is no feature.
inline std::vector<double> squared_edt(const std::vector<std::uint8_t>& feature, int nx, int ny, int nz) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto at = [=](int i, int j, int k) { return (std::size_t(k) * ny + j) * nx + i; };
  std::vector<double> g(feature.size());
  for (std::size_t n = 0; n < feature.size(); ++n) g[n] = feature[n] ? 0.0 : inf;

  std::vector<double> f, d, z;
  std::vector<int> v;
  auto pass = [&](int len, auto index_of) {
    f.resize(len);
    for (int a = 0; a < len; ++a) f[a] = g[index_of(a)];
    detail::squared_dt_1d(f, d, v, z);
    for (int a = 0; a < len; ++a) g[index_of(a)] = d[a];
  };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) pass(nx, [&](int a) { return at(a, j, k); });
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) pass(ny, [&](int a) { return at(i, a, k); });
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) pass(nz, [&](int a) { return at(i, j, a); });
  return g;
}

/// Voxelized world supporting distance-to-obstacle queries.
///
/// Voxel (i, j, k) has its centre at origin + (i + 1/2, j + 1/2, k + 1/2) * resolution.
/// Immutable after construction.
class DistanceField {
 public:
  DistanceField(const Vec3& origin, double resolution, const Eigen::Vector3i& dims,
                std::vector<std::uint8_t> occupancy, double d_max = 5.0)
      : origin_(origin), resolution_(resolution), dims_(dims), d_max_(d_max),
        occupancy_(std::move(occupancy)) {
    if (!(resolution > 0.0)) throw DomainError("resolution must be positive");
    if ((dims.array() < 2).any()) throw DomainError("field needs at least 2 voxels per axis");
    if (occupancy_.size() != std::size_t(dims.prod())) throw DomainError("occupancy size mismatch");
    const bool any_free = std::any_of(occupancy_.begin(), occupancy_.end(), [](auto o) { return o == 0; });
    if (!any_free) throw EmptyWorld("field has no free voxel");

    const auto to_occupied = squared_edt(occupancy_, dims.x(), dims.y(), dims.z());
    std::vector<std::uint8_t> free_mask(occupancy_.size());
    for (std::size_t n = 0; n < free_mask.size(); ++n) free_mask[n] = occupancy_[n] ? 0 : 1;
    const auto to_free = squared_edt(free_mask, dims.x(), dims.y(), dims.z());

    distance_.resize(occupancy_.size());
    inner_.resize(occupancy_.size());
    for (std::size_t n = 0; n < occupancy_.size(); ++n) {
      distance_[n] = std::min(resolution_ * std::sqrt(to_occupied[n]), d_max_);
      inner_[n] = std::min(resolution_ * std::sqrt(to_free[n]), d_max_);
    }
  }

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  double d_max() const { return d_max_; }

  std::size_t linear_index(int i, int j, int k) const {
    return (std::size_t(k) * dims_.y() + j) * dims_.x() + i;
  }
  bool occupied(int i, int j, int k) const { return occupancy_[linear_index(i, j, k)] != 0; }
  /// Distance from the voxel centre to the nearest occupied voxel centre (0 on occupied voxels).
  double voxel_distance(int i, int j, int k) const { return distance_[linear_index(i, j, k)]; }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin_ + resolution_ * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  Vec3 lower_corner() const { return origin_; }
  Vec3 upper_corner() const { return origin_ + resolution_ * dims_.cast<double>(); }

  /// Trilinearly interpolated distance to the occupied set; 0 outside the
  /// region spanned by voxel centres.
  double min_distance(const Vec3& p) const { return interpolate(distance_, p); }

  /// Interpolated distance from inside an obstacle to free space (0 in free space).
  double depth(const Vec3& p) const { return interpolate(inner_, p); }

  /// Finite-difference step used by the gradient queries.
  double gradient_step() const { return 0.5 * resolution_; }

  /// Central difference of min_distance. Throws BoundaryError within one voxel of the edge.
  Vec3 distance_gradient(const Vec3& p) const { return central_difference(distance_, p); }

  /// Gradient pushing a point towards clearance: the distance gradient in free
  /// space, and away from the obstacle interior where the distance is flat zero.
  Vec3 clearance_gradient(const Vec3& p) const {
    Vec3 g = central_difference(distance_, p);
    if (g.squaredNorm() > 0.0) return g;
    return -central_difference(inner_, p);
  }

  /// Exact gradient of the trilinear interpolant of the distance (one-sided at
  /// cell faces), falling back to minus the depth gradient inside obstacles.
  /// Zero outside the centre-spanned region.
  Vec3 interpolant_gradient(const Vec3& p) const {
    Vec3 g = interpolate_gradient(distance_, p);
    if (g.squaredNorm() > 0.0) return g;
    return -interpolate_gradient(inner_, p);
  }

  /// True when p is at least `margin_voxels` voxels inside the centre-spanned region.
  bool in_interior(const Vec3& p, double margin_voxels = 1.0) const {
    const Vec3 u = (p - origin_) / resolution_ - Vec3::Constant(0.5);
    for (int a = 0; a < 3; ++a) {
      if (!(u(a) >= margin_voxels && u(a) <= dims_(a) - 1 - margin_voxels)) return false;
    }
    return true;
  }

 private:
  double interpolate(const std::vector<double>& grid, const Vec3& p) const {
    const Vec3 u = (p - origin_) / resolution_ - Vec3::Constant(0.5);
    int base[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
      if (!(u(a) >= 0.0 && u(a) <= dims_(a) - 1)) return 0.0;
      int i0 = static_cast<int>(std::floor(u(a)));
      i0 = std::min(i0, dims_(a) - 2);
      base[a] = i0;
      frac[a] = u(a) - i0;
    }
    double acc = 0.0;
    for (int c = 0; c < 8; ++c) {
      const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
      const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                       (dk ? frac[2] : 1.0 - frac[2]);
      acc += w * grid[linear_index(base[0] + di, base[1] + dj, base[2] + dk)];
    }
    return acc;
  }

  Vec3 interpolate_gradient(const std::vector<double>& grid, const Vec3& p) const {
    const Vec3 u = (p - origin_) / resolution_ - Vec3::Constant(0.5);
    int base[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
      if (!(u(a) >= 0.0 && u(a) <= dims_(a) - 1)) return Vec3::Zero();
      const int i0 = std::min(static_cast<int>(std::floor(u(a))), dims_(a) - 2);
      base[a] = i0;
      frac[a] = u(a) - i0;
    }
    Vec3 g = Vec3::Zero();
    for (int c = 0; c < 8; ++c) {
      const int d[3] = {c & 1, (c >> 1) & 1, (c >> 2) & 1};
      const double v = grid[linear_index(base[0] + d[0], base[1] + d[1], base[2] + d[2])];
      for (int a = 0; a < 3; ++a) {
        double w = d[a] ? 1.0 : -1.0;
        for (int b = 0; b < 3; ++b)
          if (b != a) w *= d[b] ? frac[b] : 1.0 - frac[b];
        g(a) += w * v;
      }
    }
    return g / resolution_;
  }

  Vec3 central_difference(const std::vector<double>& grid, const Vec3& p) const {
    if (!in_interior(p)) throw BoundaryError("gradient query within one voxel of the field edge");
    const double h = gradient_step();
    Vec3 g;
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e(a) = h;
      g(a) = (interpolate(grid, p + e) - interpolate(grid, p - e)) / (2.0 * h);
    }
    return g;
  }

  Vec3 origin_;
  double resolution_;
  Eigen::Vector3i dims_;
  double d_max_;
  std::vector<std::uint8_t> occupancy_;
  std::vector<double> distance_;
  std::vector<double> inner_;
};

}  // namespace poststall
