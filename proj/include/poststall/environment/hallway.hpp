#pragma once

// Hallway worlds: a chain of axis-aligned free-space boxes inside solid walls.

#include <poststall/environment/distance_field.hpp>

#include <string>
#include <vector>

namespace poststall {

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
  bool overlaps(const Box& o) const {
    return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
  }
};

struct StartPose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;    ///< [rad]
  double speed = 0.0;  ///< forward body speed [m/s]
};

struct HallwaySpec {
  std::string name = "hallway";
  std::vector<Box> segments;  ///< free corridor volumes, world frame
  double width = 1.75;        ///< nominal corridor width [m]
  double height = 2.5;        ///< nominal corridor height [m]
  StartPose start;
  Vec3 goal = Vec3::Zero();
  double goal_radius = 0.5;   ///< arrival ball for closed-loop runs [m]
};

inline void validate(const HallwaySpec& spec) {
  if (!(spec.width > 0.0)) throw ConfigError(spec.name + ": width must be positive");
  if (!(spec.height > 0.0)) throw ConfigError(spec.name + ": height must be positive");
  if (!(spec.goal_radius > 0.0)) throw ConfigError(spec.name + ": goal radius must be positive");
  if (spec.segments.empty()) throw ConfigError(spec.name + ": no corridor segments");
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const Box& b = spec.segments[i];
    if (!(b.hi.array() > b.lo.array()).all()) throw ConfigError(spec.name + ": degenerate segment");
    if (i > 0 && !spec.segments[i - 1].overlaps(b))
      throw ConfigError(spec.name + ": segments " + std::to_string(i - 1) + " and " + std::to_string(i) +
                        " do not overlap");
  }
}

inline bool in_free_space(const HallwaySpec& spec, const Vec3& p) {
  for (const auto& b : spec.segments)
    if (b.contains(p)) return true;
  return false;
}

/// Voxelizes the hallway: voxels whose centre lies in a corridor box are free,
/// everything else (including a `margin`-thick shell around the union of the
/// boxes) is wall.
inline DistanceField build_field(const HallwaySpec& spec, double resolution = 0.05, double margin = 0.25,
                                 double d_max = 5.0) {
  if (!(resolution > 0.0)) throw DomainError("resolution must be positive");
  validate(spec);
  Vec3 lo = spec.segments.front().lo, hi = spec.segments.front().hi;
  for (const auto& b : spec.segments) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  lo.array() -= margin;
  hi.array() += margin;
  Eigen::Vector3i dims;
  for (int a = 0; a < 3; ++a) dims(a) = std::max(2, static_cast<int>(std::ceil((hi(a) - lo(a)) / resolution - 1e-9)));

  std::vector<std::uint8_t> occ(std::size_t(dims.prod()), 1);
  for (int k = 0; k < dims.z(); ++k)
    for (int j = 0; j < dims.y(); ++j)
      for (int i = 0; i < dims.x(); ++i) {
        const Vec3 c = lo + resolution * Vec3(i + 0.5, j + 0.5, k + 0.5);
        if (in_free_space(spec, c)) occ[(std::size_t(k) * dims.y() + j) * dims.x() + i] = 0;
      }
  return DistanceField(lo, resolution, dims, std::move(occ), d_max);
}

/// Single 90 degree corner: east along +x, then north along +y, 1.75 m wide.
inline HallwaySpec l_corner_hallway() {
  HallwaySpec s;
  s.name = "l-corner";
  s.width = 1.75;
  s.height = 2.5;
  s.segments = {Box{Vec3(0.0, 0.0, -2.5), Vec3(6.0, 1.75, 0.0)},
                Box{Vec3(4.25, 0.0, -2.5), Vec3(6.0, 6.5, 0.0)}};
  s.start = StartPose{Vec3(0.6, 0.875, -1.25), 0.0, 4.0};
  s.goal = Vec3(5.125, 5.5, -1.25);
  s.goal_radius = 0.5;
  return s;
}

}  // namespace poststall
