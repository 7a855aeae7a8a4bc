#pragma once

// Goal-biased RRT in position space and greedy shortcut pruning.

#include <poststall/environment/distance_field.hpp>
#include <poststall/planning/smooth_path.hpp>

#include <random>

namespace poststall {

struct RrtConfig {
  double step = 0.35;         ///< tree extension length [m]
  double goal_tolerance = 0.3;
  double goal_bias = 0.1;
  int max_iters = 20000;
};

/// True when every sample along [a, b] (spacing <= resolution / 2) keeps
/// min_distance >= radius.
inline bool segment_free(const DistanceField& field, const Vec3& a, const Vec3& b, double radius) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / (0.5 * field.resolution()))));
  for (int i = 0; i <= n; ++i) {
    if (field.min_distance(a + (b - a) * (double(i) / n)) < radius) return false;
  }
  return true;
}

inline WaypointPath rrt_plan(const DistanceField& field, const Vec3& start, const Vec3& goal, double radius,
                             std::uint64_t seed, const RrtConfig& cfg = {}) {
  if ((goal - start).norm() == 0.0) return {start};
  if (field.min_distance(start) < radius) throw DomainError("start is closer than the planning radius to a wall");
  if (field.min_distance(goal) < radius) throw DomainError("goal is closer than the planning radius to a wall");
  if (segment_free(field, start, goal, radius)) return {start, goal};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec3 lo = field.lower_corner(), hi = field.upper_corner();

  std::vector<Vec3> nodes{start};
  std::vector<int> parent{-1};
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    Vec3 sample;
    if (unit(rng) < cfg.goal_bias) {
      sample = goal;
    } else {
      for (int a = 0; a < 3; ++a) sample(a) = lo(a) + unit(rng) * (hi(a) - lo(a));
    }
    int nearest = 0;
    double best = (nodes[0] - sample).squaredNorm();
    for (int i = 1; i < static_cast<int>(nodes.size()); ++i) {
      const double d2 = (nodes[i] - sample).squaredNorm();
      if (d2 < best) {
        best = d2;
        nearest = i;
      }
    }
    const Vec3 dir = sample - nodes[nearest];
    const double dist = dir.norm();
    if (dist == 0.0) continue;
    const Vec3 next = dist <= cfg.step ? sample : Vec3(nodes[nearest] + dir * (cfg.step / dist));
    if (!segment_free(field, nodes[nearest], next, radius)) continue;
    nodes.push_back(next);
    parent.push_back(nearest);

    if ((next - goal).norm() <= cfg.goal_tolerance) {
      WaypointPath path;
      if ((next - goal).norm() > 0.0 && segment_free(field, next, goal, radius)) path.push_back(goal);
      for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; i = parent[i]) path.push_back(nodes[i]);
      std::reverse(path.begin(), path.end());
      return path;
    }
  }
  throw PlanTimeout("RRT did not reach the goal ball in " + std::to_string(cfg.max_iters) + " iterations");
}

/// From each kept node, jumps to the farthest later node visible at `radius`.
inline WaypointPath prune_path(const WaypointPath& path, const DistanceField& field, double radius) {
  if (path.size() <= 2) return path;
  WaypointPath out{path.front()};
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t j = path.size() - 1;
    while (j > i + 1 && !segment_free(field, path[i], path[j], radius)) --j;
    out.push_back(path[j]);
    i = j;
  }
  return out;
}

}  // namespace poststall
