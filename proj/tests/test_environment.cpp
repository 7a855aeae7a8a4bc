#include <gtest/gtest.h>

#include <poststall/environment/hallway.hpp>
#include <poststall/io/map_io.hpp>

#include "support.hpp"

#include <random>
#include <thread>

using namespace poststall;

namespace {

struct RandomGrid {
  Eigen::Vector3i dims{20, 20, 20};
  double res = 0.1;
  Vec3 origin{-1.0, 0.5, 2.0};
  std::vector<std::uint8_t> occ;

  explicit RandomGrid(std::uint64_t seed, double density = 0.03) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution b(density);
    occ.resize(dims.prod());
    for (auto& o : occ) o = b(rng);
    occ[0] = 1;
  }
  std::size_t at(int i, int j, int k) const { return (std::size_t(k) * dims.y() + j) * dims.x() + i; }
};

// Distance from p to the nearest occupied voxel cube.
double brute_distance_to_cubes(const RandomGrid& g, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k)
    for (int j = 0; j < 20; ++j)
      for (int i = 0; i < 20; ++i) {
        if (!g.occ[g.at(i, j, k)]) continue;
        const Vec3 lo = g.origin + g.res * Vec3(i, j, k);
        const Vec3 hi = lo + Vec3::Constant(g.res);
        const Vec3 q = p.cwiseMax(lo).cwiseMin(hi);
        best = std::min(best, (p - q).norm());
      }
  return best;
}

HallwaySpec straight_corridor() {
  HallwaySpec s;
  s.segments = {Box{Vec3(0, 0, -2), Vec3(6, 1.75, 0)}};
  s.start = StartPose{Vec3(0.5, 0.875, -1), 0.0, 4.0};
  s.goal = Vec3(5.5, 0.875, -1);
  return s;
}

}  // namespace

TEST(DistanceTransform, MatchesExhaustiveOracle) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RandomGrid g(seed);
    const DistanceField f(g.origin, g.res, g.dims, g.occ, 100.0);
    std::vector<Eigen::Vector3i> occupied;
    for (int k = 0; k < 20; ++k)
      for (int j = 0; j < 20; ++j)
        for (int i = 0; i < 20; ++i)
          if (g.occ[g.at(i, j, k)]) occupied.emplace_back(i, j, k);
    for (int k = 0; k < 20; ++k)
      for (int j = 0; j < 20; ++j)
        for (int i = 0; i < 20; ++i) {
          long best = std::numeric_limits<long>::max();
          for (const auto& o : occupied) {
            const Eigen::Vector3i d = o - Eigen::Vector3i(i, j, k);
            best = std::min<long>(best, d.squaredNorm());
          }
          ASSERT_EQ(f.voxel_distance(i, j, k), g.res * std::sqrt(double(best))) << i << ' ' << j << ' ' << k;
        }
  }
}

TEST(DistanceTransform, ZeroOnOccupiedAndLipschitz) {
  RandomGrid g(9);
  const DistanceField f(g.origin, g.res, g.dims, g.occ, 100.0);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> idx(0, 19);
  for (int n = 0; n < 2000; ++n) {
    const Eigen::Vector3i v(idx(rng), idx(rng), idx(rng)), w(idx(rng), idx(rng), idx(rng));
    if (f.occupied(v.x(), v.y(), v.z())) EXPECT_EQ(f.voxel_distance(v.x(), v.y(), v.z()), 0.0);
    const double dv = f.voxel_distance(v.x(), v.y(), v.z()), dw = f.voxel_distance(w.x(), w.y(), w.z());
    EXPECT_LE(dv, dw + g.res * (v - w).cast<double>().norm() + g.res);
  }
}

TEST(DistanceField, EmptyWorldThrows) {
  std::vector<std::uint8_t> all(8 * 8 * 8, 1);
  EXPECT_THROW(DistanceField(Vec3::Zero(), 0.1, Eigen::Vector3i(8, 8, 8), all), EmptyWorld);
}

TEST(DistanceField, AllFreeIsClampedAtDmax) {
  std::vector<std::uint8_t> none(8 * 8 * 8, 0);
  const DistanceField f(Vec3::Zero(), 0.1, Eigen::Vector3i(8, 8, 8), none, 2.0);
  EXPECT_DOUBLE_EQ(f.min_distance(Vec3::Constant(0.4)), 2.0);
}

TEST(DistanceField, CorridorCenterlineIsHalfWidth) {
  const auto spec = straight_corridor();
  const DistanceField f = build_field(spec);
  const double d = f.min_distance(Vec3(3.0, 0.875, -1.0));
  EXPECT_NEAR(d, 0.875, f.resolution());
}

TEST(DistanceField, WallAndOutsideReturnZero) {
  const DistanceField f = build_field(straight_corridor());
  // Centre of a wall voxel just outside the corridor.
  EXPECT_EQ(f.min_distance(f.voxel_center(2, 1, 10)), 0.0);
  EXPECT_EQ(f.min_distance(Vec3(100, 0, 0)), 0.0);
  EXPECT_EQ(f.min_distance(Vec3(3, 0.875, 50)), 0.0);
}

TEST(DistanceField, GradientSymmetricAcrossCorridor) {
  const DistanceField f = build_field(straight_corridor());
  EXPECT_NEAR(f.distance_gradient(Vec3(3.0, 0.875, -1.0)).y(), 0.0, 1e-9);
}

TEST(DistanceField, GradientNearSingleWall) {
  // Wide room; the nearest wall is the one at y = 0.
  HallwaySpec s;
  s.segments = {Box{Vec3(0, 0, -4), Vec3(8, 8, 0)}};
  s.start = StartPose{Vec3(4, 4, -2), 0.0, 1.0};
  s.goal = Vec3(5, 5, -2);
  const DistanceField f = build_field(s);
  const Vec3 g = f.distance_gradient(Vec3(4.0, 0.3, -2.0));
  EXPECT_GT(g.y(), 0.0);
  EXPECT_NEAR(g.norm(), 1.0, 0.05);
}

TEST(DistanceField, GradientNearEdgeThrows) {
  const DistanceField f = build_field(straight_corridor());
  EXPECT_THROW(f.distance_gradient(f.lower_corner()), BoundaryError);
}

TEST(DistanceField, GradientMatchesFiniteDifference) {
  const DistanceField f = build_field(l_corner_hallway());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(0.3, 5.7), y(0.3, 1.45), z(-2.2, -0.3);
  const double h = f.gradient_step();
  for (int n = 0; n < 100; ++n) {
    const Vec3 p(x(rng), y(rng), z(rng));
    const Vec3 g = f.distance_gradient(p);
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e(a) = h;
      EXPECT_NEAR(g(a), (f.min_distance(p + e) - f.min_distance(p - e)) / (2 * h), 1e-6);
    }
    // Voxel distances are 1-Lipschitz, so each axis slope of the interpolant is at most 1.
    EXPECT_LE(g.lpNorm<Eigen::Infinity>(), 1.0 + 1e-9);
  }
}

TEST(DistanceField, InterpolantGradientIsExactInsideCells) {
  const DistanceField f = build_field(l_corner_hallway());
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> x(0.3, 5.7), y(0.3, 1.45), z(-2.2, -0.3);
  for (int n = 0; n < 100; ++n) {
    const Vec3 p(x(rng), y(rng), z(rng));
    const Vec3 g = f.interpolant_gradient(p);
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e(a) = 1e-7;
      // Trilinear is linear along each axis within a cell; skip cell faces.
      const Vec3 u = (p - f.origin()) / f.resolution() - Vec3::Constant(0.5);
      if (std::abs(u(a) - std::round(u(a))) < 1e-5) continue;
      EXPECT_NEAR(g(a), (f.min_distance(p + e) - f.min_distance(p - e)) / 2e-7, 1e-5);
    }
  }
}

TEST(DistanceField, InterpolationContainment) {
  RandomGrid g(12, 0.08);
  const DistanceField f(g.origin, g.res, g.dims, g.occ, 100.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 19.0);
  for (int n = 0; n < 2000; ++n) {
    const Vec3 c(u(rng), u(rng), u(rng));
    const Vec3 p = g.origin + g.res * (c + Vec3::Constant(0.5));
    const int i = std::min(18, int(c.x())), j = std::min(18, int(c.y())), k = std::min(18, int(c.z()));
    double lo = 1e9, hi = -1e9;
    for (int q = 0; q < 8; ++q) {
      const double v = f.voxel_distance(i + (q & 1), j + ((q >> 1) & 1), k + ((q >> 2) & 1));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double d = f.min_distance(p);
    EXPECT_GE(d, lo - 1e-12);
    EXPECT_LE(d, hi + 1e-12);
  }
}

TEST(DistanceField, Conservative) {
  RandomGrid g(13, 0.01);
  const DistanceField f(g.origin, g.res, g.dims, g.occ, 100.0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.5, 19.5);
  int checked = 0;
  for (int n = 0; n < 3000; ++n) {
    const Vec3 p = g.origin + g.res * Vec3(u(rng), u(rng), u(rng));
    const double d = f.min_distance(p);
    const double r = d - g.res * std::sqrt(3.0);
    if (r <= 0.0) continue;
    ++checked;
    EXPECT_GE(brute_distance_to_cubes(g, p), r);
  }
  EXPECT_GT(checked, 100);
}

TEST(Hallway, CornerMapFileMatchesBuiltIn) {
  const HallwaySpec file = io::load_map(test::data_path("maps/l_corner.map"));
  const HallwaySpec built = l_corner_hallway();
  ASSERT_EQ(file.segments.size(), built.segments.size());
  for (std::size_t i = 0; i < file.segments.size(); ++i) {
    EXPECT_LT((file.segments[i].lo - built.segments[i].lo).norm(), 1e-12);
    EXPECT_LT((file.segments[i].hi - built.segments[i].hi).norm(), 1e-12);
  }
  EXPECT_LT((file.goal - built.goal).norm(), 1e-12);
  EXPECT_NEAR(file.width, 1.75, 1e-12);
}

TEST(Hallway, MapParserRejectsBadInput) {
  EXPECT_THROW(io::parse_map_string("format: poststall-map\nversion: 2\n"), ConfigError);
  EXPECT_THROW(io::parse_map_string("format: other\nversion: 1\n"), ConfigError);
  EXPECT_THROW(io::parse_map_string("format: poststall-map\nversion: 1\ncorridors: []\n"), ConfigError);
}

TEST(Hallway, DisconnectedSegmentsRejected) {
  HallwaySpec s = straight_corridor();
  s.segments.push_back(Box{Vec3(10, 0, -2), Vec3(12, 1.75, 0)});
  EXPECT_THROW(validate(s), ConfigError);
}

TEST(Hallway, FieldQueriesAreThreadSafe) {
  const DistanceField f = build_field(l_corner_hallway());
  std::vector<double> a(4), b(4);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      double acc = 0.0;
      for (int i = 0; i < 2000; ++i) acc += f.min_distance(Vec3(0.5 + 0.002 * i, 0.875, -1.0 - 0.1 * t));
      a[t] = acc;
    });
  for (auto& th : pool) th.join();
  for (int t = 0; t < 4; ++t) {
    double acc = 0.0;
    for (int i = 0; i < 2000; ++i) acc += f.min_distance(Vec3(0.5 + 0.002 * i, 0.875, -1.0 - 0.1 * t));
    b[t] = acc;
  }
  EXPECT_EQ(a, b);
}
