#pragma once

// Hallway map files (YAML) and distance-field slice export.

#include <poststall/environment/hallway.hpp>
#include <poststall/io/params_io.hpp>

#include <iomanip>
#include <ostream>

namespace poststall::io {

inline constexpr const char* kMapFormat = "poststall-map";
inline constexpr int kMapVersion = 1;

inline HallwaySpec parse_map(const YAML::Node& root) {
  using namespace detail;
  check_header(root, kMapFormat, kMapVersion);
  HallwaySpec s;
  s.name = root["name"] ? root["name"].as<std::string>() : "hallway";
  s.width = required<double>(root, "width");
  s.height = required<double>(root, "height");
  const YAML::Node cs = root["corridors"];
  if (!cs || !cs.IsSequence()) throw ConfigError("missing 'corridors' list");
  for (const auto& c : cs) s.segments.push_back(Box{read_vec3(c["min"], "corridor.min"), read_vec3(c["max"], "corridor.max")});
  const YAML::Node st = root["start"];
  if (!st) throw ConfigError("missing 'start' block");
  s.start.position = read_vec3(st["position"], "start.position");
  s.start.yaw = deg2rad(required<double>(st, "yaw_deg"));
  s.start.speed = required<double>(st, "speed");
  const YAML::Node g = root["goal"];
  if (!g) throw ConfigError("missing 'goal' block");
  s.goal = read_vec3(g["position"], "goal.position");
  s.goal_radius = required<double>(g, "radius");
  validate(s);
  if (!in_free_space(s, s.start.position)) throw ConfigError(s.name + ": start is not inside a corridor");
  if (!in_free_space(s, s.goal)) throw ConfigError(s.name + ": goal is not inside a corridor");
  return s;
}

inline HallwaySpec load_map(const std::string& path) { return parse_map(detail::load_yaml_file(path)); }

inline HallwaySpec parse_map_string(const std::string& text) {
  try {
    return parse_map(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.what());
  }
}

/// Horizontal slice of the field at the voxel layer nearest to world height z:
/// one CSV row per voxel (x, y, occupied, distance).
inline void write_field_slice_csv(std::ostream& os, const DistanceField& f, double z) {
  const int k = std::clamp(static_cast<int>(std::floor((z - f.origin().z()) / f.resolution())), 0, f.dims().z() - 1);
  os << "x,y,occupied,distance\n" << std::setprecision(10);
  for (int j = 0; j < f.dims().y(); ++j)
    for (int i = 0; i < f.dims().x(); ++i) {
      const Vec3 c = f.voxel_center(i, j, k);
      os << c.x() << ',' << c.y() << ',' << (f.occupied(i, j, k) ? 1 : 0) << ',' << f.voxel_distance(i, j, k) << '\n';
    }
}

}  // namespace poststall::io
