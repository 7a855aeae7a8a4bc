#pragma once

// Vehicle parameter files (YAML, versioned header, SI units).

#include <poststall/dynamics/params.hpp>

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <sstream>

namespace poststall::io {

inline constexpr const char* kVehicleFormat = "poststall-vehicle";
inline constexpr int kVehicleVersion = 1;

namespace detail {

inline Vec3 read_vec3(const YAML::Node& n, const std::string& what) {
  if (!n || !n.IsSequence() || n.size() != 3) throw ConfigError(what + ": expected a 3-element list");
  return Vec3(n[0].as<double>(), n[1].as<double>(), n[2].as<double>());
}

inline Mat3 read_mat3(const YAML::Node& n, const std::string& what) {
  if (!n || !n.IsSequence() || n.size() != 3) throw ConfigError(what + ": expected a 3x3 nested list");
  Mat3 m;
  for (int i = 0; i < 3; ++i) m.row(i) = read_vec3(n[i], what).transpose();
  return m;
}

/// z-y-x Euler angles in degrees giving the surface (or thrust) frame in body axes.
inline Mat3 frame_from_rpy_deg(const Vec3& rpy) {
  return euler_to_rotation(Vec3(deg2rad(rpy(0)), deg2rad(rpy(1)), deg2rad(rpy(2))));
}

template <typename T>
T required(const YAML::Node& n, const std::string& key) {
  if (!n[key]) throw ConfigError("missing key '" + key + "'");
  try {
    return n[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

inline const std::map<std::string, int>& actuator_names() {
  static const std::map<std::string, int> names{
      {"none", -1}, {"aileron_right", 0}, {"aileron_left", 1}, {"elevator", 2}, {"rudder", 3}};
  return names;
}

inline void check_header(const YAML::Node& root, const char* format, int version) {
  const auto f = required<std::string>(root, "format");
  const auto v = required<int>(root, "version");
  if (f != format) throw ConfigError("unexpected format '" + f + "', wanted '" + format + "'");
  if (v != version) throw ConfigError("unsupported " + f + " version " + std::to_string(v));
}

inline YAML::Node load_yaml_file(const std::string& path) {
  try {
    return YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot open '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace detail

inline AircraftParams parse_vehicle(const YAML::Node& root) {
  using namespace detail;
  check_header(root, kVehicleFormat, kVehicleVersion);
  AircraftParams p;
  p.name = root["name"] ? root["name"].as<std::string>() : "unnamed";
  p.mass = required<double>(root, "mass");
  p.inertia = read_mat3(root["inertia"], "inertia");
  p.rho = required<double>(root, "rho");
  p.gravity = required<double>(root, "gravity");

  const YAML::Node prop = root["propeller"];
  if (!prop) throw ConfigError("missing 'propeller' block");
  p.disk_area = required<double>(prop, "disk_area");
  p.thrust_a = required<double>(prop, "thrust_a");
  p.thrust_b = required<double>(prop, "thrust_b");
  p.prop_offset = read_vec3(prop["offset"], "propeller.offset");
  p.thrust_mount = frame_from_rpy_deg(read_vec3(prop["mount_rpy_deg"], "propeller.mount_rpy_deg"));

  const YAML::Node surfs = root["surfaces"];
  if (!surfs || !surfs.IsSequence()) throw ConfigError("missing 'surfaces' list");
  for (const auto& n : surfs) {
    AeroSurface s;
    s.name = required<std::string>(n, "name");
    s.area = required<double>(n, "area");
    s.mount_rotation = frame_from_rpy_deg(read_vec3(n["mount_rpy_deg"], s.name + ".mount_rpy_deg")).transpose();
    s.hinge_offset = read_vec3(n["hinge"], s.name + ".hinge");
    s.chord_offset = n["chord_offset"] ? n["chord_offset"].as<double>() : 0.0;
    s.backwash_gain = n["backwash_gain"] ? n["backwash_gain"].as<double>() : 0.0;
    const std::string act = n["actuator"] ? n["actuator"].as<std::string>() : "none";
    const auto it = actuator_names().find(act);
    if (it == actuator_names().end()) throw ConfigError(s.name + ": unknown actuator '" + act + "'");
    s.actuator = it->second;
    s.actuator_sign = n["actuator_sign"] ? n["actuator_sign"].as<double>() : 1.0;
    p.surfaces.push_back(s);
  }
  validate(p);
  return p;
}

inline AircraftParams load_vehicle(const std::string& path) {
  return parse_vehicle(detail::load_yaml_file(path));
}

inline AircraftParams parse_vehicle_string(const std::string& text) {
  try {
    return parse_vehicle(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace poststall::io
