#pragma once

#include <poststall/dynamics/state.hpp>
#include <poststall/io/params_io.hpp>

#include <string>

namespace poststall::test {

inline std::string data_path(const std::string& rel) { return std::string(POSTSTALL_DATA_DIR) + "/" + rel; }

inline const AircraftParams& edge540() {
  static const AircraftParams p = io::load_vehicle(data_path("edge540-24in.params"));
  return p;
}

/// Reference flight state used across suites: moderate speed, some rotation,
/// deflected surfaces and thrust so every term of the model is exercised.
inline AircraftState fixture_state() {
  AircraftState s;
  s.r = Vec3(1.0, 0.5, -1.2);
  s.theta = Vec3(0.1, 0.25, 0.3);
  s.delta = Vec4(0.1, -0.1, -0.2, 0.05);
  s.delta_t = 0.4;
  s.v = Vec3(5.0, 0.0, 1.0);
  s.omega = Vec3(0.2, -0.3, 0.4);
  return s;
}

inline ControlInput fixture_input() {
  ControlInput u;
  u.surface_rates = Vec4(0.5, -0.5, 0.3, -0.2);
  u.throttle = 0.5;
  return u;
}

}  // namespace poststall::test
