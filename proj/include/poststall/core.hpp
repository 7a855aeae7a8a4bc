#pragma once

// Shared vocabulary types, dimensions and the error hierarchy.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace poststall {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

inline constexpr int kStateDim = 17;
inline constexpr int kInputDim = 5;
// TVLQR acts on [aileron, elevator, rudder, throttle] with linked ailerons.
inline constexpr int kReducedInputDim = 4;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using InputVector = Eigen::Matrix<double, kInputDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using InputMatrix = Eigen::Matrix<double, kStateDim, kInputDim>;

/// Offsets of each block inside the canonical 17-entry flattening
/// [r, theta, delta, delta_t, v, omega].
namespace idx {
inline constexpr int r = 0;
inline constexpr int theta = 3;
inline constexpr int roll = 3;
inline constexpr int pitch = 4;
inline constexpr int yaw = 5;
inline constexpr int delta = 6;
inline constexpr int aileron_right = 6;
inline constexpr int aileron_left = 7;
inline constexpr int elevator = 8;
inline constexpr int rudder = 9;
inline constexpr int delta_t = 10;
inline constexpr int v = 11;
inline constexpr int omega = 14;

// input vector u_cs = [w_ar, w_al, w_e, w_r, u_t]
inline constexpr int u_throttle = 4;
}  // namespace idx

/// Column names used by every CSV writer.
inline constexpr std::array<const char*, kStateDim> kStateNames = {
    "x", "y", "z", "roll", "pitch", "yaw", "d_ar", "d_al", "d_e", "d_r", "thrust", "u", "v", "w", "p", "q", "r"};
inline constexpr std::array<const char*, kInputDim> kInputNames = {"w_ar", "w_al", "w_e", "w_r", "u_t"};

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define POSTSTALL_DEFINE_ERROR(Name)             \
  class Name : public Error {                    \
   public:                                       \
    using Error::Error;                          \
  }

POSTSTALL_DEFINE_ERROR(GimbalLock);
POSTSTALL_DEFINE_ERROR(NegativeThrust);
POSTSTALL_DEFINE_ERROR(DegenerateVelocity);
POSTSTALL_DEFINE_ERROR(EmptyWorld);
POSTSTALL_DEFINE_ERROR(BoundaryError);
POSTSTALL_DEFINE_ERROR(PlanTimeout);
POSTSTALL_DEFINE_ERROR(CornerTooTight);
POSTSTALL_DEFINE_ERROR(DomainError);
POSTSTALL_DEFINE_ERROR(VelocityUnderflow);
POSTSTALL_DEFINE_ERROR(RiccatiBlowup);
POSTSTALL_DEFINE_ERROR(TrimInfeasible);
POSTSTALL_DEFINE_ERROR(ConfigError);

#undef POSTSTALL_DEFINE_ERROR

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  w -= std::numbers::pi;
  // fmod maps +pi onto -pi; keep the half-open interval closed at +pi.
  return (w == -std::numbers::pi) ? std::numbers::pi : w;
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

}  // namespace poststall
