#pragma once

// Truth/controller parameter pairs for closed-loop runs.

#include <poststall/dynamics/params.hpp>

#include <random>
#include <string>

namespace poststall {

enum class MismatchKind { None, ReverseIdentification, Random, File };

inline const char* to_string(MismatchKind m) {
  switch (m) {
    case MismatchKind::None: return "none";
    case MismatchKind::ReverseIdentification: return "reverse-identification";
    case MismatchKind::Random: return "random";
    case MismatchKind::File: return "file";
  }
  return "?";
}

/// Undoes the identification corrections carried by the vehicle file: wing and
/// horizontal-fuselage areas halved, rudder area divided by 0.75. The file is
/// the truth; the result is what the controller believed before identification.
inline AircraftParams uncorrected_model(AircraftParams p) {
  scale_surface_area(p, "wing", 0.5);
  scale_surface_area(p, "fuselage_horizontal", 0.5);
  scale_surface_area(p, "rudder", 1.0 / 0.75);
  p.name += "-uncorrected";
  return p;
}

/// Every surface area scaled by an independent factor in [1 - area_frac, 1 + area_frac]
/// and the principal inertias by factors in [1 - inertia_frac, 1 + inertia_frac].
inline AircraftParams perturbed_model(AircraftParams p, std::uint64_t seed, double area_frac = 0.15,
                                      double inertia_frac = 0.10) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> area(1.0 - area_frac, 1.0 + area_frac);
  std::uniform_real_distribution<double> inertia(1.0 - inertia_frac, 1.0 + inertia_frac);
  for (auto& s : p.surfaces) s.area *= area(rng);
  const Vec3 scale(inertia(rng), inertia(rng), inertia(rng));
  // Symmetric scaling D J D keeps the tensor symmetric positive definite.
  const Mat3 D = scale.cwiseSqrt().asDiagonal();
  p.inertia = D * p.inertia * D;
  p.name += "-perturbed";
  return p;
}

}  // namespace poststall
