#pragma once

// Per-interval dynamics defects. `f` is any callable f(x, u) -> x_dot over
// fixed-size Eigen vectors, so test dynamics and the aircraft share one code path.

#include <poststall/core.hpp>

namespace poststall {

enum class Transcription { HermiteSimpson, Euler };

inline const char* to_string(Transcription m) { return m == Transcription::HermiteSimpson ? "hs" : "euler"; }

inline Transcription parse_transcription(const std::string& s) {
  if (s == "hs" || s == "hermite-simpson") return Transcription::HermiteSimpson;
  if (s == "euler") return Transcription::Euler;
  throw ConfigError("unknown transcription '" + s + "' (expected hs or euler)");
}

/// Hermite interpolant at the interval midpoint:
/// x_c = (x_k + x_k1) / 2 + h (f_k - f_k1) / 8.
template <typename X>
X hermite_midpoint(const X& xk, const X& xk1, const X& fk, const X& fk1, double h) {
  return 0.5 * (xk + xk1) + (h / 8.0) * (fk - fk1);
}

/// x_k - x_k1 + (h/6)(f_k + 4 f_c + f_k1), zero when Simpson quadrature of the
/// Hermite interpolant reproduces the step.
template <typename F, typename X, typename U>
X hermite_simpson_defect(const F& f, const X& xk, const U& uk, const X& xk1, const U& uk1, double h) {
  if (!(h > 0.0)) throw DomainError("time step must be positive");
  const X fk = f(xk, uk);
  const X fk1 = f(xk1, uk1);
  const X xc = hermite_midpoint(xk, xk1, fk, fk1, h);
  const U uc = 0.5 * (uk + uk1);
  const X fc = f(xc, uc);
  return xk - xk1 + (h / 6.0) * (fk + 4.0 * fc + fk1);
}

/// x_k + h f(x_k, u_k) - x_k1.
template <typename F, typename X, typename U>
X euler_defect(const F& f, const X& xk, const U& uk, const X& xk1, double h) {
  if (!(h > 0.0)) throw DomainError("time step must be positive");
  return xk + h * f(xk, uk) - xk1;
}

}  // namespace poststall
