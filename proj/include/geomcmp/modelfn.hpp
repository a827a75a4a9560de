#pragma once

#include <cmath>
#include <limits>

#include "geomcmp/errors.hpp"

// Generalized trigonometric kernels for constant-curvature comparison
// geometry. All four functions are parametrized by the curvature constant k
// and reduce to the circular (k > 0), linear (k = 0) and hyperbolic (k < 0)
// families.

namespace geomcmp::modelfn {

/// Below this value of |k|*t^2 the closed forms lose digits to cancellation
/// and a truncated series is used instead. The first omitted series term is
/// O((|k|t^2)^4) ~ 1e-24, far below double roundoff.
inline constexpr double kSeriesThreshold = 1e-6;

/**
 * @brief First positive zero of sn(k, .): pi/sqrt(k) for k > 0, +infinity
 *        otherwise. Upper end of the domain of ct(k, .).
 */
[[nodiscard]] inline double sn_first_zero(double k) noexcept {
  if (k > 0.0) return M_PI / std::sqrt(k);
  return std::numeric_limits<double>::infinity();
}

/**
 * @brief Generalized sine sn(k, t): the solution of
 *        phi'' + k*phi = 0,  phi(0) = 0,  phi'(0) = 1.
 *
 * Closed forms: sin(sqrt(k)t)/sqrt(k) for k > 0, t for k = 0,
 * sinh(sqrt(-k)t)/sqrt(-k) for k < 0. Total on R^2; may overflow to +inf for
 * very large sqrt(-k)*t.
 */
[[nodiscard]] inline double sn(double k, double t) noexcept {
  const double z = k * t * t;
  if (std::fabs(z) < kSeriesThreshold) {
    return t * (1.0 - z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0)));
  }
  if (k > 0.0) {
    const double r = std::sqrt(k);
    return std::sin(r * t) / r;
  }
  const double r = std::sqrt(-k);
  return std::sinh(r * t) / r;
}

/**
 * @brief Generalized cosine cs(k, t) = d/dt sn(k, t): the solution of
 *        phi'' + k*phi = 0,  phi(0) = 1,  phi'(0) = 0.
 *
 * Satisfies cs^2 + k*sn^2 = 1 identically.
 */
[[nodiscard]] inline double cs(double k, double t) noexcept {
  const double z = k * t * t;
  if (std::fabs(z) < kSeriesThreshold) {
    return 1.0 - z / 2.0 * (1.0 - z / 12.0 * (1.0 - z / 30.0));
  }
  if (k > 0.0) return std::cos(std::sqrt(k) * t);
  return std::cosh(std::sqrt(-k) * t);
}

/**
 * @brief Generalized cotangent ct(k, t) = cs(k, t) / sn(k, t).
 *
 * Strictly decreasing on its domain (0, sn_first_zero(k)); tends to +inf at
 * 0 and to -inf (k > 0) or sqrt(-k) (k < 0) at the right end.
 *
 * @throws DomainError outside (0, sn_first_zero(k)).
 */
[[nodiscard]] inline double ct(double k, double t) {
  if (!(t > 0.0) || !(t < sn_first_zero(k))) {
    throw DomainError(
        "ct(k, t) requires 0 < t < pi/sqrt(k) (t > 0 when k <= 0)");
  }
  return cs(k, t) / sn(k, t);
}

/**
 * @brief Inverse of ct(k, .) on (0, sn_first_zero(k)).
 *
 * Branches: (1/sqrt(-k))*atanh(sqrt(-k)/h) for k < 0 (requires h >
 * sqrt(-k)), 1/h for k = 0 (requires h > 0), and for k > 0 the unique
 * preimage in (0, pi/sqrt(k)), which exists for every real h.
 *
 * @throws DomainError when h is outside the range of ct(k, .).
 */
[[nodiscard]] inline double arccot(double k, double h) {
  if (k > 0.0) {
    const double r = std::sqrt(k);
    return std::atan2(1.0, h / r) / r;
  }
  if (k == 0.0) {
    if (!(h > 0.0)) {
      throw DomainError("arccot(0, h) requires a mean curvature bound h > 0");
    }
    return 1.0 / h;
  }
  const double r = std::sqrt(-k);
  if (!(h > r)) {
    throw DomainError(
        "arccot(k, h) requires h > sqrt(-k) when k < 0; the bound is not "
        "attained at or below sqrt(-k)");
  }
  return std::atanh(r / h) / r;
}

}  // namespace geomcmp::modelfn
