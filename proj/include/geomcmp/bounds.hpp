#pragma once

#include "geomcmp/errors.hpp"

// Sharp scalar bounds for manifolds with mean convex boundary: inradius
// bounds, model mean curvature profiles, Laplacian/Hessian comparison values
// and the first-eigenvalue lower bound, in both the real and the Kahler
// (complex space form) flavor.
//
// Two normalizations of the boundary hypothesis are in circulation and they
// are NOT interchangeable: a per-direction bound (II >= h * Id, mean
// curvature >= (n-1)h) and a model-radius bound (mean curvature >= H(h), the
// mean curvature of the model sphere of radius h). RealBoundarySpec carries
// an explicit tag so callers must pick one; the conversion helpers map
// between them.

namespace geomcmp::bounds {

enum class Normalization {
  kPerDirection,  // boundary value is the per-direction principal curvature
  kModelRadius,   // boundary value is the model sphere radius
};

struct RealBoundarySpec {
  int n = 2;      // real dimension, n >= 2
  double k = 0.0; // curvature lower bound constant
  double value = 0.0;
  Normalization norm = Normalization::kPerDirection;
};

/// Converts a spec to the model-radius normalization. Identity if already
/// there. The per-direction value h corresponds to the radius arccot(k, h).
[[nodiscard]] RealBoundarySpec to_model_radius(const RealBoundarySpec& spec);

/// Converts a spec to the per-direction normalization; the model radius r
/// corresponds to the principal curvature ct(k, r).
[[nodiscard]] RealBoundarySpec to_per_direction(const RealBoundarySpec& spec);

/// Sharp upper bound for the distance to the boundary when the boundary mean
/// curvature is at least (n-1)h and Ricci >= (n-1)k: arccot(k, h) with the
/// branch conventions of modelfn::arccot. For k <= 0 requires h > sqrt(-k)
/// (h > 0 when k = 0); any real h is legal for k > 0.
[[nodiscard]] double rho_max_real(int n, double k, double h);

/// Mean curvature of the geodesic sphere of radius r in the real model of
/// constant curvature k: (n-1) * ct(k, r). Domain r in (0, sn_first_zero(k)).
[[nodiscard]] double model_H(int n, double k, double r);

/// Mean curvature of the geodesic sphere of radius r in the complex model of
/// constant holomorphic sectional curvature 4k (complex dimension n):
/// ct(4k, r) + (2n-2) * ct(k, r). Strictly decreasing in r; for k < 0 it
/// decreases to the unattained infimum 2n*sqrt(-k) as r -> inf.
[[nodiscard]] double model_KH(int n, double k, double r);

/// Upper bound for the Laplacian of the distance-to-boundary function at
/// distance rho, for a boundary with mean curvature >= model_H(n, k, h):
/// -model_H(n, k, h - rho). Requires 0 <= rho < h < sn_first_zero(k).
[[nodiscard]] double laplace_bound_real(int n, double k, double h, double rho);

struct KahlerLaplaceBound {
  double at_rho;      // -model_KH(n, k, h - rho), sharp at distance rho
  double at_boundary; // -model_KH(n, k, h), the weaker constant bound
};

/// Kahler counterpart of laplace_bound_real; also reports the constant bound
/// valid at every distance. at_rho <= at_boundary always.
[[nodiscard]] KahlerLaplaceBound laplace_bound_kahler(int n, double k,
                                                      double h, double rho);

struct KahlerHessianBounds {
  double hopf;      // bound along the Hopf direction: -ct(4k, h - rho)
  double pair_sum;  // bound for each J-invariant pair: -2 * ct(k, h - rho)
};

/// Per-direction Hessian bounds for the distance function in the Kahler
/// flavor. hopf + (n-1) * pair_sum equals laplace_bound_kahler().at_rho.
[[nodiscard]] KahlerHessianBounds hessian_bounds_kahler(int n, double k,
                                                        double h, double rho);

/// Inverse of r -> model_KH(n, k, r) by bisection, resolved to
/// |model_KH(h) - Hb| <= 1e-10 * max(1, |Hb|). For k <= 0 the infimum
/// 2n*sqrt(-k) is never attained and Hb at or below it (or so close that the
/// preimage exceeds 1e6) raises InfimumNotAttained. Any real Hb is legal for
/// k > 0.
[[nodiscard]] double invert_KH(int n, double k, double Hb);

/// Sharp distance bound in the Kahler flavor for boundary mean curvature at
/// least Hb: the radius h with model_KH(n, k, h) = Hb.
[[nodiscard]] double rho_max_kahler(int n, double k, double Hb);

/// First Dirichlet eigenvalue lower bound (model_KH(n, k, h) / 2)^2.
/// Requires model_KH(n, k, h) >= 0.
[[nodiscard]] double eigen_lower_bound(int n, double k, double h);

}  // namespace geomcmp::bounds
