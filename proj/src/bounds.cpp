#include "geomcmp/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "geomcmp/modelfn.hpp"

namespace geomcmp::bounds {

namespace {

void require_dimension(int n, int least, const char* what) {
  if (n < least) throw DomainError(what);
}

void require_radius_window(double k4, double h, double rho) {
  // Shared precondition of the comparison values: 0 <= rho < h and h inside
  // the domain of the relevant cotangent.
  if (!(h > 0.0) || !(h < modelfn::sn_first_zero(k4))) {
    throw DomainError("support radius h must satisfy 0 < h < pi/sqrt(k_dir)");
  }
  if (!(rho >= 0.0) || !(rho < h)) {
    throw DomainError("distance rho must satisfy 0 <= rho < h");
  }
}

}  // namespace

RealBoundarySpec to_model_radius(const RealBoundarySpec& spec) {
  if (spec.norm == Normalization::kModelRadius) return spec;
  RealBoundarySpec out = spec;
  out.value = modelfn::arccot(spec.k, spec.value);
  out.norm = Normalization::kModelRadius;
  return out;
}

RealBoundarySpec to_per_direction(const RealBoundarySpec& spec) {
  if (spec.norm == Normalization::kPerDirection) return spec;
  RealBoundarySpec out = spec;
  out.value = modelfn::ct(spec.k, spec.value);
  out.norm = Normalization::kPerDirection;
  return out;
}

double rho_max_real(int n, double k, double h) {
  require_dimension(n, 2, "rho_max_real requires real dimension n >= 2");
  return modelfn::arccot(k, h);
}

double model_H(int n, double k, double r) {
  require_dimension(n, 2, "model_H requires real dimension n >= 2");
  return static_cast<double>(n - 1) * modelfn::ct(k, r);
}

double model_KH(int n, double k, double r) {
  require_dimension(n, 1, "model_KH requires complex dimension n >= 1");
  return modelfn::ct(4.0 * k, r) +
         static_cast<double>(2 * n - 2) * modelfn::ct(k, r);
}

double laplace_bound_real(int n, double k, double h, double rho) {
  require_dimension(n, 2, "laplace_bound_real requires n >= 2");
  require_radius_window(k, h, rho);
  return -model_H(n, k, h - rho);
}

KahlerLaplaceBound laplace_bound_kahler(int n, double k, double h,
                                        double rho) {
  require_dimension(n, 1, "laplace_bound_kahler requires n >= 1");
  require_radius_window(4.0 * k, h, rho);
  return {-model_KH(n, k, h - rho), -model_KH(n, k, h)};
}

KahlerHessianBounds hessian_bounds_kahler(int n, double k, double h,
                                          double rho) {
  require_dimension(n, 1, "hessian_bounds_kahler requires n >= 1");
  require_radius_window(4.0 * k, h, rho);
  const double d = h - rho;
  return {-modelfn::ct(4.0 * k, d), -2.0 * modelfn::ct(k, d)};
}

double invert_KH(int n, double k, double Hb) {
  require_dimension(n, 1, "invert_KH requires complex dimension n >= 1");
  const double tol = 1e-10 * std::max(1.0, std::fabs(Hb));

  // Left endpoint: model_KH -> +inf as r -> 0+, so shrink until above Hb.
  double lo = 1e-3;
  const double top = modelfn::sn_first_zero(4.0 * k);
  if (std::isfinite(top)) lo = std::min(lo, 0.25 * top);
  while (model_KH(n, k, lo) <= Hb) {
    lo *= 0.5;
    if (lo < 1e-300) {
      throw DomainError("invert_KH: target exceeds every finite value");
    }
  }

  // Right endpoint: walk until model_KH drops below Hb. For k <= 0 the
  // function decreases to the infimum 2n*sqrt(-k); targets at or below it
  // (or with preimage beyond 1e6) have no usable preimage.
  double hi;
  if (k > 0.0) {
    double gap = 0.25 * top;
    hi = top - gap;
    while (model_KH(n, k, hi) >= Hb) {
      gap *= 0.5;
      hi = top - gap;
    }
  } else {
    const double infimum = 2.0 * n * std::sqrt(-k);
    if (!(Hb > infimum)) {
      throw InfimumNotAttained(
          "invert_KH: the model mean curvature only approaches 2n*sqrt(-k); "
          "a bound at or below that infimum has no finite radius");
    }
    hi = std::max(1.0, 2.0 * lo);
    while (model_KH(n, k, hi) >= Hb) {
      hi *= 2.0;
      if (hi > 1e6) {
        throw InfimumNotAttained(
            "invert_KH: preimage exceeds 1e6; the target is numerically "
            "indistinguishable from the unattained infimum");
      }
    }
  }

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    mid = 0.5 * (lo + hi);
    const double val = model_KH(n, k, mid);
    if (std::fabs(val - Hb) <= tol) return mid;
    if (val > Hb) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

double rho_max_kahler(int n, double k, double Hb) {
  return invert_KH(n, k, Hb);
}

double eigen_lower_bound(int n, double k, double h) {
  const double kh = model_KH(n, k, h);
  if (!(kh >= 0.0)) {
    throw DomainError(
        "eigen_lower_bound requires a nonnegative model mean curvature at h");
  }
  return 0.25 * kh * kh;
}

}  // namespace geomcmp::bounds
