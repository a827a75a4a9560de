#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "geomcmp/errors.hpp"

namespace geomcmp::models {

/// Rotationally symmetric test manifolds with metric dr^2 + phi(r)^2 ds^2
/// on the (n-1)-sphere factor. Two shapes appear:
///
///   disk:   boundary at r = R, inner normal -d/dr, distance to the
///           boundary rho = R - r (valid while phi' > 0, which keeps radial
///           segments minimizing);
///   collar: boundary at t = 0, inner normal +d/dt, rho = t. The warp
///           phi(t) = e^{-t} is the cusp end with curvature -1 whose
///           boundary curvature sits exactly on the admissibility edge.
enum class ProfileKind { kDisk, kCollar };

/// Warp profile with two derivatives. Profiles come from closed forms
/// (exact derivatives, deriv_error = 0), from an ODE integration, or from
/// sampled data through a spline; the last two carry an estimate of the
/// error in the supplied derivatives, which diagnostics add to their
/// tolerances.
struct WarpProfile {
  ProfileKind kind = ProfileKind::kDisk;
  int n = 2;       // real dimension of the manifold
  double R = 1.0;  // outer radius (disk) or collar length
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> ddphi;
  double deriv_error = 0.0;
};

/// Constant-curvature disk phi = sn(k, r) of radius R.
/// Throws DomainError when R reaches the first zero of sn(k, .).
WarpProfile model_disk(int n, double k, double R);

/// Cusp collar phi(t) = e^{-t} on [0, length].
WarpProfile cusp_collar(int n, double length);

/// Wraps user-supplied closures; validates disk initial conditions
/// (phi(0) = 0, phi'(0) = 1 within 1e-12 / 1e-10) and positivity of phi.
WarpProfile analytic_profile(ProfileKind kind, int n, double R,
                             std::function<double(double)> phi,
                             std::function<double(double)> dphi,
                             std::function<double(double)> ddphi);

/// Random disk with radial Ricci curvature >= (n-1)k by construction:
/// integrates phi'' = -(k + q(r)) phi with a nonnegative random bump q.
/// amp scales the bump. Deterministic in the seed.
WarpProfile random_admissible_disk(int n, double k, double R,
                                   std::uint64_t seed, double amp);

/// Disk profile from a CSV file with header "r,phi", r strictly increasing
/// from 0, at least 100 rows. Derivatives come from a not-a-knot cubic
/// spline; deriv_error is estimated by refitting on every other sample.
/// Throws ConfigError on malformed input.
WarpProfile profile_from_csv(int n, const std::string& path);

/// Checks the profile invariants on a sample grid (disk initial
/// conditions, phi > 0 on (0, R]). Throws DomainError on violation.
void validate_profile(const WarpProfile& p);

/// Radial Ricci curvature Ric(d/dr, d/dr) = -(n-1) phi''(r) / phi(r).
/// Throws DomainError at r = 0 for disk profiles (phi vanishes there).
double ricci_radial(const WarpProfile& p, double r);

/// Mean curvature of the boundary with respect to the inner normal:
/// (n-1) phi'(R)/phi(R) for disks, -(n-1) phi'(0)/phi(0) for collars
/// (the orientation flip is the inner normal +d/dt at the t = 0 end).
double boundary_mean_curvature(const WarpProfile& p);

/// Laplacian of the distance-to-boundary function, as a function of the
/// profile coordinate: -(n-1) phi'(r)/phi(r) for disks (rho = R - r),
/// +(n-1) phi'(t)/phi(t) for collars (rho = t).
double laplacian_rho_profile(const WarpProfile& p, double r);

/// Radial trace of the Weitzenboeck identity for the distance from the
/// center: d/dr(Delta r) + |Hess r|^2 + Ric(d/dr, d/dr). The first term is
/// a central difference of (n-1) phi'/phi, the others use the supplied
/// derivatives, so the result measures internal consistency of the
/// profile's derivative data; it vanishes identically for exact data.
double bochner_residual(const WarpProfile& p, double r);

/// Geodesic disk of radius R in the complex model space of holomorphic
/// sectional curvature 4k; n is the complex dimension.
struct ComplexModelDisk {
  int n = 1;
  double k = 0.0;
  double R = 1.0;
};

/// Laplacian of the distance from the center at radius r, equal to the
/// model mean curvature ct(4k, r) + (2n-2) ct(k, r).
double kahler_model_laplacian(const ComplexModelDisk& d, double r);

/// Sharp distance bound computed from the profile's boundary data: the
/// boundary principal curvature ii = phi'/phi (orientation-corrected)
/// feeds the inverse cotangent bound. Throws InfimumNotAttained when
/// k < 0 and ii <= sqrt(-k): in that family the distance to the boundary
/// is unbounded (the cusp collar sits exactly at ii = sqrt(-k)).
double rho_max_for_profile(const WarpProfile& p, double k);

enum class RigidityVerdict { kRigid, kNonRigid, kInconsistent };

const char* to_string(RigidityVerdict v);

/// Output of the rigidity diagnostic. h is the sharp distance bound
/// derived from the boundary mean curvature (mean-curvature normalization
/// H >= H(h)); h_per_direction derives the same bound from the boundary
/// principal curvature instead, as a cross-check (the two coincide for
/// rotationally symmetric disks up to rounding).
struct RigidityReport {
  double k = 0.0;
  double h = 0.0;
  double h_per_direction = 0.0;
  double deficit = 0.0;     // h - R, nonnegative for admissible disks
  double metric_gap = 0.0;  // sup |phi - sn(k, .)| over [0, R]
  RigidityVerdict verdict = RigidityVerdict::kInconsistent;
};

/// Equality-case diagnostic for disks. deficit <= tol and metric_gap <= tol
/// classify the disk as the model (Rigid); deficit > tol is the strict
/// case (NonRigid); deficit <= tol with metric_gap > tol would contradict
/// the rigidity statement and is reported as Inconsistent. tol is widened
/// by the profile's derivative error estimate.
/// Throws HypothesisViolated when the sampled radial Ricci curvature drops
/// below (n-1)k - 1e-9, DomainError when phi' <= 0 somewhere on (0, R]
/// (the distance identification rho = R - r fails) or when the boundary
/// data admits no finite bound.
RigidityReport rigidity_diagnostic(const WarpProfile& p, double k,
                                   double tol);

}  // namespace geomcmp::models
