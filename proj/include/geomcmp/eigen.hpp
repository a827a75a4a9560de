#pragma once

#include <functional>
#include <vector>

#include "geomcmp/errors.hpp"
#include "geomcmp/models.hpp"
#include "geomcmp/report.hpp"

namespace geomcmp::eigen {

/// Radial reduction of the Dirichlet Laplacian eigenproblem on a
/// rotationally symmetric disk: -(w u')' = lambda w u on (0, R), u(R) = 0,
/// with the natural regularity condition at 0 (w u' -> 0). w is the radial
/// volume density; it vanishes like r^limit_exponent at the center, which
/// the solvers use to start the integration and to stagger the grid.
struct SturmLiouvilleProblem {
  std::function<double(double)> w;
  std::function<double(double)> logderiv;  // w'/w, the radial drift term
  double R = 1.0;
  double limit_exponent = 1.0;
};

/// Density of the complex model disk: w(r) = sn(4k, r) * sn(k, r)^(2n-2),
/// whose logarithmic derivative is the model mean curvature profile.
/// Requires R inside the domain of sn(4k, .).
SturmLiouvilleProblem weight_complex_model(int n, double k, double R);

/// Density of a warped-product disk: w(r) = phi(r)^(n-1).
SturmLiouvilleProblem weight_warped(const models::WarpProfile& p);

enum class EigenMethod { kFiniteDifference, kShooting };

/// First Dirichlet eigenvalue with a two-resolution refinement. lambda1 is
/// the Richardson-extrapolated value; errbar = |fine - coarse| bounds the
/// remaining discretization error conservatively (the schemes converge at
/// orders 2 and 4, so the true error is a fraction of the gap).
struct EigenResult {
  double lambda1 = 0.0;
  EigenMethod method = EigenMethod::kFiniteDifference;
  int grid = 0;               // base resolution (cells or steps)
  double coarse = 0.0;        // eigenvalue at the base resolution
  double fine = 0.0;          // eigenvalue at twice the resolution
  double errbar = 0.0;
  double rayleigh = 0.0;      // quotient of the computed eigenvector
  int nodal_sign_changes = 0; // interior sign changes of the eigenvector
  std::vector<double> r, u;   // eigenvector samples (fine resolution)
};

/// Finite-volume discretization on m cells with face-centered weights
/// (the staggering absorbs the singular drift at r = 0 without boundary
/// conditions there), Dirichlet at R through a ghost cell. The smallest
/// eigenvalue of the symmetric tridiagonal pencil comes from Sturm-sequence
/// bisection; the eigenvector from inverse iteration. Runs at m and 2m.
/// Throws GridTooCoarse when m < 64 or the refinement gap exceeds
/// 1e-4 * lambda1.
EigenResult solve_fd(const SturmLiouvilleProblem& prob, int m);

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

/// Locates the first eigenvalue by oscillation counting: bisects on the
/// predicate "u(.; lambda) has an interior zero or u(R) <= 0", which flips
/// exactly at lambda_1, and returns a small bracket around the flip.
Bracket find_first_eigen_bracket(const SturmLiouvilleProblem& prob);

/// Shooting method: integrates the radial equation from eps = 1e-6 R with
/// the regular-solution expansion as initial data, RK4 at step R/10^4, and
/// bisects lambda on the sign of u(R) inside the bracket; repeats at half
/// the step for the refinement. Throws BracketFailure when u(R) does not
/// change sign over the bracket.
EigenResult solve_shooting(const SturmLiouvilleProblem& prob, Bracket bracket);

/// Runs both solvers on the complex model disk of radius R for every R in
/// R_list (each R <= h required) and checks: method agreement within the
/// combined error bars, positivity and nodal purity of the eigenvector,
/// the Rayleigh-quotient identity, and the eigenvalue lower bound
/// (model_KH(h)/2)^2 reduced by the combined error bar. grid is the base
/// finite-volume resolution.
report::VerificationReport verify_eigen_bound(int n, double k, double h,
                                              const std::vector<double>& R_list,
                                              int grid = 2048);

}  // namespace geomcmp::eigen
