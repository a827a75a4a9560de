#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "geomcmp/errors.hpp"
#include "geomcmp/report.hpp"

// Matrix Jacobi/Riccati engine along a unit-speed geodesic leaving the
// boundary at s = 0. The fundamental solution A(s) of
//
//     A'' + K(s) A = 0,   A(0) = I,   A'(0) = -S,
//
// carries the boundary-adapted Jacobi fields in a parallel frame; the
// distance function has Hessian A'(s) A(s)^-1 and Laplacian its trace, valid
// up to the first focal time det A = 0. S is the second fundamental form of
// the boundary with respect to the inner normal.

namespace geomcmp::jacobi {

enum class Flavor { kReal, kKahler };

/// Symmetric m x m curvature matrix field s -> K(s). Kahler flavor uses
/// m = 2n-1 with index m-1 the Hopf direction (the parallel transport of
/// J nu) and (0,1), (2,3), ... the J-invariant pairs; its model matrix is
/// diag(k, ..., k, 4k). Real flavor has model k*I.
///
/// eval writes into a caller-held matrix and is not required to be
/// thread-safe; use one field instance per thread.
struct CurvatureField {
  int m = 1;
  Flavor flavor = Flavor::kReal;
  double k = 0.0;
  std::function<void(double, Eigen::MatrixXd&)> eval;

  [[nodiscard]] Eigen::MatrixXd at(double s) const;
  /// Reference matrix of the comparison hypothesis: admissible fields keep
  /// K(s) - model_matrix() positive semidefinite (floor -1e-12).
  [[nodiscard]] Eigen::MatrixXd model_matrix() const;
};

using ShapeOperator = Eigen::MatrixXd;

/// Constant model field K(s) = model matrix.
[[nodiscard]] CurvatureField model_field(int m, double k, Flavor flavor);

/// Random admissible field K(s) = R_model + Q(s)^T D(s) Q(s): D(s) is a
/// nonnegative diagonal built from at most five low-frequency cosine modes
/// scaled by `roughness`, Q(s) a smooth rotation path (product of Givens
/// rotations with slowly varying angles). roughness = 0 reproduces the model
/// field. Deterministic for a given seed.
[[nodiscard]] CurvatureField random_admissible_field(int m, double k,
                                                     Flavor flavor,
                                                     std::uint64_t seed,
                                                     double s_max,
                                                     double roughness);

/// Negative control: the model field with every eigenvalue lowered by a
/// smooth bump of depth 1 on (a, b), violating the admissibility floor
/// there while keeping the field regular enough to integrate cleanly.
[[nodiscard]] CurvatureField inadmissible_field(int m, double k, Flavor flavor,
                                                double a, double b);

/// Shape operator of the model sphere of radius h: ct(k, h) * I.
[[nodiscard]] ShapeOperator model_shape_real(int m, double k, double h);

/// Kahler model shape operator: ct(k, h) on the J-pairs, ct(4k, h) on the
/// Hopf direction (complex dimension n, m = 2n-1).
[[nodiscard]] ShapeOperator model_shape_kahler(int n, double k, double h);

/// Model shape plus a random positive semidefinite perturbation, so the
/// per-direction (real) resp. Hopf/pair-sum (Kahler) admissibility margins
/// stay nonnegative.
[[nodiscard]] ShapeOperator random_shape_real(int m, double k, double h,
                                              std::uint64_t seed,
                                              double roughness);
[[nodiscard]] ShapeOperator random_shape_kahler(int n, double k, double h,
                                                std::uint64_t seed,
                                                double roughness);

/// Random symmetric shape operator constrained only through its trace,
/// trace(S) >= (n-1) * ct(k, h); individual directions may dip below the
/// model value.
[[nodiscard]] ShapeOperator random_shape_real_trace(int m, double k, double h,
                                                    std::uint64_t seed,
                                                    double roughness);

class JacobiTrajectory {
 public:
  int m = 1;
  double step = 0.0;                  // effective step (s_max / steps)
  std::vector<double> s;              // sample abscissae, s[0] = 0
  std::vector<Eigen::MatrixXd> A;     // A(s_i)
  std::vector<Eigen::MatrixXd> Ap;    // A'(s_i)
  std::vector<double> det;            // det A(s_i)
  std::optional<double> focal_s;      // first zero of det A, refined

  /// Number of leading samples on which Hessian values are served: all of
  /// them without a focal point, otherwise those with s <= focal_s - 10*step
  /// (closer to the focal time A^-1 amplifies discretization error beyond
  /// usefulness).
  [[nodiscard]] std::size_t safe_sample_count() const;

  /// Hessian A'(s_i) A(s_i)^-1 of the distance function, cached per sample.
  /// @throws FocalPointInRange for samples past safe_sample_count().
  [[nodiscard]] const Eigen::MatrixXd& hessian(std::size_t i) const;

  /// Trace of hessian(i).
  [[nodiscard]] double laplacian(std::size_t i) const;

 private:
  friend JacobiTrajectory integrate(const CurvatureField&,
                                    const ShapeOperator&, double, double);
  mutable std::vector<Eigen::MatrixXd> hess_cache_;
  mutable std::vector<char> hess_ready_;
};

/// Fixed-step RK4 integration of (A, A')' = (A', -K(s) A) with every sample
/// retained. det A is evaluated per sample by LU with full pivoting; the
/// first sign change is refined by bisection (local re-integration) and an
/// even-multiplicity touch of zero, which isotropic fields produce, is
/// caught by a smallest-singular-value dip detector.
///
/// A Richardson acceptance pass at half the step compares the Laplacian at
/// s_max (or at focal_s - 10*step when a focal point exists, or the focal
/// estimates themselves when that point is unusable).
///
/// @throws NonSymmetricField when a K sample (or S) has asymmetry > 1e-12.
/// @throws StepTooCoarse when the Richardson comparison moves by > 1e-6.
[[nodiscard]] JacobiTrajectory integrate(const CurvatureField& field,
                                         const ShapeOperator& S, double s_max,
                                         double step);

/// First focal time in (0, s_limit], if any.
[[nodiscard]] std::optional<double> first_focal(const CurvatureField& field,
                                                const ShapeOperator& S,
                                                double s_limit, double step);

// ---------------------------------------------------------------------------
// Scalar index form.

enum class ProfileKind { kSn, kF, kG, kCustom };

struct ScalarProfile {
  ProfileKind kind = ProfileKind::kCustom;
  std::function<double(double)> value;
  std::function<double(double)> deriv;
};

/// sn(k, s) / sn(k, ell): the Jacobi profile vanishing at 0, one at ell.
[[nodiscard]] ScalarProfile sn_profile(double k, double ell);

/// sn(4k, h - s) / sn(4k, h - ell): the Hopf-direction test profile, one at
/// ell; its index form against K = 4k and II = ct(4k, h) is -ct(4k, h-ell).
[[nodiscard]] ScalarProfile f_profile(double k, double h, double ell);

/// sn(k, h - s) / sn(k, h - ell): the J-pair test profile; one pair
/// contributes twice its index form -ct(k, h-ell).
[[nodiscard]] ScalarProfile g_profile(double k, double h, double ell);

[[nodiscard]] ScalarProfile custom_profile(std::function<double(double)> value,
                                           std::function<double(double)> deriv);

enum class Orientation {
  kBoundaryAtStart,  // I(V) = -II*V(0)^2 + integral_0^ell (V'^2 - K V^2)
  kBoundaryAtEnd,    // I(V) = integral_0^ell (V'^2 - K V^2) - II*V(ell)^2
};

struct IndexFormResult {
  double value = 0.0;
  ProfileKind kind = ProfileKind::kCustom;
  int intervals = 0;  // Simpson intervals of the accepted evaluation
};

/// Index form of a scalar profile against a scalar curvature K(s) and a
/// boundary term II at the end selected by `orient`. Composite Simpson at
/// roughly the given step, accepted only if doubling the interval count
/// moves the value by <= 1e-7.
/// @throws QuadratureUnresolved otherwise.
[[nodiscard]] IndexFormResult index_form(const ScalarProfile& profile,
                                         const std::function<double(double)>& K,
                                         double II_val, double ell,
                                         Orientation orient, double step = 1e-3);

// ---------------------------------------------------------------------------
// Verification drivers.

struct VerifyOptions {
  int trials = 100;
  std::uint64_t seed = 1;
  int s_grid = 64;       // number of checkpoint abscissae
  double step = 1e-3;
  double tol = 1e-8;     // margin tolerance for the comparison inequalities
  double roughness = 0.7;
  bool trace_shape = false;      // real flavor: admit S through its trace only
  bool negative_control = false; // draw inadmissible fields instead
};

/// Runs `trials` Jacobi integrations (trial 0 is always the zero-perturbation
/// model) against admissible random data and checks the Laplacian comparison
/// Delta rho(s) <= -model_H(n, k, h - s) at every checkpoint before the
/// focal time. The model trial must meet the bound with equality within
/// 1e-9. h is the model-radius normalization.
[[nodiscard]] report::VerificationReport verify_real_comparison(
    int n, double k, double h, const VerifyOptions& opt);

/// Kahler counterpart (complex dimension n, m = 2n-1): checks the
/// Hopf-direction and pair-sum Hessian bounds and the Laplacian bound
/// -model_KH(n, k, h - s) per checkpoint.
[[nodiscard]] report::VerificationReport verify_kahler_comparison(
    int n, double k, double h, const VerifyOptions& opt);

/// Integrates the constant field K = -I with S = I (real dimension n) to
/// s_max and checks that no focal point appears and that the Laplacian stays
/// -(n-1) within tol; the distance function of this profile is unbounded, so
/// this is the sharpness control for the k < 0 distance bounds.
[[nodiscard]] report::VerificationReport verify_cusp(int n, double s_max,
                                                     double step, double tol);

/// Checks minimality of the boundary-adapted Jacobi field for the index
/// form: for random piecewise-cubic V with V(ell) = J(ell), I(V) >= I(J) -
/// tol, strictly when V != J; also cross-checks I(J) computed by quadrature
/// against the boundary identity <A'(ell) A(ell)^-1 v, v>.
/// @throws FocalPointInRange when ell reaches the focal time.
[[nodiscard]] report::VerificationReport verify_basic_inequality(
    const CurvatureField& field, const ShapeOperator& S, double ell,
    int trials, std::uint64_t seed, double tol);

}  // namespace geomcmp::jacobi
