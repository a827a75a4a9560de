#include <Eigen/Dense>
#include <cmath>
#include <cstddef>

#include "doctest.h"
#include "geomcmp/bounds.hpp"
#include "geomcmp/errors.hpp"
#include "geomcmp/jacobi.hpp"
#include "geomcmp/modelfn.hpp"

namespace gj = geomcmp::jacobi;
namespace mf = geomcmp::modelfn;
using Eigen::MatrixXd;

// The constant-curvature trajectories have closed forms through the
// generalized trig kernels: with S = ct(k, h) I every direction carries
// A_ii(s) = sn(k, h - s) / sn(k, h), so the Laplacian is -m ct(k, h - s)
// and the focal time is exactly h. These serve as the independent route
// against the matrix RK4 engine throughout this file.

namespace {

std::size_t index_at(const gj::JacobiTrajectory& t, double s) {
  return static_cast<std::size_t>(std::llround(s / t.step));
}

}  // namespace

TEST_CASE("model trajectory reproduces the closed form") {
  const auto field = gj::model_field(2, -1.0, gj::Flavor::kReal);
  const auto S = gj::model_shape_real(2, -1.0, 1.5);
  const auto traj = gj::integrate(field, S, 1.0, 1e-3);

  CHECK(!traj.focal_s.has_value());
  CHECK(traj.safe_sample_count() == traj.s.size());

  for (double s : {0.25, 0.5, 0.9}) {
    const std::size_t i = index_at(traj, s);
    const double want = -2.0 * mf::ct(-1.0, 1.5 - s);
    CHECK(std::fabs(traj.laplacian(i) - want) < 1e-8);
    const MatrixXd& H = traj.hessian(i);
    CHECK(std::fabs(H(0, 1)) < 1e-12);
    CHECK(std::fabs(H(0, 0) - H(1, 1)) < 1e-12);
  }
}

TEST_CASE("focal time matches the inverse cotangent bound") {
  // Per-direction boundary curvature h: S = h I focalizes at arccot(k, h).
  struct Probe {
    double k, h;
  };
  for (const Probe& p : {Probe{-1.0, 1.2}, Probe{0.0, 0.7}, Probe{1.0, 0.0},
                         Probe{1.0, 1.5}}) {
    const double rho = geomcmp::bounds::rho_max_real(3, p.k, p.h);
    const auto field = gj::model_field(2, p.k, gj::Flavor::kReal);
    const MatrixXd S = p.h * MatrixXd::Identity(2, 2);
    const auto focal = gj::first_focal(field, S, 1.3 * rho, 1e-3);
    REQUIRE(focal.has_value());
    CHECK(std::fabs(*focal - rho) < 1e-6 * rho);
  }
}

TEST_CASE("even-multiplicity focal touch is detected") {
  // Isotropic data: both directions vanish together at s = 2, so det A
  // touches zero quadratically without a sign change.
  const auto field = gj::model_field(2, 0.0, gj::Flavor::kReal);
  const MatrixXd S = 0.5 * MatrixXd::Identity(2, 2);
  const auto focal = gj::first_focal(field, S, 3.0, 1e-3);
  REQUIRE(focal.has_value());
  CHECK(std::fabs(*focal - 2.0) < 1e-6 * 2.0);

  // Kahler model: Hopf and pair directions all vanish at s = h.
  const auto kfield = gj::model_field(3, 1.0, gj::Flavor::kKahler);
  const auto kS = gj::model_shape_kahler(2, 1.0, 0.5);
  const auto kfocal = gj::first_focal(kfield, kS, 1.0, 1e-3);
  REQUIRE(kfocal.has_value());
  CHECK(std::fabs(*kfocal - 0.5) < 1e-6 * 0.5);
}

TEST_CASE("Hessian values are refused near the focal time") {
  const auto field = gj::model_field(2, 1.0, gj::Flavor::kReal);
  const auto S = gj::model_shape_real(2, 1.0, 0.3);
  const auto traj = gj::integrate(field, S, 1.0, 1e-3);

  REQUIRE(traj.focal_s.has_value());
  CHECK(std::fabs(*traj.focal_s - 0.3) < 1e-6);
  CHECK(traj.safe_sample_count() < traj.s.size());

  const std::size_t i = index_at(traj, 0.1);
  CHECK(std::fabs(traj.laplacian(i) + 2.0 * mf::ct(1.0, 0.2)) < 1e-7);
  CHECK_THROWS_AS((void)traj.hessian(traj.safe_sample_count()),
                  geomcmp::FocalPointInRange);
  CHECK_THROWS_AS((void)traj.laplacian(traj.s.size() - 1),
                  geomcmp::FocalPointInRange);
}

TEST_CASE("random admissible data stays admissible") {
  const auto field =
      gj::random_admissible_field(3, -1.0, gj::Flavor::kReal, 42, 1.5, 0.7);
  const MatrixXd R = field.model_matrix();
  for (double s : {0.0, 0.4, 1.1, 1.5}) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(field.at(s) - R,
                                               Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }

  const auto S = gj::random_shape_real(3, -1.0, 1.2, 9, 0.5);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= mf::ct(-1.0, 1.2) - 1e-12);

  const auto Sk = gj::random_shape_kahler(2, -1.0, 1.0, 9, 0.5);
  CHECK(Sk(2, 2) >= mf::ct(-4.0, 1.0) - 1e-12);
  CHECK(Sk(0, 0) + Sk(1, 1) >= 2.0 * mf::ct(-1.0, 1.0) - 1e-12);

  const auto St = gj::random_shape_real_trace(3, -1.0, 1.2, 9, 0.5);
  CHECK(St.trace() >= 3.0 * mf::ct(-1.0, 1.2) - 1e-12);
}

TEST_CASE("field construction is deterministic in the seed") {
  const auto f1 =
      gj::random_admissible_field(3, -1.0, gj::Flavor::kReal, 7, 1.0, 0.6);
  const auto f2 =
      gj::random_admissible_field(3, -1.0, gj::Flavor::kReal, 7, 1.0, 0.6);
  const auto f3 =
      gj::random_admissible_field(3, -1.0, gj::Flavor::kReal, 8, 1.0, 0.6);
  CHECK((f1.at(0.7) - f2.at(0.7)).norm() == 0.0);
  CHECK((f1.at(0.7) - f3.at(0.7)).norm() > 0.0);

  const auto S = gj::random_shape_real(3, -1.0, 1.2, 7, 0.5);
  const auto t1 = gj::integrate(f1, S, 1.0, 1e-3);
  const auto t2 = gj::integrate(f2, S, 1.0, 1e-3);
  CHECK(t1.laplacian(200) == t2.laplacian(200));
  CHECK(t1.focal_s == t2.focal_s);
}

TEST_CASE("Riccati residual of an integrated trajectory") {
  // d/ds Hess + Hess^2 + K = 0 along the geodesic; a central difference of
  // the stored Hessians must satisfy it to discretization accuracy.
  const auto field =
      gj::random_admissible_field(3, -1.0, gj::Flavor::kReal, 11, 1.0, 0.5);
  const auto S = gj::random_shape_real(3, -1.0, 1.5, 12, 0.3);
  const auto traj = gj::integrate(field, S, 1.0, 1e-3);

  const std::size_t i = index_at(traj, 0.5);
  // The residual is limited by the second-difference error h^2/6 U''',
  // and U''' carries two derivatives of the rough curvature field.
  const MatrixXd dU =
      (traj.hessian(i + 1) - traj.hessian(i - 1)) / (2.0 * traj.step);
  const MatrixXd res = dU + traj.hessian(i) * traj.hessian(i) + field.at(0.5);
  CHECK(res.norm() < 1e-4);
}

TEST_CASE("integration rejects bad inputs") {
  gj::CurvatureField asym;
  asym.m = 2;
  asym.k = 0.0;
  asym.eval = [](double, MatrixXd& K) {
    K.setZero(2, 2);
    K(0, 1) = 0.1;
    K(1, 0) = -0.1;
  };
  CHECK_THROWS_AS((void)gj::integrate(asym, MatrixXd::Zero(2, 2), 1.0, 1e-2),
                  geomcmp::NonSymmetricField);

  const auto field = gj::model_field(2, 0.0, gj::Flavor::kReal);
  MatrixXd S_asym = MatrixXd::Zero(2, 2);
  S_asym(0, 1) = 0.2;
  CHECK_THROWS_AS((void)gj::integrate(field, S_asym, 1.0, 1e-2),
                  geomcmp::NonSymmetricField);

  CHECK_THROWS_AS(
      (void)gj::integrate(field, MatrixXd::Zero(3, 3), 1.0, 1e-2),
      geomcmp::DomainError);
  CHECK_THROWS_AS(
      (void)gj::integrate(field, MatrixXd::Zero(2, 2), -1.0, 1e-2),
      geomcmp::DomainError);
}

TEST_CASE("coarse steps on a stiff field are refused") {
  gj::CurvatureField stiff;
  stiff.m = 1;
  stiff.k = 0.0;
  stiff.eval = [](double s, MatrixXd& K) {
    K.resize(1, 1);
    K(0, 0) = 50.0 * (1.0 + std::sin(8.0 * s));
  };
  CHECK_THROWS_AS((void)gj::integrate(stiff, MatrixXd::Zero(1, 1), 1.0, 0.05),
                  geomcmp::StepTooCoarse);
  CHECK_NOTHROW((void)gj::integrate(stiff, MatrixXd::Zero(1, 1), 1.0, 2e-4));
}

TEST_CASE("index form closed-form values") {
  // V(s) = s against K = 0, II = 1 at the far end: integral 1, boundary 1.
  const auto linear = gj::custom_profile([](double s) { return s; },
                                         [](double) { return 1.0; });
  const auto zeroK = [](double) { return 0.0; };
  const auto r = gj::index_form(linear, zeroK, 1.0, 1.0,
                                gj::Orientation::kBoundaryAtEnd);
  CHECK(std::fabs(r.value) < 1e-12);

  // Hopf test profile at k = 0: f(s) = (h - s)/(h - ell), boundary at the
  // start with II = ct(0, h); the closed-form value is -ct(0, h - ell).
  const double h = 1.0, ell = 0.5;
  const auto f = gj::f_profile(0.0, h, ell);
  const auto rf = gj::index_form(f, zeroK, mf::ct(0.0, h), ell,
                                 gj::Orientation::kBoundaryAtStart);
  CHECK(rf.value == doctest::Approx(-2.0).epsilon(1e-9));

  // Each J-pair direction contributes the same value; the pair total is
  // twice that.
  const auto g = gj::g_profile(0.0, h, ell);
  const auto rg = gj::index_form(g, zeroK, mf::ct(0.0, h), ell,
                                 gj::Orientation::kBoundaryAtStart);
  CHECK(2.0 * rg.value == doctest::Approx(-4.0).epsilon(1e-9));

  // Jacobi profile vanishing at 0: I(sn) = ct(k, ell) without a boundary
  // term at the start.
  const auto j = gj::sn_profile(-1.0, 0.8);
  const auto rj = gj::index_form(
      j, [](double) { return -1.0; }, 0.0, 0.8,
      gj::Orientation::kBoundaryAtStart);
  CHECK(rj.value == doctest::Approx(mf::ct(-1.0, 0.8)).epsilon(1e-9));
}

TEST_CASE("unresolved quadrature is refused") {
  const auto wiggly = gj::custom_profile(
      [](double s) { return std::sin(40.0 * s); },
      [](double s) { return 40.0 * std::cos(40.0 * s); });
  CHECK_THROWS_AS(
      (void)gj::index_form(wiggly, [](double) { return 0.0; }, 0.0, 1.0,
                           gj::Orientation::kBoundaryAtEnd, 0.2),
      geomcmp::QuadratureUnresolved);
}

TEST_CASE("real comparison verifier") {
  gj::VerifyOptions opt;
  opt.trials = 6;
  opt.seed = 3;
  opt.s_grid = 16;
  opt.step = 2e-3;
  opt.roughness = 0.5;

  const auto rep = gj::verify_real_comparison(3, 0.0, 1.0, opt);
  CHECK(rep.pass);
  CHECK_FALSE(rep.hypothesis_violated);
  CHECK(rep.trials.size() == 6);
  CHECK(rep.trials[0].model);
  CHECK(rep.max_margin <= opt.tol);

  bool has_equality = false;
  for (const auto& row : rep.rows) {
    if (row.check == "laplacian_equality") has_equality = true;
  }
  CHECK(has_equality);

  // Same options, same report: margins must agree bitwise.
  const auto rep2 = gj::verify_real_comparison(3, 0.0, 1.0, opt);
  CHECK(rep.max_margin == rep2.max_margin);
  CHECK(rep.rows.size() == rep2.rows.size());

  // Hypersurface case m = 1 and the trace-admissible variant.
  opt.trials = 4;
  CHECK(gj::verify_real_comparison(2, -1.0, 1.5, opt).pass);
  opt.trace_shape = true;
  CHECK(gj::verify_real_comparison(4, -1.0, 1.2, opt).pass);

  CHECK_THROWS_AS((void)gj::verify_real_comparison(1, 0.0, 1.0, opt),
                  geomcmp::DomainError);
}

TEST_CASE("negative control violates the hypothesis, not the bound") {
  gj::VerifyOptions opt;
  opt.trials = 3;
  opt.seed = 5;
  opt.step = 2e-3;
  opt.negative_control = true;

  const auto rep = gj::verify_real_comparison(3, 0.0, 1.0, opt);
  CHECK(rep.hypothesis_violated);
  CHECK(rep.pass);
  for (const auto& t : rep.trials) CHECK_FALSE(t.hypothesis_ok);
}

TEST_CASE("Kahler comparison verifier") {
  gj::VerifyOptions opt;
  opt.trials = 5;
  opt.seed = 2;
  opt.s_grid = 16;
  opt.step = 2e-3;
  opt.roughness = 0.5;

  const auto rep = gj::verify_kahler_comparison(2, -1.0, 1.0, opt);
  CHECK(rep.pass);
  CHECK_FALSE(rep.hypothesis_violated);

  bool has_hopf = false, has_pair = false, has_lap = false;
  for (const auto& row : rep.rows) {
    has_hopf = has_hopf || row.check == "hopf";
    has_pair = has_pair || row.check == "pair0";
    has_lap = has_lap || row.check == "laplacian";
  }
  CHECK(has_hopf);
  CHECK(has_pair);
  CHECK(has_lap);

  // Complex curves (n = 1) have only the Hopf direction.
  CHECK(gj::verify_kahler_comparison(1, 1.0, 0.6, opt).pass);
}

TEST_CASE("cusp control run") {
  const auto rep = gj::verify_cusp(3, 20.0, 1e-3, 1e-9);
  CHECK(rep.pass);
  CHECK(rep.max_margin <= 1e-9);
  REQUIRE(!rep.trials.empty());
  CHECK_FALSE(rep.trials[0].focal_s.has_value());
}

TEST_CASE("index minimality of the adapted Jacobi field") {
  const auto field =
      gj::random_admissible_field(2, -1.0, gj::Flavor::kReal, 5, 1.0, 0.4);
  const auto S = gj::random_shape_real(2, -1.0, 1.2, 7, 0.3);
  const auto rep = gj::verify_basic_inequality(field, S, 0.8, 5, 9, 1e-8);
  CHECK(rep.pass);
  CHECK(rep.trials.size() == 5);

  // ell past the focal time has no minimizer to compare against.
  const auto pos = gj::model_field(2, 1.0, gj::Flavor::kReal);
  const auto Spos = gj::model_shape_real(2, 1.0, 0.3);
  CHECK_THROWS_AS((void)gj::verify_basic_inequality(pos, Spos, 0.5, 3, 1, 1e-8),
                  geomcmp::FocalPointInRange);
}
