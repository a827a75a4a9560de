#include <cmath>

#include "doctest.h"
#include "geomcmp/bounds.hpp"
#include "geomcmp/errors.hpp"
#include "geomcmp/modelfn.hpp"

namespace gb = geomcmp::bounds;
namespace mf = geomcmp::modelfn;

namespace {

// Closed-form anchors, frozen from the defining formulas:
//   rho_max(k=0)   = 1/h
//   rho_max(k=-1)  = atanh(1/h)
//   2 coth(1)      = 2.6260705709986624
constexpr double kAtanhHalf = 0.5493061443340548;
constexpr double kTwoCoth1 = 2.6260705709986624;

}  // namespace

TEST_CASE("distance bound, real flavor") {
  CHECK(gb::rho_max_real(3, 0.0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(gb::rho_max_real(2, -1.0, 2.0) ==
        doctest::Approx(kAtanhHalf).epsilon(1e-14));
  // Positive curvature places no restriction on h; the bound passes through
  // pi/(2 sqrt(k)) at h = 0 and stays below pi/sqrt(k).
  CHECK(gb::rho_max_real(3, 1.0, 0.0) ==
        doctest::Approx(M_PI / 2.0).epsilon(1e-14));
  CHECK(gb::rho_max_real(3, 1.0, -1.0) ==
        doctest::Approx(3.0 * M_PI / 4.0).epsilon(1e-14));

  // Strictly decreasing in h; also decreasing in k at fixed h (stronger
  // curvature focalizes sooner).
  CHECK(gb::rho_max_real(2, 0.0, 2.0) < gb::rho_max_real(2, 0.0, 1.0));
  CHECK(gb::rho_max_real(2, 0.0, 2.0) < gb::rho_max_real(2, -1.0, 2.0));
  CHECK(gb::rho_max_real(2, 1.0, 2.0) < gb::rho_max_real(2, 0.0, 2.0));

  CHECK_THROWS_AS((void)gb::rho_max_real(3, -1.0, 1.0), geomcmp::DomainError);
  CHECK_THROWS_AS((void)gb::rho_max_real(3, -1.0, 0.2), geomcmp::DomainError);
  CHECK_THROWS_AS((void)gb::rho_max_real(2, 0.0, 0.0), geomcmp::DomainError);
  CHECK_THROWS_AS((void)gb::rho_max_real(2, 0.0, -1.0), geomcmp::DomainError);
}

TEST_CASE("normalization conversions round-trip") {
  const gb::RealBoundarySpec per{3, -1.0, 2.0, gb::Normalization::kPerDirection};
  const gb::RealBoundarySpec rad = gb::to_model_radius(per);
  CHECK(rad.norm == gb::Normalization::kModelRadius);
  CHECK(rad.value == doctest::Approx(kAtanhHalf).epsilon(1e-14));
  const gb::RealBoundarySpec back = gb::to_per_direction(rad);
  CHECK(back.norm == gb::Normalization::kPerDirection);
  CHECK(back.value == doctest::Approx(2.0).epsilon(1e-12));

  // Identity on specs already in the target normalization.
  CHECK(gb::to_model_radius(rad).value == rad.value);
  CHECK(gb::to_per_direction(per).value == per.value);
}

TEST_CASE("model mean curvature profiles") {
  CHECK(gb::model_H(3, 0.0, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gb::model_H(2, -1.0, 1.0) ==
        doctest::Approx(kTwoCoth1 / 2.0).epsilon(1e-14));

  // Flat complex model: KH(n, 0, r) = (2n-1)/r.
  CHECK(gb::model_KH(2, 0.0, 0.5) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(gb::model_KH(1, 1.0, M_PI / 8.0) ==
        doctest::Approx(2.0).epsilon(1e-13));
  // Pole at r = 0: the profile blows up like (2n-1)/r.
  CHECK(gb::model_KH(2, 1.0, 1e-6) > 1e5);
  // k < 0: decreasing to the unattained infimum 2n sqrt(-k); at r = 20 the
  // excess is below double resolution.
  CHECK(gb::model_KH(2, -1.0, 5.0) > 4.0);
  CHECK(gb::model_KH(2, -1.0, 20.0) >= 4.0);
  CHECK(gb::model_KH(2, -1.0, 20.0) < 4.0 + 1e-6);
  CHECK(gb::model_KH(2, -1.0, 0.5) > gb::model_KH(2, -1.0, 1.0));
}

TEST_CASE("Laplacian comparison values") {
  CHECK(gb::laplace_bound_real(3, -1.0, 2.0, 1.0) ==
        doctest::Approx(-kTwoCoth1).epsilon(1e-14));
  CHECK(gb::laplace_bound_real(2, 0.0, 1.0, 0.5) ==
        doctest::Approx(-2.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)gb::laplace_bound_real(3, 0.0, 1.0, 1.0),
                  geomcmp::DomainError);
  CHECK_THROWS_AS((void)gb::laplace_bound_real(3, 0.0, 1.0, -0.1),
                  geomcmp::DomainError);

  const auto kb = gb::laplace_bound_kahler(2, -1.0, 1.5, 0.6);
  CHECK(kb.at_rho <= kb.at_boundary);
  CHECK(kb.at_boundary == doctest::Approx(-gb::model_KH(2, -1.0, 1.5)));
  CHECK(kb.at_rho == doctest::Approx(-gb::model_KH(2, -1.0, 0.9)));
}

TEST_CASE("Kahler Hessian bounds and their trace identity") {
  const auto hb = gb::hessian_bounds_kahler(1, 1.0, M_PI / 4.0, 0.0);
  CHECK(std::fabs(hb.hopf) < 1e-14);
  CHECK(hb.pair_sum == doctest::Approx(-2.0).epsilon(1e-14));

  for (double rho : {0.0, 0.3, 0.8}) {
    const auto b = gb::hessian_bounds_kahler(3, -1.0, 1.2, rho);
    const auto l = gb::laplace_bound_kahler(3, -1.0, 1.2, rho);
    CHECK(b.hopf + 2.0 * b.pair_sum == doctest::Approx(l.at_rho).epsilon(1e-13));
  }
}

TEST_CASE("KH inversion") {
  for (double k : {-1.0, 0.0, 1.0}) {
    for (double r : {0.2, 0.5, 1.0}) {
      const double Hb = gb::model_KH(2, k, r);
      const double h = gb::invert_KH(2, k, Hb);
      CHECK(std::fabs(gb::model_KH(2, k, h) - Hb) <=
            1e-9 * std::max(1.0, std::fabs(Hb)));
      CHECK(h == doctest::Approx(r).epsilon(1e-9));
    }
  }
  // k > 0 admits every real Hb, negative ones land past the equator.
  const double h_neg = gb::invert_KH(1, 1.0, -5.0);
  CHECK(std::fabs(gb::model_KH(1, 1.0, h_neg) + 5.0) <= 5e-9);

  // k <= 0: the infimum 2n sqrt(-k) (resp. 0) is never attained.
  CHECK_THROWS_AS((void)gb::invert_KH(2, -1.0, 4.0),
                  geomcmp::InfimumNotAttained);
  CHECK_THROWS_AS((void)gb::invert_KH(2, -1.0, 3.5),
                  geomcmp::InfimumNotAttained);
  CHECK_THROWS_AS((void)gb::invert_KH(2, 0.0, 0.0),
                  geomcmp::InfimumNotAttained);
  CHECK_THROWS_AS((void)gb::invert_KH(2, 0.0, -1.0),
                  geomcmp::InfimumNotAttained);

  CHECK(gb::rho_max_kahler(2, 0.0, 6.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("first-eigenvalue lower bound") {
  CHECK(gb::eigen_lower_bound(2, 0.0, 1.0) ==
        doctest::Approx(2.25).epsilon(1e-14));
  CHECK(std::fabs(gb::eigen_lower_bound(1, 1.0, M_PI / 4.0)) < 1e-13);
  // Past the equator the model mean curvature is negative and the square
  // formula no longer bounds anything.
  CHECK_THROWS_AS((void)gb::eigen_lower_bound(1, 1.0, 1.0),
                  geomcmp::DomainError);
}
