#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "kinetic/error.hpp"
#include "kinetic/spectral.hpp"

using namespace kinetic;

namespace {
CollisionModel diag(double a) { return CollisionModel::diag(2, a, CLaw::constant(1.0)); }
}  // namespace

TEST_CASE("phi estimate on a deterministic model has zero spread") {
  RandomStream rng(1, 0, StreamTag::kEstimate);
  const auto e = phi_estimate(diag(0.9), 1.0, 1000, rng);
  CHECK(e.value == doctest::Approx(0.8));
  CHECK(e.standard_error == doctest::Approx(0.0));
}

TEST_CASE("phi estimate for kac at s=1") {
  RandomStream rng(2, 0, StreamTag::kEstimate);
  const auto e = phi_estimate(CollisionModel::kac(CLaw::constant(1.0)), 1.0, 200000, rng);
  CHECK(std::abs(e.value - (4.0 / std::numbers::pi - 1.0)) <= 4.0 * e.standard_error);
  CHECK_FALSE(e.heavy_tail);
}

TEST_CASE("mu and its derivative") {
  const auto p = SpectralProfile::closed_form(diag(0.5));
  CHECK(p.mu(1.0) == doctest::Approx(0.0));
  CHECK(p.mu_prime(1.0) == doctest::Approx(-std::log(2.0)));
  CHECK(p.lambda(1.0) == doctest::Approx(0.0));
  CHECK(p.phi_se(1.0) == 0.0);
}

TEST_CASE("zeros and gamma star") {
  const auto quarter = SpectralProfile::closed_form(diag(0.25));
  REQUIRE(quarter.phi_zero(0.1, 2.0).has_value());
  CHECK(*quarter.phi_zero(0.1, 2.0) == doctest::Approx(0.5).epsilon(1e-9));
  const auto half = SpectralProfile::closed_form(diag(0.5));
  CHECK(*half.phi_zero(0.5, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
  const auto nine = SpectralProfile::closed_form(diag(0.9));
  CHECK_FALSE(nine.phi_zero(0.1, 5.0).has_value());
  CHECK(nine.mu_prime(2.0) < 0.0);
}

TEST_CASE("regime labels") {
  CHECK(classify_regime(SpectralProfile::closed_form(diag(0.9))).label == Regime::kA);
  CHECK(classify_regime(SpectralProfile::closed_form(diag(0.5))).label == Regime::kB);
  const auto e = CollisionModel::diag(2, 0.9, CLaw::two_point(1.0));
  CHECK(classify_regime(SpectralProfile::closed_form(e)).label == Regime::kE);
  const auto r1 = classify_regime(SpectralProfile::closed_form(diag(0.9)));
  const auto r2 = classify_regime(SpectralProfile::closed_form(diag(0.9)));
  CHECK(r1.phi1 == r2.phi1);
  CHECK(r1.label == r2.label);
}

TEST_CASE("phi is convex on the probed range") {
  const auto closed = SpectralProfile::closed_form(CollisionModel::kac(CLaw::constant(1.0)));
  const auto est = SpectralProfile::estimated(
      CollisionModel::poisson_plus_one(0.5, 0.2, 0.8, CLaw::constant(1.0)), 20000, 9);
  for (const auto* p : {&closed, &est}) {
    for (double s1 = 0.25; s1 < 3.0; s1 += 0.25) {
      const double s2 = s1 + 0.75;
      const double mid = p->phi(0.5 * (s1 + s2));
      const double chord = 0.5 * (p->phi(s1) + p->phi(s2));
      const double se = p->phi_se(s1) + p->phi_se(s2) + p->phi_se(0.5 * (s1 + s2));
      CHECK(mid <= chord + 4.0 * se + 1e-12);
    }
  }
}

TEST_CASE("estimated profile agrees with the closed form") {
  const auto model = CollisionModel::poisson_plus_one(0.5, 0.2, 0.8, CLaw::constant(1.0));
  const auto est = SpectralProfile::estimated(model, 50000, 4);
  CHECK_FALSE(est.is_closed_form());
  for (double s : {0.5, 1.0, 2.0}) {
    CHECK(std::abs(est.phi(s) - *model.phi(s)) <= 4.0 * est.phi_se(s));
  }
}
