#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "kinetic/collision.hpp"
#include "kinetic/error.hpp"
#include "kinetic/stats.hpp"

using namespace kinetic;

TEST_CASE("diag sample is deterministic") {
  const auto m = CollisionModel::diag(2, 0.5, CLaw::constant(1.0));
  RandomStream rng(7, 0);
  const auto s = m.sample(rng);
  CHECK(s.n == 2);
  CHECK(s.c == 1.0);
  REQUIRE(s.weights.size() == 2);
  CHECK(s.weights[0] == 0.5);
  CHECK(s.weights[1] == 0.5);
}

TEST_CASE("kac weights lie on the unit circle") {
  const auto m = CollisionModel::kac(CLaw::constant(0.0));
  RandomStream rng(3, 1);
  for (int i = 0; i < 1000; ++i) {
    const auto s = m.sample(rng);
    REQUIRE(s.n == 2);
    CHECK(s.weights[0] > 0.0);
    CHECK(s.weights[0] < 1.0);
    CHECK(s.weights[1] > 0.0);
    CHECK(s.weights[1] < 1.0);
    CHECK(s.weights[0] * s.weights[0] + s.weights[1] * s.weights[1] ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("poisson plus one has mean offspring 1 + lambda") {
  const auto m = CollisionModel::poisson_plus_one(1.5, 0.1, 0.9, CLaw::constant(1.0));
  CHECK(m.mean_offspring() == doctest::Approx(2.5));
  RandomStream rng(11, 0);
  RunningStats st;
  for (int i = 0; i < 200000; ++i) {
    const auto s = m.sample(rng);
    st.add(static_cast<double>(s.n));
    for (double w : s.weights) {
      CHECK_MESSAGE((w >= 0.1 && w <= 0.9), "weight out of range");
    }
  }
  CHECK(std::abs(st.mean() - 2.5) <= 4.0 * st.standard_error());
}

TEST_CASE("closed-form phi values") {
  CHECK(*CollisionModel::diag(2, 0.5, CLaw::constant(1.0)).phi(1.0) == doctest::Approx(0.0));
  CHECK(*CollisionModel::diag(2, 0.9, CLaw::constant(1.0)).phi(1.0) == doctest::Approx(0.8));
  CHECK(*CollisionModel::diag(2, 0.25, CLaw::constant(1.0)).phi(0.5) == doctest::Approx(0.0));
  const auto kac = CollisionModel::kac(CLaw::constant(1.0));
  CHECK(*kac.phi(2.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*kac.phi(1.0) == doctest::Approx(4.0 / std::numbers::pi - 1.0));
  const auto pp = CollisionModel::poisson_plus_one(1.5, 0.1, 0.9, CLaw::constant(1.0));
  CHECK(*pp.phi(0.0) == doctest::Approx(pp.mean_offspring() - 1.0));
  CHECK_THROWS_AS(pp.phi(-1.0), Error);
}

TEST_CASE("phi derivative matches finite differences") {
  const auto m = CollisionModel::diag(2, 0.5, CLaw::constant(1.0));
  CHECK(*m.phi_derivative(1.0) == doctest::Approx(-std::log(2.0)));
  const auto pp = CollisionModel::poisson_plus_one(0.5, 0.2, 0.8, CLaw::constant(1.0));
  const double h = 1e-5;
  const double fd = (*pp.phi(1.5 + h) - *pp.phi(1.5 - h)) / (2 * h);
  CHECK(*pp.phi_derivative(1.5) == doctest::Approx(fd).epsilon(1e-6));
  CHECK_FALSE(CollisionModel::kac(CLaw::constant(1.0)).phi_derivative(1.5).has_value());
}

TEST_CASE("validation") {
  CHECK(validate_model(CollisionModel::diag(2, 0.9, CLaw::constant(1.0))).accepted);
  CHECK_FALSE(validate_model(CollisionModel::diag(2, 1.0, CLaw::constant(1.0))).accepted);
  CHECK_FALSE(validate_model(CollisionModel::diag(1, 0.5, CLaw::constant(1.0))).accepted);
  CHECK_THROWS_AS(require_valid(CollisionModel::diag(1, 0.5, CLaw::constant(1.0))), Error);
  CHECK(validate_model(CollisionModel::kac(CLaw::gaussian(1.0))).accepted);
}

TEST_CASE("wealth rows carry their own shifts") {
  WealthBlock b;
  b.probability = 1.0;
  b.shifts = {1.0, -1.0};
  b.matrix = {{0.3, 0.4}, {0.5, 0.2}};
  const auto m = CollisionModel::wealth({b});
  RandomStream rng(5, 0);
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto s = m.sample(rng);
    REQUIRE(s.n == 2);
    if (s.c == 1.0) {
      ++first;
      CHECK(s.weights[0] == 0.3);
    } else {
      CHECK(s.c == -1.0);
      CHECK(s.weights[1] == 0.2);
    }
  }
  const double p = static_cast<double>(first) / n;
  CHECK(std::abs(p - 0.5) < 4.0 * std::sqrt(0.25 / n));
  CHECK(m.c_mean() == doctest::Approx(0.0));
  CHECK(*m.phi(1.0) == doctest::Approx(0.5 * 0.7 + 0.5 * 0.7 - 1.0));
}

TEST_CASE("c law moments") {
  CHECK(CLaw::centered_exponential(2.0).mean() == doctest::Approx(0.0));
  CHECK(CLaw::centered_exponential(2.0).second_moment() == doctest::Approx(4.0));
  CHECK(CLaw::gaussian(3.0).second_moment() == doctest::Approx(9.0));
  CHECK(CLaw::two_point(1.5).abs_moment(1.3) == doctest::Approx(std::pow(1.5, 1.3)));
  CHECK(CLaw::gaussian(1.0).abs_moment(1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
}
