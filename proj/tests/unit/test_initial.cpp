#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <numbers>

#include "kinetic/error.hpp"
#include "kinetic/initial.hpp"
#include "kinetic/stats.hpp"

using namespace kinetic;

TEST_CASE("point and gaussian samples") {
  RandomStream rng(1, 0, StreamTag::kMarks);
  const auto pt = InitialCondition::point(0.0);
  for (int i = 0; i < 100; ++i) CHECK(pt.sample(rng) == 0.0);
  const auto g = InitialCondition::gaussian(1.0);
  RunningStats st;
  for (int i = 0; i < 1000000; ++i) {
    const double x = g.sample(rng);
    st.add(x * x);
  }
  CHECK(std::abs(st.mean() - 1.0) <= 4.0 * st.standard_error());
}

TEST_CASE("pareto2 tail constant") {
  const auto ic = InitialCondition::pareto2(0.5, 1.0, 1.0, false);
  RandomStream rng(2, 0, StreamTag::kMarks);
  const int n = 4000000;
  int over3 = 0;
  int over4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::abs(ic.sample(rng));
    over3 += x > 1e3;
    over4 += x > 1e4;
  }
  CHECK(std::sqrt(1e3) * over3 / n == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::sqrt(1e4) * over4 / n == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("centered pareto2 has mean zero") {
  const auto ic = InitialCondition::pareto2(1.5, 1.0, 0.5, true);
  RandomStream rng(3, 0, StreamTag::kMarks);
  RunningStats st;
  for (int i = 0; i < 1000000; ++i) st.add(ic.sample(rng));
  CHECK(std::abs(st.mean()) <= 4.0 * st.standard_error());
  CHECK_THROWS_AS(InitialCondition::pareto2(1.5, 1.0, 1.0, false), Error);
}

TEST_CASE("closed-form characteristic functions") {
  const cplx i(0.0, 1.0);
  CHECK(std::abs(InitialCondition::point(0.7).cf(2.0) - std::exp(i * 1.4)) < 1e-15);
  CHECK(std::abs(InitialCondition::gaussian(2.0).cf(0.5) - std::exp(-0.5)) < 1e-15);
  const auto c = InitialCondition::cauchy(0.3, 0.5);
  CHECK(std::abs(c.cf(2.0) - std::exp(i * 0.6 - std::numbers::pi)) < 1e-15);
  CHECK_THROWS_AS(InitialCondition::pareto2(0.5, 1.0, 1.0, false).cf(1.0), Error);
}

TEST_CASE("cauchy scale is pi c0") {
  const auto ic = InitialCondition::cauchy(0.0, 1.0);
  RandomStream rng(4, 0, StreamTag::kMarks);
  const int n = 1000000;
  const double x = 200.0;
  int over = 0;
  for (int k = 0; k < n; ++k) over += ic.sample(rng) > x;
  CHECK(x * over / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("limit CF table") {
  const cplx i(0.0, 1.0);
  HConstants h2;
  h2.label = HLabel::kH2;
  h2.gamma = 2.0;
  h2.sigma0 = 1.0;
  CHECK(std::abs(LimitCF(h2)(1.0) - std::exp(-0.5)) < 1e-15);

  HConstants h1a;
  h1a.label = HLabel::kH1a;
  h1a.gamma = 1.0;
  h1a.m0 = 3.0;
  CHECK(std::abs(LimitCF(h1a)(2.0) - std::exp(6.0 * i)) < 1e-14);

  const auto half = InitialCondition::pareto2(0.5, 1.0, 1.0, false).limit_cf();
  CHECK(half.b0() == doctest::Approx(0.0));
  CHECK(half.k0() == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)));
  CHECK(std::abs(half(1.0) - std::exp(-std::sqrt(2.0 * std::numbers::pi))) < 1e-14);

  HConstants bad = h2;
  bad.gamma = 2.5;
  CHECK_THROWS_AS(LimitCF{bad}, Error);
}

TEST_CASE("CF evaluators are hermitian and bounded") {
  const auto skew = InitialCondition::pareto2(0.7, 1.0, 0.3, false).limit_cf();
  const auto cauchy = InitialCondition::cauchy(1.0, 0.5);
  for (double xi = -5.0; xi <= 5.0; xi += 0.25) {
    for (const auto& f : {std::function<cplx(double)>(skew),
                          std::function<cplx(double)>([&](double x) { return cauchy.cf(x); })}) {
      CHECK(std::abs(f(xi)) <= 1.0 + 1e-15);
      CHECK(std::abs(f(-xi) - std::conj(f(xi))) < 1e-14);
    }
  }
  CHECK(skew(0.0) == cplx(1.0, 0.0));
}

TEST_CASE("pareto2 empirical CF near zero") {
  const double gamma = 0.6;
  const auto ic = InitialCondition::pareto2(gamma, 1.0, 1.0, false);
  RandomStream rng(5, 0, StreamTag::kMarks);
  std::vector<double> xs(1000000);
  for (auto& x : xs) x = ic.sample(rng);
  auto gap = [&](double xi) {
    cplx s = 0.0;
    for (double x : xs) s += std::exp(cplx(0.0, xi * x));
    return std::abs(1.0 - s / static_cast<double>(xs.size()));
  };
  const double k = 1.5 * gap(0.01) / std::pow(0.01, gamma);
  for (double xi : {0.02, 0.05, 0.1}) CHECK(gap(xi) <= k * std::pow(xi, gamma));
}
