#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kinetic/error.hpp"
#include "kinetic/fourier.hpp"
#include "kinetic/initial.hpp"

using namespace kinetic;

namespace {
CollisionModel diag(double a, CLaw c = CLaw::constant(1.0)) {
  return CollisionModel::diag(2, a, c);
}
const cplx kI(0.0, 1.0);
}  // namespace

TEST_CASE("grid layout") {
  const CFGrid g(20.0, 2001);
  CHECK(g.center() == 1000);
  CHECK(g.xi(g.center()) == 0.0);
  CHECK(g.spacing() == doctest::Approx(0.02));
  CHECK(g.xi(0) == doctest::Approx(-20.0));
  CHECK_THROWS_AS(CFGrid(20.0, 2000), Error);
}

TEST_CASE("interpolation and clamping") {
  const auto g = CFGrid::from_function(2.0, 41, [](double x) { return cplx(x, -x); });
  bool clamped = false;
  CHECK(std::abs(g.at(0.37, clamped) - cplx(0.37, -0.37)) < 1e-12);
  CHECK_FALSE(clamped);
  CHECK(std::abs(g.at(5.0, clamped) - cplx(2.0, -2.0)) < 1e-12);
  CHECK(clamped);
}

TEST_CASE("projection restores the constraints") {
  auto g = CFGrid::from_function(5.0, 101, [](double x) { return cplx(1.2 * std::cos(x), x); });
  const double before = g.project();
  CHECK(before > 1.0);
  CHECK(g.satisfies_constraints(1e-12));
  CHECK(g[g.center()] == cplx(1.0, 0.0));
}

TEST_CASE("Q of the constant one") {
  const auto panel = QuadraturePanel::build(CollisionModel::kac(CLaw::gaussian(1.0)), 1000, 1);
  const auto one = CFGrid::from_function(10.0, 201, [](double) { return cplx(1.0, 0.0); });
  const auto q = apply_q(one, panel, 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::abs(q[i] - 1.0) < 1e-12);
  const auto shifted = apply_q(one, panel, 1.0);
  CHECK(shifted[shifted.center()] == cplx(1.0, 0.0));
}

TEST_CASE("Q of a point mass under diag(2, 1/2)") {
  const double r = 0.8;
  const double c = 0.3;
  const auto panel = QuadraturePanel::build(diag(0.5, CLaw::constant(c)), 1000, 2);
  const auto psi = CFGrid::from_function(4.0, 401, [&](double x) { return std::exp(kI * x * r); });
  ApplyStats stats;
  const auto q = apply_q(psi, panel, 1.0, &stats);
  CHECK(stats.clamped == 0);
  double worst = 0.0;
  // a xi falls on a node exactly when the offset from the centre is even
  for (std::size_t i = 0; i < q.size(); ++i) {
    const long off = static_cast<long>(i) - static_cast<long>(q.center());
    if (off % 2 != 0) continue;
    const double x = q.xi(i);
    worst = std::max(worst, std::abs(q[i] - std::exp(kI * x * (c + r))));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("evolve keeps phi(0) = 1 and the modulus bound") {
  const auto panel = QuadraturePanel::build(diag(0.5, CLaw::constant(0.0)), 1000, 3);
  const auto phi0 = CFGrid::from_function(10.0, 201, [](double x) { return std::exp(kI * x); });
  EvolveOptions opt;
  opt.t_end = 1.0;
  opt.dt = 0.05;
  opt.checkpoints = {0.5};
  const auto res = evolve(phi0, panel, opt);
  CHECK(res.checkpoints.size() == 1);
  CHECK(res.final_grid[res.final_grid.center()] == cplx(1.0, 0.0));
  CHECK(res.final_grid.satisfies_constraints(1e-9));
  CHECK(res.final_grid.time() == doctest::Approx(1.0));
  CHECK(res.max_premodulus <= kInstabilityModulus);
}

TEST_CASE("evolve matches the exact Gaussian solution") {
  // With N = 2, a = 1/sqrt(2) and C = 0 a centered Gaussian is stationary.
  const auto model = CollisionModel::diag(2, std::sqrt(0.5), CLaw::constant(0.0));
  const auto panel = QuadraturePanel::build(model, 1000, 4);
  const auto phi0 = CFGrid::from_function(10.0, 401, [](double x) { return std::exp(-0.5 * x * x); });
  EvolveOptions opt;
  opt.t_end = 1.0;
  opt.dt = 0.02;
  const auto res = evolve(phi0, panel, opt);
  CHECK(sup_distance(res.final_grid, phi0) < 5e-3);
}

TEST_CASE("dt halving converges") {
  const auto model = CollisionModel::kac(CLaw::two_point(1.0));
  const auto panel = QuadraturePanel::build(model, 2000, 5);
  const auto phi0 = CFGrid::from_function(10.0, 501, [](double) { return cplx(1.0, 0.0); });
  EvolveOptions coarse;
  coarse.dt = 0.02;
  EvolveOptions fine;
  fine.dt = 0.01;
  const auto a = evolve(phi0, panel, coarse);
  const auto b = evolve(phi0, panel, fine);
  CHECK(sup_distance(a.final_grid, b.final_grid) <= 5e-4);
}

TEST_CASE("invalid evolve options") {
  const auto panel = QuadraturePanel::build(diag(0.5), 1000, 6);
  const auto phi0 = CFGrid::from_function(5.0, 101, [](double) { return cplx(1.0, 0.0); });
  EvolveOptions opt;
  opt.dt = 0.1;
  CHECK_THROWS_AS(evolve(phi0, panel, opt), Error);
  opt.dt = 0.02;
  opt.t_end = 11.0;
  CHECK_THROWS_AS(evolve(phi0, panel, opt), Error);
}

TEST_CASE("stationary residual") {
  const auto panel = QuadraturePanel::build(diag(0.5), 1000, 7, true);
  const auto one = CFGrid::from_function(5.0, 101, [](double) { return cplx(1.0, 0.0); });
  CHECK(stationary_residual(one, panel, 0.5).residual < 1e-12);
}

TEST_CASE("csv rows") {
  auto g = CFGrid::from_function(1.0, 3, [](double) { return cplx(1.0, 0.0); });
  g.set_time(0.5);
  std::ostringstream out;
  g.write_csv(out);
  const std::string s = out.str();
  CHECK(s.rfind("t,xi,re,im\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}
