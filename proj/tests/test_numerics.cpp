#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "staforge/numerics.hpp"

using namespace staforge::numerics;
namespace nbr = std::numbers;

namespace {

OdeOptions tightOde() {
  OdeOptions o;
  o.relTol = 1e-10;
  o.absTol = 1e-12;
  return o;
}

double harmonicFinalError(double relTol) {
  OdeOptions o;
  o.relTol = relTol;
  o.absTol = 1e-14;
  auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  OdeTrajectory traj = integrateAdaptive(rhs, {1.0, 0.0}, 0.0, 2 * nbr::pi, o);
  auto yf = traj.finalState();
  return std::hypot(yf[0] - 1.0, yf[1]);
}

}  // namespace

TEST_CASE("harmonic oscillator returns to its initial state after one period") {
  CHECK(harmonicFinalError(1e-10) < 1e-8);
}

TEST_CASE("halving relTol never worsens the harmonic-oscillator error much") {
  double prev = harmonicFinalError(1e-6);
  for (double tol : {5e-7, 2.5e-7, 1.25e-7, 6.25e-8}) {
    double cur = harmonicFinalError(tol);
    CHECK(cur <= prev * 1.1 + 1e-15);
    prev = cur;
  }
}

TEST_CASE("Ermakov state-space form sits still at its equilibrium") {
  // b' = v, v' = 1/b^3 - u b with u = 1: equilibrium at (1, 0).
  auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = 1.0 / (y[0] * y[0] * y[0]) - y[0];
  };
  OdeTrajectory traj = integrateAdaptive(rhs, {1.0, 0.0}, 0.0, 10.0, tightOde());
  for (const auto& y : traj.states) {
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(y[1]) < 1e-10);
  }
}

TEST_CASE("dense output recovers interior states") {
  auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  OdeTrajectory traj = integrateAdaptive(rhs, {1.0, 0.0}, 0.0, 3.0, tightOde());
  for (double t : {0.1, 0.77, 1.5, 2.9}) {
    std::vector<double> y = traj.sample(t);
    CHECK(y[0] == doctest::Approx(std::cos(t)).epsilon(1e-8));
    CHECK(y[1] == doctest::Approx(-std::sin(t)).epsilon(1e-8));
  }
}

TEST_CASE("integrator endpoints land exactly on the requested span") {
  auto rhs = [](double, std::span<const double>, std::span<double> dy) { dy[0] = 1.0; };
  OdeOptions o = tightOde();
  o.breakpoints = {0.3, 0.7};
  OdeTrajectory traj = integrateAdaptive(rhs, {0.0}, 0.0, 1.1, o);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == 1.1);
  for (std::size_t i = 1; i < traj.times.size(); ++i)
    CHECK(traj.times[i] > traj.times[i - 1]);
}

TEST_CASE("integrator rejects invalid spans and tolerances") {
  auto rhs = [](double, std::span<const double>, std::span<double> dy) { dy[0] = 1.0; };
  CHECK_THROWS_AS(integrateAdaptive(rhs, {0.0}, 1.0, 0.0, tightOde()), NumericsError);
  OdeOptions bad;
  bad.relTol = -1;
  CHECK_THROWS_AS(integrateAdaptive(rhs, {0.0}, 0.0, 1.0, bad), NumericsError);
}

TEST_CASE("quadrature of sin^2 over a half period") {
  double v = quadrature([](double x) { return std::sin(x) * std::sin(x); }, 0.0, nbr::pi, {});
  CHECK(v == doctest::Approx(nbr::pi / 2).epsilon(1e-10));
}

TEST_CASE("quadrature is exact for polynomials up to degree 12") {
  for (int deg = 0; deg <= 12; ++deg) {
    double v = quadrature([deg](double x) { return std::pow(x, deg); }, 0.0, 2.0, {});
    double exact = std::pow(2.0, deg + 1) / (deg + 1);
    CHECK(v == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("quadrature honors breakpoints through kinks") {
  QuadratureOptions qo;
  qo.breakpoints = {nbr::pi};
  double v = quadrature([](double x) { return std::abs(std::sin(x)); }, 0.0, 2 * nbr::pi, qo);
  CHECK(v == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("quadrature rejects non-finite samples") {
  CHECK_THROWS_AS(quadrature([](double x) { return 1.0 / x; }, -1.0, 1.0, {}), NumericsError);
}

TEST_CASE("minimize finds the quadratic bowl minimum") {
  auto f = [](std::span<const double> p) {
    return (p[0] - 3) * (p[0] - 3) + (p[1] + 1) * (p[1] + 1);
  };
  MinimizeOptions mo;
  mo.tol = 1e-9;
  OptimizationResult r = minimize(f, {0.0, 0.0}, {1.0, 1.0}, mo);
  CHECK(r.converged);
  CHECK(r.bestParams[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(r.bestParams[1] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("minimize is idempotent at its own optimum") {
  auto f = [](std::span<const double> p) {
    return std::pow(p[0] - 0.7, 4) + (p[1] - 0.2) * (p[1] - 0.2) + 5.0;
  };
  MinimizeOptions mo;
  mo.tol = 1e-8;
  OptimizationResult r1 = minimize(f, {0.0, 0.0}, {1.0, 1.0}, mo);
  OptimizationResult r2 = minimize(f, r1.bestParams, {1.0, 1.0}, mo);
  CHECK(std::abs(r2.bestCost - r1.bestCost) < mo.tol);
  CHECK(r2.bestCost <= r1.bestCost + 1e-15);
}

TEST_CASE("minimize is deterministic") {
  auto f = [](std::span<const double> p) {
    return std::sin(3 * p[0]) + p[0] * p[0] + std::cos(2 * p[1]) + p[1] * p[1];
  };
  OptimizationResult a = minimize(f, {0.5, -0.5}, {1.0, 1.0}, {});
  OptimizationResult b = minimize(f, {0.5, -0.5}, {1.0, 1.0}, {});
  CHECK(a.bestCost == b.bestCost);
  CHECK(a.bestParams == b.bestParams);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("minimize flags exhausted budgets as not converged") {
  auto f = [](std::span<const double> p) { return p[0] * p[0]; };
  MinimizeOptions mo;
  mo.maxEvals = 5;
  OptimizationResult r = minimize(f, {10.0}, {1.0}, mo);
  CHECK_FALSE(r.converged);
}

TEST_CASE("findRoot solves x^2 = 2") {
  double r = findRoot([](double x) { return x * x - 2; }, 1.0, 2.0, 1e-14);
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("findRoot keeps every iterate inside the initial bracket") {
  double lo = 0.5, hi = 4.0;
  bool inside = true;
  auto g = [&](double x) {
    if (x < lo - 1e-15 || x > hi + 1e-15) inside = false;
    return std::log(x) - 0.3;
  };
  double r = findRoot(g, lo, hi, 1e-13);
  CHECK(inside);
  CHECK(r == doctest::Approx(std::exp(0.3)).epsilon(1e-12));
}

TEST_CASE("findRoot rejects brackets without a sign change") {
  CHECK_THROWS_AS(findRoot([](double x) { return x * x + 1; }, -1.0, 1.0, 1e-12),
                  NumericsError);
}
