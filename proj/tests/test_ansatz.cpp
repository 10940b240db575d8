#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "staforge/ansatz.hpp"

using namespace staforge::ansatz;
using staforge::numerics::NumericsError;

namespace {

std::vector<BoundaryCondition> flatEndpoints(double T, double start, double end) {
  return {{0, 0.0, start}, {1, 0.0, 0.0}, {2, 0.0, 0.0},
          {0, T, end},     {1, T, 0.0},   {2, T, 0.0}};
}

// Central-difference check of the analytic derivatives of any shape.
void checkDerivatives(const ShapeFunction& s, double t, double tolRel) {
  const double h = 1e-5 * s.span();
  const double h2 = 1e-4 * s.span();  // wider stencil: d2 differencing amplifies roundoff
  ShapeEval e = s.eval(t);
  double d1 = (s.eval(t + h).value - s.eval(t - h).value) / (2 * h);
  double d2 = (s.eval(t + h2).value - 2 * e.value + s.eval(t - h2).value) / (h2 * h2);
  double sc1 = std::max(1.0, std::abs(e.d1));
  double sc2 = std::max(1.0, std::abs(e.d2));
  CHECK(std::abs(e.d1 - d1) / sc1 < tolRel);
  CHECK(std::abs(e.d2 - d2) / sc2 < tolRel * 100);
}

}  // namespace

TEST_CASE("fully constrained quintic has the classic smoothstep coefficients") {
  const double gamma = 1.8, T = 3.0;
  ConstrainedPolynomial p = fitConstrainedPolynomial(5, flatEndpoints(T, 1.0, gamma), {}, T);
  const auto& c = p.coefficients();
  REQUIRE(c.size() == 6);
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(c[1]) < 1e-12);
  CHECK(std::abs(c[2]) < 1e-12);
  CHECK(c[3] == doctest::Approx(10 * (gamma - 1)).epsilon(1e-12));
  CHECK(c[4] == doctest::Approx(-15 * (gamma - 1)).epsilon(1e-12));
  CHECK(c[5] == doctest::Approx(6 * (gamma - 1)).epsilon(1e-12));
  // Symmetric shape passes through the midpoint value.
  CHECK(p.eval(T / 2).value == doctest::Approx((1 + gamma) / 2).epsilon(1e-12));
}

TEST_CASE("boundary conditions are reproduced to 1e-12 when re-evaluated") {
  const double T = 4.0;
  auto conds = flatEndpoints(T, 1.0, 1.4953487812212205);
  ConstrainedPolynomial p7 = fitConstrainedPolynomial(7, conds, {{3, 2.1}, {4, -7.0}}, T);
  for (const auto& bc : conds) {
    ShapeEval e = p7.eval(bc.time);
    double v = bc.derivativeOrder == 0 ? e.value : (bc.derivativeOrder == 1 ? e.d1 : e.d2);
    CHECK(std::abs(v - bc.value) < 1e-12);
  }
}

TEST_CASE("free coefficients are kept verbatim") {
  const double T = 2.0;
  auto conds = flatEndpoints(T, 0.0, 1.0);
  ConstrainedPolynomial p = fitConstrainedPolynomial(7, conds, {{3, 21.0}, {4, -70.0}}, T);
  CHECK(p.coefficients()[3] == doctest::Approx(21.0).epsilon(1e-12));
  CHECK(p.coefficients()[4] == doctest::Approx(-70.0).epsilon(1e-12));
}

TEST_CASE("cubic with two free parameters pins the linear coefficient") {
  // b(0) = 1 and b(T) = gamma leave a1 = gamma - 1 - a2 - a3.
  const double gamma = 1.3, T = 2.0, a2 = -0.4, a3 = 0.1;
  ConstrainedPolynomial p = fitConstrainedPolynomial(
      3, {{0, 0.0, 1.0}, {0, T, gamma}}, {{2, a2}, {3, a3}}, T);
  const auto& c = p.coefficients();
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(gamma - 1 - a2 - a3).epsilon(1e-12));
}

TEST_CASE("polynomial derivatives agree with finite differences") {
  const double T = 3.0;
  ConstrainedPolynomial p =
      fitConstrainedPolynomial(7, flatEndpoints(T, 1.0, 2.0), {{3, 4.0}, {4, -6.0}}, T);
  for (double t : {0.3, 1.1, 1.5, 2.2, 2.8}) checkDerivatives(p, t, 1e-8);
}

TEST_CASE("midpoint conditions are honored") {
  const double T = 2.0;
  std::vector<BoundaryCondition> conds = {{0, 0.0, 0.0}, {0, T / 2, 0.5}, {0, T, 1.0}};
  ConstrainedPolynomial p = fitConstrainedPolynomial(2, conds, {}, T);
  CHECK(p.eval(T / 2).value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("condition/parameter count mismatches are rejected") {
  CHECK_THROWS_AS(fitConstrainedPolynomial(3, {{0, 0.0, 1.0}}, {}, 1.0), NumericsError);
  CHECK_THROWS_AS(
      fitConstrainedPolynomial(3, {{0, 0.0, 1.0}, {0, 1.0, 2.0}}, {{7, 0.0}}, 1.0),
      NumericsError);
}

TEST_CASE("singular condition systems are rejected") {
  // Duplicate conditions make the linear system rank deficient.
  CHECK_THROWS_AS(fitConstrainedPolynomial(
                      1, {{0, 0.0, 1.0}, {0, 0.0, 1.0}}, {}, 1.0),
                  NumericsError);
}

TEST_CASE("tanh-tan shape is antisymmetric about the midpoint") {
  const double T = 0.022, d = 1.0;
  TanhTan s(d / 2, d / 2, 1.2, 1.25, T);
  CHECK(s.eval(T / 2).value == doctest::Approx(d / 2).epsilon(1e-12));
  for (double t : {0.1 * T, 0.25 * T, 0.4 * T}) {
    CHECK(s.eval(t).value + s.eval(T - t).value == doctest::Approx(d).epsilon(1e-10));
  }
}

TEST_CASE("tanh-tan derivatives agree with finite differences") {
  const double T = 1.0;
  TanhTan s(0.5, 0.5, 1.2, 1.25, T);
  for (double t : {0.15, 0.35, 0.5, 0.65, 0.9}) checkDerivatives(s, t, 1e-7);
}

TEST_CASE("tanh-tan saturates toward the endpoints for steep a1") {
  const double T = 1.0;
  TanhTan s(0.5, 0.5, 5.0, 1.1, T);
  CHECK(s.eval(0.01 * T).value < 1e-6);
  CHECK(s.eval(0.99 * T).value > 1 - 1e-6);
}

TEST_CASE("tanh-tan width at or below 1 is rejected") {
  CHECK_THROWS_AS(TanhTan(0.5, 0.5, 1.2, 1.0, 1.0), NumericsError);
  CHECK_THROWS_AS(TanhTan(0.5, 0.5, 1.2, 0.7, 1.0), NumericsError);
}
