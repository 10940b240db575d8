#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "staforge/spin.hpp"

using namespace staforge::spin;
using staforge::numerics::NumericsError;
namespace nbr = std::numbers;

namespace {

const double kRfCaseI = std::exp(-2.0);

SpinSpec caseI() {
  SpinSpec s;
  s.thetaF = nbr::pi / 2;
  s.rF = kRfCaseI;
  return s;
}

SpinSpec flip06() {
  SpinSpec s;
  s.thetaF = nbr::pi;
  s.rF = 0.6;
  return s;
}

SpinSpec fig8Target() {
  SpinSpec s;
  s.thetaF = nbr::pi / 2;
  s.rF = 0.6;
  s.tF = 3.6357955;
  return s;
}

}  // namespace

TEST_CASE("costate constant matches its closed forms") {
  // theta_f = pi/2: p1 = 2 r^2 / (1 - r^2)^2.
  double r = kRfCaseI;
  double expected = 2 * r * r / std::pow(1 - r * r, 2);
  CHECK(solveP1(nbr::pi / 2, r) == doctest::Approx(expected).epsilon(1e-6));
  // theta_f = pi: p1 = 2 r / (1 - r)^2 = 7.5 at r = 0.6.
  CHECK(solveP1(nbr::pi, 0.6) == doctest::Approx(7.5).epsilon(1e-9));
  CHECK(solveP1(nbr::pi / 2, 0.6) == doctest::Approx(2 * 0.36 / (0.4096)).epsilon(1e-9));
}

TEST_CASE("extremal radius is monotone in the costate constant") {
  double prev = 0;
  for (double p1 : {1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
    double r = octRadius(nbr::pi / 2, p1);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("targets below the dissipative infimum are rejected") {
  // For theta_f = pi/4 the radius cannot drop below cos(theta_f).
  CHECK_THROWS_AS(solveP1(nbr::pi / 4, 0.5), NumericsError);
}

TEST_CASE("optimal final times match the regularized quadrature values") {
  CHECK(octFinalTime(caseI()) == doctest::Approx(8.60481849).epsilon(1e-6));
  CHECK(octFinalTime(flip06()) == doctest::Approx(3.8165858).epsilon(1e-6));
  SpinSpec general = fig8Target();
  general.tF = 0;
  CHECK(octFinalTime(general) == doctest::Approx(3.6357955).epsilon(1e-6));
}

TEST_CASE("optimal energies match their closed forms") {
  CHECK(octEnergy(caseI()) ==
        doctest::Approx(1.0 / (1 - kRfCaseI * kRfCaseI)).epsilon(1e-12));
  CHECK(octEnergy(caseI()) == doctest::Approx(1.01866).epsilon(1e-4));
  CHECK(octEnergy(flip06()) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("energy quadrature along the extremal matches the closed form") {
  CHECK(octEnergyQuadrature(caseI()) == doctest::Approx(octEnergy(caseI())).epsilon(1e-4));
  CHECK(octEnergyQuadrature(flip06()) == doctest::Approx(octEnergy(flip06())).epsilon(1e-5));
}

TEST_CASE("radius law vs integrated decay agree along the optimal protocol") {
  SpinProtocol p = octProtocol(caseI());
  double p1 = solveP1(nbr::pi / 2, kRfCaseI);
  // Radius law at the realized final angle vs the integral of -sin^2.
  double thetaEnd = p.theta(p.tF).value;
  double lawR = octRadius(thetaEnd, p1) / octRadius(p.theta(0.0).value, p1);
  CHECK(std::exp(p.finalLogRadius) == doctest::Approx(lawR).epsilon(1e-7));
}

TEST_CASE("control Hamiltonian vanishes along the optimal trajectory") {
  SpinSpec spec = caseI();
  SpinProtocol p = octProtocol(spec);
  double p1 = solveP1(spec.thetaF, spec.rF);
  for (int i = 1; i < 50; ++i) {
    double t = p.tF * i / 50.0;
    double th = p.theta(t).value;
    double B = p.field(t);  // = p2 on the extremal
    double hc = B * B / 2 - p1 * std::sin(th) * std::sin(th) -
                B * std::sin(th) * std::cos(th);
    CHECK(std::abs(hc) < 1e-7);
  }
}

TEST_CASE("quadratic ansatz optimum at the feasible case-I target") {
  SpinSpec spec = caseI();
  spec.tF = 8.60481849;
  AnsatzOptimum opt = optimizeAnsatz(spec, Family::Quadratic);
  CHECK(opt.opt.bestParams[0] == doctest::Approx(-0.11958223).epsilon(1e-5));
  double ratio = opt.protocol.energy / octEnergy(caseI());
  CHECK(ratio == doctest::Approx(1.0555).epsilon(1e-3));
  CHECK(std::exp(opt.protocol.finalLogRadius) ==
        doctest::Approx(spec.rF).epsilon(1e-8));
}

TEST_CASE("cubic ansatz optimum at the general target") {
  AnsatzOptimum opt = optimizeAnsatz(fig8Target(), Family::CubicWithA3, 0.1);
  CHECK(opt.opt.bestParams[0] == doctest::Approx(0.15713222).epsilon(1e-4));
  SpinSpec ref = fig8Target();
  double ratio = opt.protocol.energy / octEnergy(ref);
  CHECK(ratio == doctest::Approx(1.0301).epsilon(1e-3));
}

TEST_CASE("reachable radius windows at the general target") {
  ReachableRange q = reachableRange(fig8Target(), Family::Quadratic);
  CHECK(q.rMin == doctest::Approx(0.055).epsilon(0.1));
  CHECK(std::abs(q.rMin - 0.055) < 0.005);
  CHECK(std::abs(q.rMax - 0.476) < 0.005);
  ReachableRange c = reachableRange(fig8Target(), Family::CubicWithA3, 0.1);
  CHECK(std::abs(c.rMin - 0.043) < 0.005);
  CHECK(std::abs(c.rMax - 0.608) < 0.005);
}

TEST_CASE("unreachable targets produce a diagnostic with the reachable window") {
  SpinSpec bad = caseI();
  bad.rF = 0.99;
  try {
    optimizeAnsatz(bad, Family::Quadratic);
    FAIL("expected a rejection");
  } catch (const NumericsError& e) {
    CHECK(std::string(e.what()).find("unreachable") != std::string::npos);
  }
}

TEST_CASE("tanh flip ansatz reproduces the frozen optimum") {
  AnsatzOptimum opt = optimizeAnsatz(flip06(), Family::TanhFlip, 1.1);
  CHECK(opt.opt.bestParams[0] == doctest::Approx(3.104678).epsilon(1e-4));
  CHECK(opt.protocol.energy == doctest::Approx(4.028).epsilon(0.002));
  CHECK(opt.protocol.energy / octEnergy(flip06()) < 1.01);
}

TEST_CASE("ninth-order flip ansatz stays within 15% of the optimum") {
  AnsatzOptimum opt = optimizeAnsatz(flip06(), Family::NinthFlip);
  double ratio = opt.protocol.energy / octEnergy(flip06());
  CHECK(ratio >= 1.0);
  CHECK(ratio <= 1.15);
}

TEST_CASE("ansatz energies dominate the optimal-control energy") {
  SpinSpec spec = caseI();
  spec.tF = 8.60481849;
  double eOct = octEnergy(caseI());
  CHECK(optimizeAnsatz(spec, Family::Quadratic).protocol.energy >= eOct);
  CHECK(optimizeAnsatz(fig8Target(), Family::CubicWithA3, 0.1).protocol.energy >=
        octEnergy(fig8Target()));
}

TEST_CASE("Cartesian Bloch integration agrees with the spherical design") {
  struct Case {
    SpinProtocol protocol;
    SpinSpec spec;
    double tol;
  };
  SpinSpec qspec = caseI();
  qspec.tF = 8.60481849;
  Case cases[] = {
      {octProtocol(caseI()), caseI(), 1e-7},
      {octProtocol(flip06()), flip06(), 1e-7},
      {optimizeAnsatz(qspec, Family::Quadratic).protocol, qspec, 1e-6},
      {optimizeAnsatz(fig8Target(), Family::CubicWithA3, 0.1).protocol, fig8Target(), 1e-6},
      {optimizeAnsatz(flip06(), Family::TanhFlip, 1.1).protocol, flip06(), 1e-4},
      {optimizeAnsatz(flip06(), Family::NinthFlip).protocol, flip06(), 1e-6},
  };
  for (const auto& c : cases) {
    CAPTURE(c.protocol.method);
    ClosureReport rep = verifySpin(c.protocol, c.spec);
    CHECK(rep.finalAngleError < c.tol);
    CHECK(rep.finalRadiusError < c.tol);
    CHECK(rep.maxPhiDrift < 1e-7);  // B_c = 0: no azimuthal motion
  }
}

TEST_CASE("the decay integral is negative and the field inversion is consistent") {
  SpinProtocol p = octProtocol(caseI());
  CHECK(p.finalLogRadius < 0);
  // B = thetadot + sin cos must invert back to the design.
  for (double t : {0.2 * p.tF, 0.5 * p.tF, 0.8 * p.tF}) {
    auto e = p.theta(t);
    CHECK(p.field(t) ==
          doctest::Approx(e.d1 + std::sin(e.value) * std::cos(e.value)).epsilon(1e-9));
  }
}
