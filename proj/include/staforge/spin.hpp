#pragma once

#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "staforge/ansatz.hpp"
#include "staforge/numerics.hpp"

namespace staforge::spin {

// Dissipative spin-1/2 rotation in normalized time t = R t' (R = transverse
// relaxation rate). Target: polar angle thetaF with spin length rF.
struct SpinSpec {
  double thetaF = std::numbers::pi / 2;
  double rF = 0.5;
  double epsilon = 1e-3;  // endpoint regularization for the OCT integrals
  double tF = 0.0;        // 0 = derive from octFinalTime
};

struct SpinProtocol {
  std::function<ansatz::ShapeEval(double)> theta;
  std::function<double(double)> field;  // B(t), units of R
  double tF = 0;
  double thetaF = 0;
  double energy = 0;          // Int B^2/2 dt
  double finalLogRadius = 0;  // a(tF) = ln r(tF)
  std::string method;
};

// Inverts theta-dot = B - sin(theta) cos(theta).
std::function<double(double)> fieldFromTheta(
    const std::function<ansatz::ShapeEval(double)>& theta);

// a(tF) = -Int_0^tF sin^2(theta) dt  (<= 0).
double finalLogRadius(const std::function<ansatz::ShapeEval(double)>& theta, double tF);

// Int_0^tF B(t)^2 / 2 dt for the field inferred from theta.
double energyFunctional(const std::function<ansatz::ShapeEval(double)>& theta, double tF);

// Spin length along the Pontryagin extremal:
// r(theta) = (cos theta + sqrt(2 p1 + cos^2 theta)) / (1 + sqrt(2 p1 + 1)).
double octRadius(double theta, double p1);

// Solves octRadius(thetaF, p1) = rF for the costate constant p1. Throws when
// the target lies below the dissipative infimum, reporting that infimum.
double solveP1(double thetaF, double rF);

// Regularized time-of-flight quadrature: [eps, thetaF] for interior targets,
// [eps, pi - eps] for a full flip. Matches the closed forms at pi/2 and pi.
double octFinalTime(const SpinSpec& spec);

// OCT cost: closed form at thetaF in {pi/2, pi}; general targets by
// quadrature along the extremal.
double octEnergy(const SpinSpec& spec);
double octEnergyQuadrature(const SpinSpec& spec);

// OCT protocol with theta(t) from integrating the extremal flow from eps.
SpinProtocol octProtocol(const SpinSpec& spec);

enum class Family { Quadratic, CubicWithA3, NinthFlip, TanhFlip };

struct AnsatzOptimum {
  numerics::OptimizationResult opt;
  SpinProtocol protocol;
};

// Feasible-optimum search: one designated parameter is root-solved so the
// final log-radius hits ln rF exactly; any remaining free parameters are
// minimized over. `aux` carries the family's fixed parameter (a3 for the
// cubic, a5 for the tanh flip); ignored otherwise.
AnsatzOptimum optimizeAnsatz(const SpinSpec& spec, Family family, double aux = 0.0);

struct ReachableRange {
  double rMin = 0;
  double rMax = 0;
};

// Extrema of exp(finalLogRadius) over the family's scanned parameter at the
// spec's fixed tF.
ReachableRange reachableRange(const SpinSpec& spec, Family family, double aux = 0.0);

struct ClosureReport {
  double finalAngleError = 0;   // |theta(tF) - thetaF| from Cartesian integration
  double finalRadiusError = 0;  // |r(tF) - rF|
  double maxPhiDrift = 0;       // azimuthal drift (must vanish, B_c = 0)
};

// Integrates the Cartesian Bloch equations under the protocol's field from
// S = (0, 0, 1) (nudged by eps when the protocol starts off the pole).
ClosureReport verifySpin(const SpinProtocol& protocol, const SpinSpec& spec);

}  // namespace staforge::spin
