#pragma once

#include <functional>
#include <memory>
#include <string>

#include "staforge/ansatz.hpp"
#include "staforge/numerics.hpp"

namespace staforge::expansion {

// Trap decompression problem in normalized time s = omega0 * t and normalized
// control u = omega(s)^2 / omega0^2. gamma = (omega0/omegaF)^(1/2) is the
// target scaling factor b(sf).
struct ExpansionSpec {
  double gamma = 0;
  double sf = 0;
  double controlBound = 1.0;
};

// Scaling-factor trajectory b(s) with its control; meanEnergyRatio is the
// time-averaged potential energy in units eps = hbar*omega0/4.
struct ExpansionProtocol {
  std::function<ansatz::ShapeEval(double s)> b;
  std::function<double(double s)> control;
  std::vector<double> controlBreakpoints;  // interior discontinuities of u
  double sf = 0;
  double gamma = 0;
  double meanEnergyRatio = 0;
  std::string method;
};

// Inverts the Ermakov equation: u(s) = 1/b^4 - b''/b. Throws if b <= 0.
std::function<double(double)> controlFromScaling(
    const std::function<ansatz::ShapeEval(double)>& b);

// (1/sf) Integral over [0, sf] of (b'^2 + 1/b^2) ds, i.e. Ep_bar/eps.
double meanEnergy(const std::function<ansatz::ShapeEval(double)>& b, double sf,
                  const std::vector<double>& breakpoints = {});

struct BangBangTimes {
  double s1 = 0;
  double sf = 0;
};

// Switching/final times of the three-jump bang-bang with intermediate trap
// frequencies w1 (expulsive stage, imaginary frequency magnitude) and w2
// (final confining stage), both normalized to omega0.
BangBangTimes bangBangTimes(double w1, double w2, double gamma);

ExpansionProtocol bangBangProtocol(double w1, double w2, double gamma);

// Two-jump limit (w2 = 1/gamma): b(tau) = sqrt(gamma^2 + (1-gamma^2) sin^2(pi(1-tau)/2)).
ExpansionProtocol twoJumpProtocol(double gamma);

struct EnergyBound {
  double bound = 0;  // Ep_bar/eps lower bound
  std::function<ansatz::ShapeEval(double s)> b;
};

// Energy-minimizing bound with b(tau) = sqrt((B^2 - sf^2) tau^2 + 2 B tau + 1),
// B = -1 + sqrt(sf^2 + gamma^2).
EnergyBound octEnergyBound(double gamma, double sf);

ExpansionProtocol quinticProtocol(const ExpansionSpec& spec);

struct CubicOptimum {
  numerics::OptimizationResult opt;
  ExpansionProtocol protocol;
};

// Minimizes meanEnergy over the cubic's two free coefficients (a2, a3).
CubicOptimum optimizeCubic(const ExpansionSpec& spec);

// Energy-optimal trajectory protocol built from octEnergyBound's b (carries
// endpoint slope jumps, like the bang-bang family).
ExpansionProtocol octEnergyProtocol(const ExpansionSpec& spec);

struct ClosureReport {
  double finalValueError = 0;  // |b(sf) - gamma|
  double finalSlopeError = 0;  // |b'(sf) - target slope|
  double maxResidual = 0;      // max Ermakov residual at interior samples
};

// Forward-integrates b'' = 1/b^3 - u b from b(0), b'(0+) and compares against
// the protocol's stated trajectory and targets.
ClosureReport verifyExpansion(const ExpansionProtocol& protocol);

}  // namespace staforge::expansion
