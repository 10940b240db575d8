#pragma once

#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "staforge/ansatz.hpp"
#include "staforge/numerics.hpp"

namespace staforge::transport {

// Rigid transport of a harmonic trap by distance d within tf.
struct TransportSpec {
  double omega0 = 2 * std::numbers::pi * 50;  // rad/s
  double d = 1.0;                 // m
  double tf = 0.022;              // s
  double mass = 1.0;              // kg
  double deltaBound = 0.0;        // |x - x0| <= delta for the time-optimal branch
};

struct JumpRecord {
  double time = 0;
  double before = 0;
  double after = 0;
};

struct TransportProtocol {
  std::function<ansatz::ShapeEval(double t)> x;  // mass trajectory
  std::function<double(double t)> x0;            // trap center (may jump at 0, tf)
  std::vector<JumpRecord> trapJumps;
  std::vector<double> controlBreakpoints;  // interior discontinuities
  double tf = 0;
  double d = 0;
  double meanPotentialRatio = 0;  // Ep_bar / Ep_bar^(OCT), OCT = 6 m d^2/(w0^2 tf^4)
  double meanPotentialJoules = 0;
  std::string method;
};

// Trap center from the mass trajectory: x0 = x + xdd / omega0^2.
std::function<double(double)> trapFromMass(const std::function<ansatz::ShapeEval(double)>& x,
                                           double omega0);

// Time-averaged potential energy (1/tf) Int (m w0^2 / 2)(x - x0)^2 dt, joules.
double meanPotential(const std::function<ansatz::ShapeEval(double)>& x,
                     const TransportSpec& spec);

double octMeanPotential(const TransportSpec& spec);  // 6 m d^2 / (w0^2 tf^4)

// Closed form of the septic ansatz's time-averaged potential energy as a
// quadratic polynomial in (a3, a4), in joules.
double septicEnergyClosedForm(double a3, double a4, const TransportSpec& spec);

TransportProtocol quinticProtocol(const TransportSpec& spec);

struct TimeOptimal {
  TransportProtocol protocol;
  double t1 = 0;
  double tf = 0;
};

// Three-jump bang-bang on the relative displacement u = x - x0 with |u| <= delta;
// switch at t1 = tf/2, tf = (2/omega0) sqrt(d/delta).
TimeOptimal timeOptimalProtocol(const TransportSpec& spec);

// Unbounded energy-optimal protocol: cubic mass path with trap jumps at both ends.
TransportProtocol energyOptimalProtocol(const TransportSpec& spec);

struct PolyOptimum {
  numerics::OptimizationResult opt;
  TransportProtocol protocol;
};

// Six endpoint conditions imposed; remaining coefficients minimized.
// Degree 5 has no freedom; degree 7 frees (a3, a4); higher degrees free
// a3..a(degree-3) and start from the embedded septic optimum.
PolyOptimum optimizePolynomial(const TransportSpec& spec, int degree);

struct HyperbolicOptimum {
  numerics::OptimizationResult opt;
  TransportProtocol protocol;
  double endpointMismatch = 0;  // |x(0)| (= |x(tf) - d| by symmetry)
};

// Deterministic grid search over a1 in (0, 5], a2 in (1, 3]; trials whose tanh
// saturation misses the endpoints by more than 1e-3 d are rejected.
HyperbolicOptimum optimizeHyperbolic(const TransportSpec& spec);

TransportProtocol hyperbolicProtocol(const TransportSpec& spec, double a1, double a2);

struct ClosureReport {
  double finalValueError = 0;   // |x_int(tf) - x(tf)| / d (self-consistency)
  double finalSlopeError = 0;   // |v_int(tf) - xdot(tf)| tf / d
  double excitationRatio = 0;   // Delta E / eps vs (d, at rest); eps = m w0^2 d^2 / 2
  double maxNewtonResidual = 0; // normalized to w0^2 d
};

ClosureReport verifyTransport(const TransportProtocol& protocol, const TransportSpec& spec);

}  // namespace staforge::transport
