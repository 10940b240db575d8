#include "staforge/expansion.hpp"

#include <cmath>
#include <sstream>

namespace staforge::expansion {

using ansatz::ShapeEval;
using numerics::NumericsError;

namespace {

void validateSpec(const ExpansionSpec& spec) {
  if (!(spec.gamma > 1)) throw NumericsError("expansion: gamma must exceed 1 (decompression)");
  if (!(spec.sf > 0)) throw NumericsError("expansion: sf must be positive");
}

// Six self-consistent boundary conditions: b and its first two derivatives
// fixed at both ends (1 at s=0, gamma at s=sf, flat at both).
std::vector<ansatz::BoundaryCondition> sixConditions(double gamma, double sf) {
  return {{0, 0.0, 1.0},  {1, 0.0, 0.0}, {2, 0.0, 0.0},
          {0, sf, gamma}, {1, sf, 0.0},  {2, sf, 0.0}};
}

}  // namespace

std::function<double(double)> controlFromScaling(
    const std::function<ShapeEval(double)>& b) {
  return [b](double s) {
    ShapeEval e = b(s);
    if (!(e.value > 0)) {
      std::ostringstream msg;
      msg << "controlFromScaling: unphysical scaling b = " << e.value << " at s = " << s;
      throw NumericsError(msg.str());
    }
    return 1.0 / std::pow(e.value, 4) - e.d2 / e.value;
  };
}

double meanEnergy(const std::function<ShapeEval(double)>& b, double sf,
                  const std::vector<double>& breakpoints) {
  numerics::QuadratureOptions qopts;
  qopts.breakpoints = breakpoints;
  double integral = numerics::quadrature(
      [&](double s) {
        ShapeEval e = b(s);
        if (!(e.value > 0)) throw NumericsError("meanEnergy: b must stay positive");
        return e.d1 * e.d1 + 1.0 / (e.value * e.value);
      },
      0.0, sf, qopts);
  return integral / sf;
}

BangBangTimes bangBangTimes(double w1, double w2, double gamma) {
  if (!(gamma > 1)) throw NumericsError("bangBangTimes: gamma must exceed 1");
  if (!(w1 > 0)) throw NumericsError("bangBangTimes: w1 must be positive");
  if (w2 * gamma < 1.0 - 1e-12)
    throw NumericsError("bangBangTimes: w2 below 1/gamma (switch time would be complex)");
  if (w2 > 1.0 + 1e-12)
    throw NumericsError("bangBangTimes: w2 above omega0 (outside admissible band)");
  const double g2 = gamma * gamma;
  double num1 = w1 * w1 * (g2 - 1) * (g2 * w2 * w2 - 1);
  double den1 = g2 * (w1 * w1 + 1) * (w2 * w2 + w1 * w1);
  double s1 = std::asinh(std::sqrt(std::max(0.0, num1 / den1))) / w1;
  double num2 = w2 * w2 * (g2 - 1) * (g2 * w1 * w1 + 1);
  double den2 = (w1 * w1 + w2 * w2) * (g2 * g2 * w2 * w2 - 1);
  double arg = std::sqrt(std::min(1.0, num2 / den2));
  double sf = s1 + std::asin(arg) / w2;
  return {s1, sf};
}

ExpansionProtocol bangBangProtocol(double w1, double w2, double gamma) {
  BangBangTimes times = bangBangTimes(w1, w2, gamma);
  const double s1 = times.s1, sf = times.sf;
  // Expulsive stage (u = -w1^2): b = sqrt(1 + D sinh^2(w1 s)), D = (w1^2+1)/w1^2.
  const double D = (w1 * w1 + 1) / (w1 * w1);
  // Confining stage (u = +w2^2), pinned at (gamma, 0) at sf:
  // b = sqrt(gamma^2 cos^2 th + sin^2 th/(w2 gamma)^2), th = w2 (sf - s).
  auto b = [=](double s) -> ShapeEval {
    ShapeEval e;
    if (s <= s1) {
      double sh = std::sinh(w1 * s), ch = std::cosh(w1 * s);
      e.value = std::sqrt(1 + D * sh * sh);
      e.d1 = D * w1 * sh * ch / e.value;
      // Second derivative from the Ermakov equation on this branch.
      e.d2 = 1.0 / std::pow(e.value, 3) + w1 * w1 * e.value;
    } else {
      double th = w2 * (sf - s);
      double cs = std::cos(th), sn = std::sin(th);
      double inv = 1.0 / (w2 * w2 * gamma * gamma);
      e.value = std::sqrt(gamma * gamma * cs * cs + inv * sn * sn);
      // d(b^2)/ds = (gamma^2 - inv) * 2 cos th sin th * w2  (since dth/ds = -w2)
      e.d1 = w2 * (gamma * gamma - inv) * cs * sn / e.value;
      e.d2 = 1.0 / std::pow(e.value, 3) - w2 * w2 * e.value;
    }
    return e;
  };
  ExpansionProtocol proto;
  proto.b = b;
  proto.sf = sf;
  proto.gamma = gamma;
  proto.control = [=](double s) { return s <= s1 ? -w1 * w1 : w2 * w2; };
  if (s1 > 0) proto.controlBreakpoints = {s1};
  proto.method = s1 > 0 ? "bang-bang-3" : "bang-bang-2";
  proto.meanEnergyRatio = meanEnergy(b, sf, proto.controlBreakpoints);
  return proto;
}

ExpansionProtocol twoJumpProtocol(double gamma) {
  return bangBangProtocol(1.0, 1.0 / gamma, gamma);
}

EnergyBound octEnergyBound(double gamma, double sf) {
  if (!(sf > 0)) throw NumericsError("octEnergyBound: sf must be positive");
  const double B = -1 + std::sqrt(sf * sf + gamma * gamma);
  auto checkedAtanh = [](double x, const char* which) {
    if (std::abs(x) >= 1) {
      std::ostringstream msg;
      msg << "octEnergyBound: arctanh argument " << which << " = " << x
          << " outside (-1, 1); formula outside validity domain";
      throw NumericsError(msg.str());
    }
    return std::atanh(x);
  };
  double bound = (B / sf) * (B / sf) - 1 -
                 (2 / sf) * checkedAtanh((B * B + B - sf * sf) / sf, "(B^2+B-sf^2)/sf") +
                 (2 / sf) * checkedAtanh(B / sf, "B/sf");
  auto b = [=](double s) -> ShapeEval {
    double tau = s / sf;
    double q = (B * B - sf * sf) * tau * tau + 2 * B * tau + 1;
    if (!(q > 0)) throw NumericsError("octEnergyBound: trajectory b^2 non-positive");
    ShapeEval e;
    e.value = std::sqrt(q);
    double dq = (2 * (B * B - sf * sf) * tau + 2 * B) / sf;  // d(b^2)/ds
    double ddq = 2 * (B * B - sf * sf) / (sf * sf);
    e.d1 = dq / (2 * e.value);
    e.d2 = ddq / (2 * e.value) - dq * dq / (4 * q * e.value);
    return e;
  };
  return {bound, b};
}

ExpansionProtocol quinticProtocol(const ExpansionSpec& spec) {
  validateSpec(spec);
  auto poly = std::make_shared<ansatz::ConstrainedPolynomial>(
      ansatz::fitConstrainedPolynomial(5, sixConditions(spec.gamma, spec.sf), {}, spec.sf));
  ExpansionProtocol proto;
  proto.b = [poly](double s) { return poly->eval(s); };
  proto.control = controlFromScaling(proto.b);
  proto.sf = spec.sf;
  proto.gamma = spec.gamma;
  proto.method = "quintic-IE";
  proto.meanEnergyRatio = meanEnergy(proto.b, spec.sf);
  return proto;
}

CubicOptimum optimizeCubic(const ExpansionSpec& spec) {
  validateSpec(spec);
  const double sf = spec.sf, gamma = spec.gamma;
  std::vector<ansatz::BoundaryCondition> conds = {{0, 0.0, 1.0}, {0, sf, gamma}};
  auto makeShape = [&](double a2, double a3) {
    return std::make_shared<ansatz::ConstrainedPolynomial>(
        ansatz::fitConstrainedPolynomial(3, conds, {{2, a2}, {3, a3}}, sf));
  };
  auto objective = [&](std::span<const double> p) -> double {
    auto shape = makeShape(p[0], p[1]);
    // Cubics can dip non-positive for wild parameters; treat as infeasible.
    for (int i = 1; i < 64; ++i)
      if (shape->eval(sf * i / 64.0).value <= 1e-6) return 1e9;
    return meanEnergy([&](double s) { return shape->eval(s); }, sf);
  };
  numerics::MinimizeOptions mopts;
  mopts.tol = 1e-8;
  mopts.restarts = 2;
  numerics::OptimizationResult opt = numerics::minimize(objective, {0.0, 0.0}, {1.0, 0.5}, mopts);

  auto poly = makeShape(opt.bestParams[0], opt.bestParams[1]);
  ExpansionProtocol proto;
  proto.b = [poly](double s) { return poly->eval(s); };
  proto.control = controlFromScaling(proto.b);
  proto.sf = sf;
  proto.gamma = gamma;
  proto.method = "cubic-IE";
  proto.meanEnergyRatio = opt.bestCost;
  return {opt, proto};
}

ExpansionProtocol octEnergyProtocol(const ExpansionSpec& spec) {
  validateSpec(spec);
  EnergyBound eb = octEnergyBound(spec.gamma, spec.sf);
  ExpansionProtocol proto;
  proto.b = eb.b;
  proto.control = controlFromScaling(proto.b);
  proto.sf = spec.sf;
  proto.gamma = spec.gamma;
  proto.method = "oct-energy";
  proto.meanEnergyRatio = eb.bound;
  return proto;
}

ClosureReport verifyExpansion(const ExpansionProtocol& protocol) {
  const double sf = protocol.sf;
  ShapeEval start = protocol.b(0.0);
  numerics::OdeOptions oopts;
  oopts.relTol = 1e-10;
  oopts.absTol = 1e-12;
  oopts.breakpoints = protocol.controlBreakpoints;
  auto rhs = [&](double s, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = 1.0 / std::pow(y[0], 3) - protocol.control(s) * y[0];
  };
  numerics::OdeTrajectory traj =
      numerics::integrateAdaptive(rhs, {start.value, start.d1}, 0.0, sf, oopts);

  ClosureReport rep;
  rep.finalValueError = std::abs(traj.finalState()[0] - protocol.gamma);
  rep.finalSlopeError = std::abs(traj.finalState()[1] - protocol.b(sf).d1);
  // Ermakov residual of the stated (analytic) trajectory against its control.
  for (int i = 1; i < 400; ++i) {
    double s = sf * i / 400.0;
    bool nearJump = false;
    for (double bp : protocol.controlBreakpoints)
      if (std::abs(s - bp) < 1e-6 * sf) nearJump = true;
    if (nearJump) continue;
    ShapeEval e = protocol.b(s);
    double res = std::abs(e.d2 + protocol.control(s) * e.value - 1.0 / std::pow(e.value, 3));
    rep.maxResidual = std::max(rep.maxResidual, res);
  }
  return rep;
}

}  // namespace staforge::expansion
