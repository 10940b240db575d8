#include "staforge/transport.hpp"

#include <cmath>

namespace staforge::transport {

using ansatz::ShapeEval;
using numerics::NumericsError;

namespace {

void validateSpec(const TransportSpec& spec) {
  if (!(spec.omega0 > 0) || !(spec.d > 0) || !(spec.tf > 0) || !(spec.mass > 0))
    throw NumericsError("transport: omega0, d, tf and mass must all be positive");
}

// The six endpoint conditions on x: value/velocity/acceleration pinned at
// both ends (0 at t=0, d at t=tf, flat).
std::vector<ansatz::BoundaryCondition> sixConditions(double d, double tf) {
  return {{0, 0.0, 0.0}, {1, 0.0, 0.0}, {2, 0.0, 0.0},
          {0, tf, d},    {1, tf, 0.0},  {2, tf, 0.0}};
}

TransportProtocol protocolFromShape(std::function<ShapeEval(double)> x,
                                    const TransportSpec& spec, std::string method) {
  TransportProtocol p;
  p.x = std::move(x);
  p.x0 = trapFromMass(p.x, spec.omega0);
  p.tf = spec.tf;
  p.d = spec.d;
  p.method = std::move(method);
  p.meanPotentialJoules = meanPotential(p.x, spec);
  p.meanPotentialRatio = p.meanPotentialJoules / octMeanPotential(spec);
  return p;
}

}  // namespace

std::function<double(double)> trapFromMass(const std::function<ShapeEval(double)>& x,
                                           double omega0) {
  return [x, omega0](double t) {
    ShapeEval e = x(t);
    return e.value + e.d2 / (omega0 * omega0);
  };
}

double meanPotential(const std::function<ShapeEval(double)>& x, const TransportSpec& spec) {
  validateSpec(spec);
  // x - x0 = -xdd / omega0^2, so Ep(t) = m xdd^2 / (2 omega0^2).
  double integral = numerics::quadrature(
      [&](double t) {
        double a = x(t).d2;
        return a * a;
      },
      0.0, spec.tf, {});
  return spec.mass * integral / (2 * spec.omega0 * spec.omega0 * spec.tf);
}

double octMeanPotential(const TransportSpec& spec) {
  validateSpec(spec);
  return 6 * spec.mass * spec.d * spec.d / (spec.omega0 * spec.omega0 * std::pow(spec.tf, 4));
}

double septicEnergyClosedForm(double a3, double a4, const TransportSpec& spec) {
  validateSpec(spec);
  double u3 = a3 - 21, u4 = a4 + 70;
  double bracket = 7 + (16.0 / 77) * u3 * u3 + (4.0 / 385) * u4 * u4 + u3 * u4 / 11;
  return bracket * spec.mass * spec.d * spec.d /
         (spec.omega0 * spec.omega0 * std::pow(spec.tf, 4));
}

TransportProtocol quinticProtocol(const TransportSpec& spec) {
  validateSpec(spec);
  auto poly = std::make_shared<ansatz::ConstrainedPolynomial>(
      ansatz::fitConstrainedPolynomial(5, sixConditions(spec.d, spec.tf), {}, spec.tf));
  return protocolFromShape([poly](double t) { return poly->eval(t); }, spec, "quintic-IE");
}

TimeOptimal timeOptimalProtocol(const TransportSpec& spec) {
  validateSpec(spec);
  if (!(spec.deltaBound > 0))
    throw NumericsError("timeOptimalProtocol: deltaBound must be positive");
  const double w0 = spec.omega0, d = spec.d, delta = spec.deltaBound;
  const double tf = (2.0 / w0) * std::sqrt(d / delta);
  const double t1 = tf / 2;
  TransportSpec eff = spec;
  eff.tf = tf;
  auto x = [=](double t) -> ShapeEval {
    ShapeEval e;
    if (t <= t1) {
      e.value = w0 * w0 * delta * t * t / 2;
      e.d1 = w0 * w0 * delta * t;
      e.d2 = w0 * w0 * delta;
    } else {
      e.value = d - w0 * w0 * delta * (t - tf) * (t - tf) / 2;
      e.d1 = -w0 * w0 * delta * (t - tf);
      e.d2 = -w0 * w0 * delta;
    }
    return e;
  };
  TransportProtocol p = protocolFromShape(x, eff, "time-optimal");
  p.controlBreakpoints = {t1};
  // Relative displacement jumps from rest to -delta at t=0 and back at tf.
  p.trapJumps = {{0.0, 0.0, delta}, {tf, d - delta, d}};
  return {std::move(p), t1, tf};
}

TransportProtocol energyOptimalProtocol(const TransportSpec& spec) {
  validateSpec(spec);
  const double d = spec.d, tf = spec.tf, w0 = spec.omega0;
  auto x = [=](double t) -> ShapeEval {
    double tau = t / tf;
    ShapeEval e;
    e.value = d * tau * tau * (3 - 2 * tau);
    e.d1 = d * (6 * tau - 6 * tau * tau) / tf;
    e.d2 = d * (6 - 12 * tau) / (tf * tf);
    return e;
  };
  TransportProtocol p = protocolFromShape(x, spec, "oct-energy");
  double jump = 6 * d / (w0 * w0 * tf * tf);
  p.trapJumps = {{0.0, 0.0, jump}, {tf, d - jump, d}};
  return p;
}

PolyOptimum optimizePolynomial(const TransportSpec& spec, int degree) {
  validateSpec(spec);
  if (degree < 5) throw NumericsError("optimizePolynomial: degree must be at least 5");
  auto conds = sixConditions(spec.d, spec.tf);

  if (degree == 5) {
    numerics::OptimizationResult opt;
    opt.converged = true;
    TransportProtocol p = quinticProtocol(spec);
    opt.bestCost = p.meanPotentialJoules;
    return {opt, std::move(p)};
  }

  // Free coefficients a3..a(degree-3); the top three plus a0..a2 are solved
  // from the six conditions. (The polynomial is in units of d.)
  std::vector<int> freeIdx;
  for (int i = 3; i <= degree - 3; ++i) freeIdx.push_back(i);

  (void)conds;
  // The energy is an exact quadratic form in the free coefficients, so the
  // optimum is found directly. Working with y = x'' (units of d, tau = t/tf)
  // in the shifted-Legendre basis makes the quadratic form diagonal, leaving
  // only a 4x4 KKT system for the boundary constraints:
  //   y(0) = y(1) = 0,  Int y dtau = 0,  Int (1 - tau) y dtau = 1.
  const std::size_t nf = freeIdx.size();
  const int K = degree - 2;  // y has degree K
  std::vector<std::vector<double>> C(4, std::vector<double>(K + 1, 0.0));
  for (int k = 0; k <= K; ++k) {
    C[0][k] = (k % 2 == 0) ? 1.0 : -1.0;  // P~_k(0)
    C[1][k] = 1.0;                        // P~_k(1)
  }
  C[2][0] = 1.0;
  C[3][0] = 0.5;
  if (K >= 1) C[3][1] = -1.0 / 6.0;
  const double target[4] = {0.0, 0.0, 0.0, 1.0};

  // S = C diag(2k+1) C^T, then S lambda = target.
  double S[4][4] = {};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k <= K; ++k) S[i][j] += (2.0 * k + 1.0) * C[i][k] * C[j][k];
  double lambda[4];
  {
    double M[4][5];
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) M[i][j] = S[i][j];
      M[i][4] = target[i];
    }
    for (int col = 0; col < 4; ++col) {
      int piv = col;
      for (int r = col + 1; r < 4; ++r)
        if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
      if (std::abs(M[piv][col]) < 1e-300)
        throw NumericsError("optimizePolynomial: singular constraint system");
      if (piv != col)
        for (int cc = 0; cc <= 4; ++cc) std::swap(M[piv][cc], M[col][cc]);
      for (int r = col + 1; r < 4; ++r) {
        double fmul = M[r][col] / M[col][col];
        for (int cc = col; cc <= 4; ++cc) M[r][cc] -= fmul * M[col][cc];
      }
    }
    for (int col = 3; col >= 0; --col) {
      lambda[col] = M[col][4];
      for (int cc = col + 1; cc < 4; ++cc) lambda[col] -= M[col][cc] * lambda[cc];
      lambda[col] /= M[col][col];
    }
  }
  std::vector<double> q(K + 1);
  double normSq = 0;  // Int_0^1 y^2 dtau
  for (int k = 0; k <= K; ++k) {
    double ct = 0;
    for (int i = 0; i < 4; ++i) ct += C[i][k] * lambda[i];
    q[k] = (2.0 * k + 1.0) * ct;
    normSq += q[k] * q[k] / (2.0 * k + 1.0);
  }
  // Monomial coefficients of y via P~_k(tau) = sum_m (-1)^{k+m} C(k,m) C(k+m,m) tau^m,
  // then x_{m+2} = y_m / ((m+1)(m+2)).
  std::vector<double> ym(K + 1, 0.0);
  for (int k = 0; k <= K; ++k) {
    double coef = (k % 2 == 0) ? 1.0 : -1.0;  // m = 0 term, sign (-1)^k
    for (int m = 0; m <= k; ++m) {
      ym[m] += q[k] * coef;
      // advance C(k,m) C(k+m,m) (-1)^{k+m} to m+1
      coef *= -1.0 * (double(k) - m) * (double(k) + m + 1) / ((m + 1.0) * (m + 1.0));
    }
  }
  std::vector<double> initial(nf, 0.0);
  for (std::size_t i = 0; i < nf; ++i) {
    int n = freeIdx[i];
    if (n >= 2 && n - 2 <= K) initial[i] = ym[n - 2] / (double(n - 1) * double(n));
  }

  numerics::OptimizationResult opt;
  opt.bestParams = initial;
  opt.bestCost = spec.mass * spec.d * spec.d * normSq /
                 (2 * spec.omega0 * spec.omega0 * std::pow(spec.tf, 4));
  opt.evaluations = 1;
  opt.converged = true;
  opt.simplexSpread = 0.0;

  // The monomial coefficients above reach ~1e9 for high degrees, so the
  // trajectory is evaluated in the Legendre representation (series values
  // bounded by 1), integrating twice in coefficient space:
  //   Int P~_k dtau = (P~_{k+1} - P~_{k-1}) / (2(2k+1)),  Int P~_0 = (P~_1 + P~_0)/2.
  auto integrateCoeffs = [](const std::vector<double>& c) {
    std::vector<double> F(c.size() + 1, 0.0);
    F[1] += c[0] / 2;
    F[0] += c[0] / 2;
    for (std::size_t k = 1; k < c.size(); ++k) {
      F[k + 1] += c[k] / (2.0 * (2.0 * k + 1.0));
      F[k - 1] -= c[k] / (2.0 * (2.0 * k + 1.0));
    }
    double at0 = 0;
    for (std::size_t k = 0; k < F.size(); ++k) at0 += (k % 2 == 0 ? F[k] : -F[k]);
    F[0] -= at0;  // F(0) = 0
    return F;
  };
  auto yC = std::make_shared<std::vector<double>>(q);
  auto vC = std::make_shared<std::vector<double>>(integrateCoeffs(q));
  auto xC = std::make_shared<std::vector<double>>(integrateCoeffs(*vC));
  const double tf = spec.tf, d = spec.d;
  auto evalSeries = [](const std::vector<double>& c, double x) {
    // series in P~_k via (k+1) P~_{k+1} = (2k+1)(2x-1) P~_k - k P~_{k-1}
    double pm1 = 1.0, p0 = 2 * x - 1, acc = c[0];
    if (c.size() > 1) acc += c[1] * p0;
    for (std::size_t k = 1; k + 1 < c.size(); ++k) {
      double p1 = ((2.0 * k + 1.0) * (2 * x - 1) * p0 - k * pm1) / (k + 1.0);
      acc += c[k + 1] * p1;
      pm1 = p0;
      p0 = p1;
    }
    return acc;
  };
  auto x = [=](double t) -> ShapeEval {
    double tau = t / tf;
    ShapeEval e;
    e.value = d * evalSeries(*xC, tau);
    e.d1 = d * evalSeries(*vC, tau) / tf;
    e.d2 = d * evalSeries(*yC, tau) / (tf * tf);
    return e;
  };
  TransportProtocol p = protocolFromShape(x, spec, "P" + std::to_string(degree));
  return {opt, std::move(p)};
}

TransportProtocol hyperbolicProtocol(const TransportSpec& spec, double a1, double a2) {
  validateSpec(spec);
  auto shape =
      std::make_shared<ansatz::TanhTan>(spec.d / 2, spec.d / 2, a1, a2, spec.tf);
  return protocolFromShape([shape](double t) { return shape->eval(t); }, spec, "hyperbolic");
}

HyperbolicOptimum optimizeHyperbolic(const TransportSpec& spec) {
  validateSpec(spec);
  // Deterministic grid search: the objective has long flat valleys where
  // endpoint saturation trades off against interior cost, so a simplex walk
  // can wander; a fixed grid with a feasibility cut is reproducible.
  const double octE = octMeanPotential(spec);
  double bestCost = std::numeric_limits<double>::infinity();
  double bestA1 = 0, bestA2 = 0;
  long evals = 0;
  for (int i = 1; i <= 50; ++i) {       // a1 in (0, 5], step 0.1
    for (int j = 1; j <= 40; ++j) {     // a2 in (1, 3], step 0.05
      double a1 = 0.1 * i;
      double a2 = 1.0 + 0.05 * j;
      ansatz::TanhTan shape(spec.d / 2, spec.d / 2, a1, a2, spec.tf);
      double mismatch = std::abs(shape.eval(0.0).value);
      if (mismatch > 1e-3 * spec.d) continue;  // saturation misses the endpoints
      ++evals;
      double cost = meanPotential([&](double t) { return shape.eval(t); }, spec);
      if (cost < bestCost) {
        bestCost = cost;
        bestA1 = a1;
        bestA2 = a2;
      }
    }
  }
  if (!std::isfinite(bestCost))
    throw NumericsError("optimizeHyperbolic: no admissible (a1, a2) on the search grid");

  numerics::OptimizationResult opt;
  opt.bestParams = {bestA1, bestA2};
  opt.bestCost = bestCost;
  opt.evaluations = evals;
  opt.converged = true;

  HyperbolicOptimum out;
  out.opt = opt;
  out.protocol = hyperbolicProtocol(spec, bestA1, bestA2);
  out.endpointMismatch = std::abs(out.protocol.x(0.0).value);
  (void)octE;
  return out;
}

ClosureReport verifyTransport(const TransportProtocol& protocol, const TransportSpec& spec) {
  const double w0 = spec.omega0, tf = protocol.tf, d = protocol.d;
  numerics::OdeOptions oopts;
  oopts.relTol = 1e-10;
  oopts.absTol = 1e-12 * d;
  oopts.breakpoints = protocol.controlBreakpoints;
  ShapeEval start = protocol.x(0.0);
  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -w0 * w0 * (y[0] - protocol.x0(t));
  };
  numerics::OdeTrajectory traj =
      numerics::integrateAdaptive(rhs, {start.value, start.d1}, 0.0, tf, oopts);

  ClosureReport rep;
  double xEnd = traj.finalState()[0], vEnd = traj.finalState()[1];
  // Self-consistency against the protocol's own stated endpoint; the physical
  // target (d, at rest) is scored separately by excitationRatio, which is the
  // meaningful miss metric for shapes that only saturate toward the ends.
  ShapeEval stated = protocol.x(tf);
  rep.finalValueError = std::abs(xEnd - stated.value) / d;
  rep.finalSlopeError = std::abs(vEnd - stated.d1) * tf / d;
  double eps = spec.mass * w0 * w0 * d * d / 2;
  rep.excitationRatio =
      (spec.mass / 2) * (vEnd * vEnd + w0 * w0 * (xEnd - d) * (xEnd - d)) / eps;
  for (int i = 1; i < 1000; ++i) {
    double t = tf * i / 1000.0;
    bool nearJump = false;
    for (double bp : protocol.controlBreakpoints)
      if (std::abs(t - bp) < 1e-6 * tf) nearJump = true;
    if (nearJump) continue;
    ShapeEval e = protocol.x(t);
    double res = std::abs(e.d2 + w0 * w0 * (e.value - protocol.x0(t))) / (w0 * w0 * d);
    rep.maxNewtonResidual = std::max(rep.maxNewtonResidual, res);
  }
  return rep;
}

}  // namespace staforge::transport
