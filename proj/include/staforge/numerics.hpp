#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace staforge::numerics {

// Raised by any kernel routine on a violated precondition or a numerical
// breakdown (step underflow, non-finite sample, missing sign change, ...).
class NumericsError : public std::runtime_error {
 public:
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

// Process-wide default relative tolerance (overridable via the CLI's
// STA_FORGE_TOL environment hook). Set once at startup; not synchronized.
double defaultRelTol();
void setDefaultRelTol(double tol);

using VectorField =
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

// Accepted-step record of an adaptive integration. Derivatives are kept so
// states between nodes can be recovered by cubic Hermite interpolation.
struct OdeTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> derivatives;

  std::size_t dimension() const { return states.empty() ? 0 : states.front().size(); }
  const std::vector<double>& finalState() const { return states.back(); }
  // Cubic Hermite interpolation between the two accepted nodes bracketing t.
  std::vector<double> sample(double t) const;
};

struct OdeOptions {
  double relTol = defaultRelTol();
  double absTol = 1e-12;
  // Times the integrator must land on exactly (control discontinuities).
  std::vector<double> breakpoints;
  double initialStep = 0.0;  // 0 = choose automatically
  long maxSteps = 2000000;
};

// Embedded Dormand-Prince 5(4) pair with PI step-size control.
OdeTrajectory integrateAdaptive(const VectorField& rhs, std::vector<double> y0,
                                double t0, double t1, const OdeOptions& opts = {});

struct QuadratureOptions {
  double relTol = defaultRelTol();
  // Interior points where the integrand has kinks; used as panel boundaries.
  std::vector<double> breakpoints;
  int maxDepth = 48;
};

// Adaptive bisection on 15-point Gauss-Kronrod panels.
double quadrature(const std::function<double(double)>& g, double a, double b,
                  const QuadratureOptions& opts = {});

struct OptimizationResult {
  std::vector<double> bestParams;
  double bestCost = 0.0;
  long evaluations = 0;
  bool converged = false;
  double simplexSpread = 0.0;
};

struct MinimizeOptions {
  double tol = 1e-8;       // parameter tolerance (simplex spread)
  long maxEvals = 40000;
  int restarts = 2;        // deterministic re-inflations at the incumbent
};

// Nelder-Mead. Deterministic: fixed initial simplex from `scale`, fixed
// restart pattern, lexicographic tie-break among equal-cost vertices.
OptimizationResult minimize(const std::function<double(std::span<const double>)>& objective,
                            std::vector<double> initial, std::vector<double> scale,
                            const MinimizeOptions& opts = {});

// Brent-style bracketed root find. Requires g(lo)*g(hi) <= 0; every iterate
// stays inside [lo, hi].
double findRoot(const std::function<double(double)>& g, double lo, double hi,
                double tol = 1e-12);

}  // namespace staforge::numerics
