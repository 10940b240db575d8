#include "staforge/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace staforge::numerics {

namespace {
double& defaultRelTolStorage() {
  static double tol = 1e-10;
  return tol;
}
}  // namespace

double defaultRelTol() { return defaultRelTolStorage(); }

void setDefaultRelTol(double tol) {
  if (!(tol > 0) || !(tol < 1)) throw NumericsError("setDefaultRelTol: tolerance must be in (0, 1)");
  defaultRelTolStorage() = tol;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-minus-4th order error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

void checkFinite(std::span<const double> v, double t, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      std::ostringstream msg;
      msg << "non-finite " << what << " at t = " << t;
      throw NumericsError(msg.str());
    }
  }
}

double initialStepGuess(const VectorField& rhs, double t0, const std::vector<double>& y0,
                        const std::vector<double>& f0, double span, double relTol,
                        double absTol) {
  double dy = 0, df = 0;
  for (std::size_t i = 0; i < y0.size(); ++i) {
    double sc = absTol + relTol * std::abs(y0[i]);
    dy = std::max(dy, std::abs(y0[i]) / sc);
    df = std::max(df, std::abs(f0[i]) / sc);
  }
  double h = (df > 1e-30) ? 0.01 * dy / df : 1e-6 * span;
  if (h <= 0 || !std::isfinite(h)) h = 1e-6 * span;
  (void)rhs;
  (void)t0;
  return std::min(h, 0.1 * span);
}

}  // namespace

std::vector<double> OdeTrajectory::sample(double t) const {
  if (times.empty()) throw NumericsError("sample on empty trajectory");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  std::size_t lo = hi - 1;
  double h = times[hi] - times[lo];
  double s = (t - times[lo]) / h;
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  double h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s);
  double h11 = s * s * (s - 1);
  std::vector<double> out(dimension());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = h00 * states[lo][i] + h * h10 * derivatives[lo][i] + h01 * states[hi][i] +
             h * h11 * derivatives[hi][i];
  }
  return out;
}

OdeTrajectory integrateAdaptive(const VectorField& rhs, std::vector<double> y0, double t0,
                                double t1, const OdeOptions& opts) {
  if (!(t1 > t0)) throw NumericsError("integrateAdaptive: t1 must exceed t0");
  if (!(opts.relTol > 0) || !(opts.absTol > 0))
    throw NumericsError("integrateAdaptive: tolerances must be positive");

  const std::size_t n = y0.size();
  // Segment boundaries: span endpoints plus interior breakpoints, deduplicated.
  std::vector<double> cuts{t0};
  for (double b : opts.breakpoints)
    if (b > t0 && b < t1) cuts.push_back(b);
  cuts.push_back(t1);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double a, double b) { return std::abs(a - b) < 1e-14 * (t1 - t0); }),
             cuts.end());

  OdeTrajectory traj;
  std::vector<double> y = std::move(y0);
  std::vector<double> f(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n);
  // Stage times that coincide with a segment boundary are nudged into the
  // segment interior so piecewise controls are sampled on the correct side of
  // their discontinuity.
  double segLo = cuts[0], segHi = cuts[1];
  auto rhsc = [&](double t, std::span<const double> yy, std::span<double> dy) {
    double delta = 1e-9 * (segHi - segLo);
    rhs(std::clamp(t, segLo + delta, segHi - delta), yy, dy);
  };
  rhsc(t0, y, f);
  checkFinite(f, t0, "rhs");
  traj.times.push_back(t0);
  traj.states.push_back(y);
  traj.derivatives.push_back(f);

  long steps = 0;
  double errOld = 1.0;
  double h = opts.initialStep > 0
                 ? opts.initialStep
                 : initialStepGuess(rhs, t0, y, f, t1 - t0, opts.relTol, opts.absTol);

  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    double t = cuts[seg];
    const double tEnd = cuts[seg + 1];
    segLo = t;
    segHi = tEnd;
    if (seg > 0) {
      // Re-evaluate the derivative on the new side of the breakpoint.
      rhsc(t, y, f);
      checkFinite(f, t, "rhs");
      traj.derivatives.back() = f;
    }
    h = std::min(h, tEnd - t);
    while (t < tEnd) {
      if (++steps > opts.maxSteps) throw NumericsError("integrateAdaptive: step budget exhausted");
      bool lastStep = (t + h >= tEnd - 1e-14 * (t1 - t0));
      if (lastStep) h = tEnd - t;

      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * f[i];
      rhsc(t + c2 * h, ytmp, k2);
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * f[i] + a32 * k2[i]);
      rhsc(t + c3 * h, ytmp, k3);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
      rhsc(t + c4 * h, ytmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      rhsc(t + c5 * h, ytmp, k5);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      rhsc(t + h, ytmp, k6);
      for (std::size_t i = 0; i < n; ++i)
        y5[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      rhsc(t + h, y5, k7);
      checkFinite(k7, t + h, "rhs");

      double err = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double ei = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                         e7 * k7[i]);
        double sc = opts.absTol + opts.relTol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err += (ei / sc) * (ei / sc);
      }
      err = std::sqrt(err / static_cast<double>(n));

      if (err <= 1.0 || !std::isfinite(err)) {
        if (!std::isfinite(err)) throw NumericsError("integrateAdaptive: non-finite error norm");
        t = lastStep ? tEnd : t + h;
        y = y5;
        f = k7;  // FSAL
        traj.times.push_back(t);
        traj.states.push_back(y);
        traj.derivatives.push_back(f);
        // PI controller (Hairer's beta = 0.04).
        double fac = 0.9 * std::pow(std::max(err, 1e-16), -0.17) * std::pow(errOld, 0.04);
        fac = std::clamp(fac, 0.2, 5.0);
        errOld = std::max(err, 1e-16);
        h *= fac;
      } else {
        double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
        h *= fac;
        if (h < 1e-15 * (t1 - t0)) {
          std::ostringstream msg;
          msg << "integrateAdaptive: step size underflow at t = " << t;
          throw NumericsError(msg.str());
        }
      }
      if (t >= tEnd) break;  // keep h intact for the next segment
      h = std::min(h, tEnd - t);
    }
  }
  traj.times.back() = t1;  // land exactly on the requested endpoint
  return traj;
}

namespace {

// QUADPACK 15-point Kronrod abscissae/weights and the embedded 7-point Gauss
// weights on [-1, 1].
constexpr double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                            0.741531185599394, 0.586087235467691, 0.405845151377397,
                            0.207784955007898, 0.0};
constexpr double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                            0.140653259715525, 0.169004726639267, 0.190350578064785,
                            0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

struct Panel {
  double kronrod;
  double gauss;
};

Panel gk15(const std::function<double(double)>& g, double a, double b) {
  const double c = 0.5 * (a + b), hl = 0.5 * (b - a);
  auto f = [&](double x) {
    double v = g(x);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "quadrature: non-finite integrand at x = " << x;
      throw NumericsError(msg.str());
    }
    return v;
  };
  double fc = f(c);
  double resk = kWgk[7] * fc, resg = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    double fsum = f(c - hl * kXgk[j]) + f(c + hl * kXgk[j]);
    resk += kWgk[j] * fsum;
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
  }
  return {resk * hl, resg * hl};
}

double adaptGk(const std::function<double(double)>& g, double a, double b, double tolPerWidth,
               double floorPerWidth, int depth, int maxDepth) {
  Panel p = gk15(g, a, b);
  double err = std::abs(p.kronrod - p.gauss);
  double budget = tolPerWidth * (b - a) + floorPerWidth * (b - a);
  if (err <= budget || depth >= maxDepth) return p.kronrod;
  double m = 0.5 * (a + b);
  return adaptGk(g, a, m, tolPerWidth, floorPerWidth, depth + 1, maxDepth) +
         adaptGk(g, m, b, tolPerWidth, floorPerWidth, depth + 1, maxDepth);
}

}  // namespace

double quadrature(const std::function<double(double)>& g, double a, double b,
                  const QuadratureOptions& opts) {
  if (!(b > a)) throw NumericsError("quadrature: b must exceed a");
  std::vector<double> cuts{a};
  for (double x : opts.breakpoints)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Rough whole-interval value to scale the relative tolerance.
  double rough = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) rough += gk15(g, cuts[i], cuts[i + 1]).kronrod;
  double scale = std::abs(rough) + 1e-30;
  double tolPerWidth = opts.relTol * scale / (b - a);
  double floorPerWidth = 1e-14 / (b - a);

  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += adaptGk(g, cuts[i], cuts[i + 1], tolPerWidth, floorPerWidth, 0, opts.maxDepth);
  return total;
}

namespace {

bool lexLess(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Vertex {
  std::vector<double> x;
  double f;
};

// Strict weak order: cost first, then lexicographic parameters for determinism.
bool vertexLess(const Vertex& a, const Vertex& b) {
  if (a.f != b.f) return a.f < b.f;
  return lexLess(a.x, b.x);
}

}  // namespace

OptimizationResult minimize(const std::function<double(std::span<const double>)>& objective,
                            std::vector<double> initial, std::vector<double> scale,
                            const MinimizeOptions& opts) {
  const std::size_t n = initial.size();
  if (scale.size() != n) throw NumericsError("minimize: scale/initial dimension mismatch");
  for (double s : scale)
    if (!(s > 0)) throw NumericsError("minimize: scale entries must be positive");

  long evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  double f0 = eval(initial);
  if (!std::isfinite(f0)) throw NumericsError("minimize: objective non-finite at initial point");

  OptimizationResult best;
  best.bestParams = initial;
  best.bestCost = f0;

  auto spreadOf = [&](const std::vector<Vertex>& s) {
    double sp = 0;
    for (std::size_t v = 1; v < s.size(); ++v)
      for (std::size_t i = 0; i < n; ++i)
        sp = std::max(sp, std::abs(s[v].x[i] - s[0].x[i]));
    return sp;
  };

  std::vector<double> start = initial;
  double startF = f0;
  bool anyConverged = false;
  double lastSpread = 0;

  for (int round = 0; round <= opts.restarts; ++round) {
    double shrinkPow = std::pow(0.5, round);  // deterministic re-inflation pattern
    std::vector<Vertex> simplex;
    simplex.push_back({start, startF});
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x = start;
      x[i] += scale[i] * shrinkPow;
      simplex.push_back({x, eval(x)});
    }
    std::sort(simplex.begin(), simplex.end(), vertexLess);

    while (evals < opts.maxEvals) {
      lastSpread = spreadOf(simplex);
      double fSpread = simplex.back().f - simplex.front().f;
      if (lastSpread <= opts.tol && fSpread <= opts.tol * (1 + std::abs(simplex.front().f))) {
        anyConverged = true;
        break;
      }
      std::vector<double> centroid(n, 0.0);
      for (std::size_t v = 0; v + 1 < simplex.size(); ++v)
        for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].x[i];
      for (double& c : centroid) c /= static_cast<double>(n);

      auto blend = [&](double coef) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i)
          x[i] = centroid[i] + coef * (simplex.back().x[i] - centroid[i]);
        return x;
      };

      Vertex refl{blend(-1.0), 0};
      refl.f = eval(refl.x);
      if (refl.f < simplex.front().f) {
        Vertex expd{blend(-2.0), 0};
        expd.f = eval(expd.x);
        simplex.back() = vertexLess(expd, refl) ? expd : refl;
      } else if (refl.f < simplex[simplex.size() - 2].f) {
        simplex.back() = refl;
      } else {
        Vertex contr{blend(refl.f < simplex.back().f ? -0.5 : 0.5), 0};
        contr.f = eval(contr.x);
        if (contr.f < std::min(refl.f, simplex.back().f)) {
          simplex.back() = contr;
        } else {
          for (std::size_t v = 1; v < simplex.size(); ++v) {
            for (std::size_t i = 0; i < n; ++i)
              simplex[v].x[i] = 0.5 * (simplex[v].x[i] + simplex[0].x[i]);
            simplex[v].f = eval(simplex[v].x);
          }
        }
      }
      std::sort(simplex.begin(), simplex.end(), vertexLess);
    }

    const Vertex& inc = simplex.front();
    if (inc.f < best.bestCost ||
        (inc.f == best.bestCost && lexLess(inc.x, best.bestParams))) {
      best.bestCost = inc.f;
      best.bestParams = inc.x;
    }
    start = best.bestParams;
    startF = best.bestCost;
    if (evals >= opts.maxEvals) break;
  }

  best.evaluations = evals;
  best.converged = anyConverged && lastSpread <= opts.tol;
  best.simplexSpread = lastSpread;
  return best;
}

double findRoot(const std::function<double(double)>& g, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double fa = g(a), fb = g(b);
  if (!std::isfinite(fa) || !std::isfinite(fb))
    throw NumericsError("findRoot: non-finite value at bracket endpoint");
  if (fa * fb > 0) throw NumericsError("findRoot: no sign change over bracket");
  if (fa == 0) return a;
  if (fb == 0) return b;
  if (std::abs(fa) < std::abs(fb)) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = a, fc = fa, d = b - a;
  bool mflag = true;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(b - a) <= tol || fb == 0) return b;
    double s;
    if (fa != fc && fb != fc) {
      s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
          c * fa * fb / ((fc - fa) * (fc - fb));
    } else {
      s = b - fb * (b - a) / (fb - fa);
    }
    double m = 0.5 * (a + b);
    bool bad = !((s > std::min(b, m) && s < std::max(b, m))) ||
               (mflag && std::abs(s - b) >= std::abs(b - c) / 2) ||
               (!mflag && std::abs(s - b) >= std::abs(c - d) / 2) ||
               (mflag && std::abs(b - c) < tol) || (!mflag && std::abs(c - d) < tol);
    if (bad) {
      s = m;
      mflag = true;
    } else {
      mflag = false;
    }
    double fs = g(s);
    if (!std::isfinite(fs)) throw NumericsError("findRoot: non-finite value during iteration");
    d = c;
    c = b;
    fc = fb;
    if (fa * fs < 0) {
      b = s;
      fb = fs;
    } else {
      a = s;
      fa = fs;
    }
    if (std::abs(fa) < std::abs(fb)) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
  }
  return b;
}

}  // namespace staforge::numerics
