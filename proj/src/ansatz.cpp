#include "staforge/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace staforge::ansatz {

using numerics::NumericsError;

void ShapeFunction::checkDomain(double t) const {
  if (t < -1e-12 * span_ || t > span_ * (1 + 1e-12)) {
    std::ostringstream msg;
    msg << "shape evaluated outside span [0, " << span_ << "] at t = " << t;
    throw NumericsError(msg.str());
  }
}

ConstrainedPolynomial::ConstrainedPolynomial(std::vector<double> coeffs, double span)
    : ShapeFunction(span), coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw NumericsError("polynomial needs at least one coefficient");
}

ShapeEval ConstrainedPolynomial::eval(double t) const {
  checkDomain(t);
  const double T = span();
  const double tau = t / T;
  // Horner pass for the value and tau-derivatives simultaneously.
  double p = 0, dp = 0, ddp = 0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) {
    ddp = ddp * tau + 2 * dp;
    dp = dp * tau + p;
    p = p * tau + coeffs_[k];
  }
  return {p, dp / T, ddp / (T * T)};
}

ConstrainedPolynomial fitConstrainedPolynomial(int degree,
                                               std::vector<BoundaryCondition> conditions,
                                               const std::map<int, double>& freeParams,
                                               double span) {
  const int nCoeff = degree + 1;
  if (nCoeff - static_cast<int>(freeParams.size()) != static_cast<int>(conditions.size()))
    throw NumericsError("fitConstrainedPolynomial: conditions/free-parameter count mismatch");
  for (const auto& [idx, val] : freeParams) {
    (void)val;
    if (idx < 0 || idx > degree)
      throw NumericsError("fitConstrainedPolynomial: free coefficient index out of range");
  }
  // Canonical condition order: by time, then derivative order (determinism of
  // the pivoting sequence).
  std::sort(conditions.begin(), conditions.end(), [](const auto& a, const auto& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.derivativeOrder < b.derivativeOrder;
  });

  std::vector<int> solved;  // coefficient indices determined by the conditions
  for (int i = 0; i <= degree; ++i)
    if (!freeParams.count(i)) solved.push_back(i);
  const int m = static_cast<int>(solved.size());

  // Row r: condition r applied to tau^n terms. d^k/dt^k tau^n at tau:
  // n(n-1)..(n-k+1) tau^{n-k} / T^k.
  auto basis = [&](int n, int k, double t) {
    double c = 1;
    for (int j = 0; j < k; ++j) c *= (n - j);
    if (n - k < 0) return 0.0;
    double tau = t / span;
    return c * std::pow(tau, n - k) / std::pow(span, k);
  };

  std::vector<std::vector<double>> A(m, std::vector<double>(m + 1, 0.0));
  for (int r = 0; r < m; ++r) {
    const auto& bc = conditions[r];
    if (bc.derivativeOrder < 0 || bc.derivativeOrder > 2)
      throw NumericsError("fitConstrainedPolynomial: derivative order must be 0..2");
    if (bc.time < 0 || bc.time > span)
      throw NumericsError("fitConstrainedPolynomial: condition time outside span");
    double rhsAdjust = bc.value;
    for (const auto& [idx, val] : freeParams)
      rhsAdjust -= val * basis(idx, bc.derivativeOrder, bc.time);
    for (int c = 0; c < m; ++c) A[r][c] = basis(solved[c], bc.derivativeOrder, bc.time);
    A[r][m] = rhsAdjust;
  }

  // Partial-pivot Gaussian elimination.
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-13) {
      std::ostringstream msg;
      msg << "fitConstrainedPolynomial: singular constraint system (degree " << degree << ", "
          << conditions.size() << " conditions)";
      throw NumericsError(msg.str());
    }
    std::swap(A[col], A[piv]);
    for (int r = col + 1; r < m; ++r) {
      double f = A[r][col] / A[col][col];
      for (int c = col; c <= m; ++c) A[r][c] -= f * A[col][c];
    }
  }
  std::vector<double> x(m);
  for (int r = m - 1; r >= 0; --r) {
    double s = A[r][m];
    for (int c = r + 1; c < m; ++c) s -= A[r][c] * x[c];
    x[r] = s / A[r][r];
  }

  std::vector<double> coeffs(nCoeff, 0.0);
  for (int c = 0; c < m; ++c) coeffs[solved[c]] = x[c];
  for (const auto& [idx, val] : freeParams) coeffs[idx] = val;
  return ConstrainedPolynomial(std::move(coeffs), span);
}

TanhTan::TanhTan(double amplitude, double offset, double a1, double aWidth, double span)
    : ShapeFunction(span), amplitude_(amplitude), offset_(offset), a1_(a1), aWidth_(aWidth) {
  if (!(aWidth > 1))
    throw NumericsError("TanhTan: width parameter must exceed 1 (tan singularity inside span)");
}

ShapeEval TanhTan::eval(double t) const {
  checkDomain(t);
  const double T = span();
  const double w = M_PI / aWidth_;                  // angular factor
  const double phi = w * (t / T - 0.5);             // tan argument, |phi| < pi/2
  const double tn = std::tan(phi);
  const double sec2 = 1 + tn * tn;
  const double g = a1_ * tn;
  const double th = std::tanh(g);
  const double sech2 = 1 - th * th;
  // Chain rule in t: dphi/dt = w/T.
  const double dphi = w / T;
  const double dg = a1_ * sec2 * dphi;
  const double ddg = a1_ * 2 * tn * sec2 * dphi * dphi;
  const double d1 = amplitude_ * sech2 * dg;
  const double d2 = amplitude_ * (sech2 * ddg - 2 * th * sech2 * dg * dg);
  return {offset_ + amplitude_ * th, d1, d2};
}

}  // namespace staforge::ansatz
