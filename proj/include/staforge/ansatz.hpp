#pragma once

#include <map>
#include <memory>
#include <vector>

#include "staforge/numerics.hpp"

namespace staforge::ansatz {

// Value and first two time derivatives of a shape at one instant.
struct ShapeEval {
  double value = 0;
  double d1 = 0;
  double d2 = 0;
};

// A twice-differentiable scalar trajectory on [0, T].
class ShapeFunction {
 public:
  virtual ~ShapeFunction() = default;
  virtual ShapeEval eval(double t) const = 0;
  double span() const { return span_; }

 protected:
  explicit ShapeFunction(double span) : span_(span) {}
  void checkDomain(double t) const;

 private:
  double span_;
};

struct BoundaryCondition {
  int derivativeOrder = 0;  // 0, 1 or 2, with respect to physical time t
  double time = 0;          // in [0, T]
  double value = 0;
};

// Polynomial in normalized time tau = t/T; evaluation returns derivatives with
// respect to t.
class ConstrainedPolynomial : public ShapeFunction {
 public:
  ConstrainedPolynomial(std::vector<double> coeffs, double span);
  ShapeEval eval(double t) const override;
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;  // coeffs_[n] multiplies tau^n
};

// Solves the linear system pinning the non-free coefficients so that every
// boundary condition holds; freeParams maps coefficient index -> fixed value.
ConstrainedPolynomial fitConstrainedPolynomial(int degree,
                                               std::vector<BoundaryCondition> conditions,
                                               const std::map<int, double>& freeParams,
                                               double span);

// offset + amplitude * tanh(a1 * tan(pi/aWidth * (t/T - 1/2))); requires
// aWidth > 1 so the tan singularity sits outside the span.
class TanhTan : public ShapeFunction {
 public:
  TanhTan(double amplitude, double offset, double a1, double aWidth, double span);
  ShapeEval eval(double t) const override;
  double a1() const { return a1_; }
  double aWidth() const { return aWidth_; }

 private:
  double amplitude_, offset_, a1_, aWidth_;
};

}  // namespace staforge::ansatz
