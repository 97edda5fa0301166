#pragma once

#include <functional>
#include <utility>

#include "socl/types.hpp"

namespace socl {

/**
 * Running cost c(x, u) = (l(x) + 1/2 u'Ru) dt with R symmetric positive
 * definite. Gradient/Hessian accessors return derivatives of l alone; the
 * dt factor is applied where the recursions need it.
 */
class StageCost {
 public:
  using ScalarFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;
  using HessFn = std::function<Matrix(const Vector&)>;

  StageCost(ScalarFn state_cost, Matrix control_penalty, GradFn gradient, HessFn hessian);

  double state_cost(const Vector& x) const { return l_(x); }
  Vector gradient(const Vector& x) const { return grad_(x); }
  Matrix hessian(const Vector& x) const { return hess_(x); }
  const Matrix& control_penalty() const { return R_; }

  /// Full stage cost (l(x) + 1/2 u'Ru) * dt.
  double evaluate(const Vector& x, const Vector& u, double dt) const {
    return (l_(x) + 0.5 * u.dot(R_ * u)) * dt;
  }

 private:
  ScalarFn l_;
  Matrix R_;
  GradFn grad_;
  HessFn hess_;
};

/// Terminal cost c_T(x) with gradient and Hessian.
class TerminalCost {
 public:
  using ScalarFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;
  using HessFn = std::function<Matrix(const Vector&)>;

  TerminalCost(ScalarFn value, GradFn gradient, HessFn hessian)
      : value_(std::move(value)), grad_(std::move(gradient)), hess_(std::move(hessian)) {
    require(static_cast<bool>(value_) && static_cast<bool>(grad_) && static_cast<bool>(hess_),
            "TerminalCost: value, gradient and hessian are all required");
  }

  double value(const Vector& x) const { return value_(x); }
  Vector gradient(const Vector& x) const { return grad_(x); }
  Matrix hessian(const Vector& x) const { return hess_(x); }

 private:
  ScalarFn value_;
  GradFn grad_;
  HessFn hess_;
};

/// The (stage, terminal) pair every solver and simulator consumes.
struct CostModel {
  StageCost stage;
  TerminalCost terminal;
};

/// l(x) = 1/2 (x - target)'Q(x - target) with the matching derivatives.
StageCost make_quadratic_stage(const Matrix& Q, const Matrix& R, const Vector& target);

/// c_T(x) = 1/2 (x - target)'QT(x - target).
TerminalCost make_quadratic_terminal(const Matrix& QT, const Vector& target);

/// Quadratic stage + terminal cost about a common target state.
CostModel make_quadratic_cost(const Matrix& Q, const Matrix& R, const Matrix& QT,
                              const Vector& target);

}  // namespace socl
