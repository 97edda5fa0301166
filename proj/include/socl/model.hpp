#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "socl/types.hpp"

namespace socl {

enum class DerivativeMode { kAnalytic, kFiniteDifference };

/**
 * Discrete-time control-affine stochastic model
 *
 *   x' = x + (f(x) + G(x) u) dt + eps * w * sqrt(dt)
 *
 * with drift f : R^n -> R^n and input matrix G : R^n -> R^{n x p}.
 * Analytic first/second derivatives are optional; anything missing is
 * supplied by central finite differences. Instances are immutable after
 * construction and safe to share across threads.
 */
class ControlAffineModel {
 public:
  using DriftFn = std::function<Vector(const Vector&)>;
  using InputFn = std::function<Matrix(const Vector&)>;
  // Jacobian of the drift, n x n.
  using DriftJacFn = std::function<Matrix(const Vector&)>;
  // Per-input Jacobians: element j is the n x n Jacobian of input column j.
  using InputJacFn = std::function<std::vector<Matrix>(const Vector&)>;
  // Per-component Hessians: element c is the n x n Hessian of f_c.
  using DriftHessFn = std::function<std::vector<Matrix>(const Vector&)>;
  // input_hess(x)[j][c] is the n x n Hessian of G(x)(c, j).
  using InputHessFn = std::function<std::vector<std::vector<Matrix>>(const Vector&)>;

  ControlAffineModel(int state_dim, int control_dim, double dt,
                     DriftFn drift, InputFn input_matrix,
                     DerivativeMode mode = DerivativeMode::kFiniteDifference)
      : n_(state_dim), p_(control_dim), dt_(dt),
        drift_(std::move(drift)), input_(std::move(input_matrix)), mode_(mode) {
    require(n_ >= 1, "ControlAffineModel: state dimension must be >= 1");
    require(p_ >= 1, "ControlAffineModel: control dimension must be >= 1");
    require(dt_ > 0.0, "ControlAffineModel: dt must be positive");
    require(static_cast<bool>(drift_), "ControlAffineModel: drift required");
    require(static_cast<bool>(input_), "ControlAffineModel: input matrix required");
  }

  int state_dim() const { return n_; }
  int control_dim() const { return p_; }
  double dt() const { return dt_; }
  DerivativeMode derivative_mode() const { return mode_; }

  Vector drift(const Vector& x) const { return drift_(x); }
  Matrix input_matrix(const Vector& x) const { return input_(x); }

  /// Jacobian of the drift at x; analytic when registered.
  Matrix drift_jacobian(const Vector& x) const;
  /// Jacobians of each input column at x; analytic when registered.
  std::vector<Matrix> input_jacobians(const Vector& x) const;
  /// Hessians of each drift component at x.
  std::vector<Matrix> drift_hessians(const Vector& x) const;
  /// Hessians of each input-matrix entry, indexed [input j][component c].
  std::vector<std::vector<Matrix>> input_hessians(const Vector& x) const;

  ControlAffineModel& with_drift_jacobian(DriftJacFn fn) {
    drift_jac_ = std::move(fn);
    mode_ = DerivativeMode::kAnalytic;
    return *this;
  }
  ControlAffineModel& with_input_jacobians(InputJacFn fn) {
    input_jac_ = std::move(fn);
    return *this;
  }
  ControlAffineModel& with_drift_hessians(DriftHessFn fn) {
    drift_hess_ = std::move(fn);
    return *this;
  }
  ControlAffineModel& with_input_hessians(InputHessFn fn) {
    input_hess_ = std::move(fn);
    return *this;
  }

  bool has_analytic_first_order() const {
    return static_cast<bool>(drift_jac_) && static_cast<bool>(input_jac_);
  }
  bool has_analytic_second_order() const {
    return static_cast<bool>(drift_hess_) && static_cast<bool>(input_hess_);
  }

 private:
  int n_;
  int p_;
  double dt_;
  DriftFn drift_;
  InputFn input_;
  DerivativeMode mode_;
  DriftJacFn drift_jac_;
  InputJacFn input_jac_;
  DriftHessFn drift_hess_;
  InputHessFn input_hess_;
};

/// One Euler step of the model. `w` is the pre-scaled disturbance sample
/// (per-channel sigma already applied); the step adds eps * w * sqrt(dt).
Vector step(const ControlAffineModel& model, const Vector& x, const Vector& u,
            const Vector& w, double epsilon);

struct Linearization {
  Matrix A;  // n x n, I + (df/dx + sum_j dGamma^j/dx u_j) dt
  Matrix B;  // n x p, G(x) dt
};

/// First-order expansion of the Euler step at (x, u).
Linearization linearize(const ControlAffineModel& model, const Vector& x,
                        const Vector& u);

/**
 * Second-derivative data of the continuous-time model at a point.
 *
 * drift_hessians[c]     : Hessian of drift component f_c         (n x n)
 * input_hessians[j][c]  : Hessian of input-matrix entry G(c, j)  (n x n)
 * input_jacobians[j]    : Jacobian of input column Gamma^j       (n x n)
 */
struct SecondOrder {
  std::vector<Matrix> drift_hessians;
  std::vector<std::vector<Matrix>> input_hessians;
  std::vector<Matrix> input_jacobians;

  /// dG/dx_i as an n x p matrix, assembled from the column Jacobians.
  Matrix input_matrix_dx(int i) const;
};

/// All second-derivative tensors of drift and input matrix at (x, u).
SecondOrder second_order(const ControlAffineModel& model, const Vector& x,
                         const Vector& u);

/// Max relative disagreement between the model's derivatives and fresh
/// finite-difference estimates at the given points. Used by tests and by
/// registry validation of analytic models.
double derivative_check(const ControlAffineModel& model,
                        const std::vector<Vector>& states,
                        const std::vector<Vector>& controls);

namespace fd {
// Central-difference step rules shared by every fallback in the library.
inline double first_order_step(double xi) {
  return 1e-6 * std::max(1.0, std::fabs(xi));
}
inline double second_order_step(double xi) {
  return 1e-4 * std::max(1.0, std::fabs(xi));
}
}  // namespace fd

}  // namespace socl
