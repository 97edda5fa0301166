#include "socl/model.hpp"

#include <cmath>

namespace socl {

namespace {

// Central-difference Jacobian of a vector-valued function.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x) {
  const int n = static_cast<int>(x.size());
  const Vector f0 = fn(x);
  Matrix jac(f0.size(), n);
  Vector xp = x, xm = x;
  for (int i = 0; i < n; ++i) {
    const double h = fd::first_order_step(x[i]);
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    jac.col(i) = (fn(xp) - fn(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return jac;
}

// Central-difference Hessian of a scalar-valued function.
Matrix fd_hessian(const std::function<double(const Vector&)>& fn, const Vector& x) {
  const int n = static_cast<int>(x.size());
  Matrix hess(n, n);
  const double f0 = fn(x);
  Vector xq = x;
  for (int i = 0; i < n; ++i) {
    const double hi = fd::second_order_step(x[i]);
    xq[i] = x[i] + hi;
    const double fpp = fn(xq);
    xq[i] = x[i] - hi;
    const double fmm = fn(xq);
    xq[i] = x[i];
    hess(i, i) = (fpp - 2.0 * f0 + fmm) / (hi * hi);
    for (int j = i + 1; j < n; ++j) {
      const double hj = fd::second_order_step(x[j]);
      xq[i] = x[i] + hi; xq[j] = x[j] + hj;
      const double fa = fn(xq);
      xq[j] = x[j] - hj;
      const double fb = fn(xq);
      xq[i] = x[i] - hi; xq[j] = x[j] + hj;
      const double fc = fn(xq);
      xq[j] = x[j] - hj;
      const double fd_ = fn(xq);
      xq[i] = x[i]; xq[j] = x[j];
      const double v = (fa - fb - fc + fd_) / (4.0 * hi * hj);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

}  // namespace

Matrix ControlAffineModel::drift_jacobian(const Vector& x) const {
  if (drift_jac_) return drift_jac_(x);
  return fd_jacobian(drift_, x);
}

std::vector<Matrix> ControlAffineModel::input_jacobians(const Vector& x) const {
  if (input_jac_) return input_jac_(x);
  std::vector<Matrix> jacs;
  jacs.reserve(p_);
  for (int j = 0; j < p_; ++j) {
    auto column = [this, j](const Vector& xx) -> Vector { return input_(xx).col(j); };
    jacs.push_back(fd_jacobian(column, x));
  }
  return jacs;
}

std::vector<Matrix> ControlAffineModel::drift_hessians(const Vector& x) const {
  if (drift_hess_) return drift_hess_(x);
  std::vector<Matrix> hess;
  hess.reserve(n_);
  for (int c = 0; c < n_; ++c) {
    auto comp = [this, c](const Vector& xx) -> double { return drift_(xx)[c]; };
    hess.push_back(fd_hessian(comp, x));
  }
  return hess;
}

std::vector<std::vector<Matrix>> ControlAffineModel::input_hessians(const Vector& x) const {
  if (input_hess_) return input_hess_(x);
  std::vector<std::vector<Matrix>> out(p_);
  for (int j = 0; j < p_; ++j) {
    out[j].reserve(n_);
    for (int c = 0; c < n_; ++c) {
      auto entry = [this, j, c](const Vector& xx) -> double { return input_(xx)(c, j); };
      out[j].push_back(fd_hessian(entry, x));
    }
  }
  return out;
}

Vector step(const ControlAffineModel& model, const Vector& x, const Vector& u,
            const Vector& w, double epsilon) {
  require(x.size() == model.state_dim(), "step: state dimension mismatch");
  require(u.size() == model.control_dim(), "step: control dimension mismatch");
  require(w.size() == model.state_dim(), "step: disturbance dimension mismatch");
  if (!all_finite(x) || !all_finite(u) || !all_finite(w) || !std::isfinite(epsilon)) {
    throw NumericError("step: non-finite input");
  }
  Vector next = x + (model.drift(x) + model.input_matrix(x) * u) * model.dt();
  if (epsilon != 0.0) next += epsilon * std::sqrt(model.dt()) * w;
  return next;
}

Linearization linearize(const ControlAffineModel& model, const Vector& x,
                        const Vector& u) {
  require(x.size() == model.state_dim(), "linearize: state dimension mismatch");
  require(u.size() == model.control_dim(), "linearize: control dimension mismatch");
  const int n = model.state_dim();
  Matrix continuous = model.drift_jacobian(x);
  const auto gamma_jacs = model.input_jacobians(x);
  for (int j = 0; j < model.control_dim(); ++j) continuous += gamma_jacs[j] * u[j];

  Linearization lin;
  lin.A = Matrix::Identity(n, n) + continuous * model.dt();
  lin.B = model.input_matrix(x) * model.dt();
  if (!all_finite(lin.A) || !all_finite(lin.B)) {
    throw NumericError("linearize: non-finite derivative");
  }
  return lin;
}

Matrix SecondOrder::input_matrix_dx(int i) const {
  const int p = static_cast<int>(input_jacobians.size());
  const int n = p > 0 ? static_cast<int>(input_jacobians[0].rows()) : 0;
  Matrix dG(n, p);
  for (int j = 0; j < p; ++j) dG.col(j) = input_jacobians[j].col(i);
  return dG;
}

SecondOrder second_order(const ControlAffineModel& model, const Vector& x,
                         const Vector& u) {
  require(x.size() == model.state_dim(), "second_order: state dimension mismatch");
  require(u.size() == model.control_dim(), "second_order: control dimension mismatch");
  SecondOrder so;
  so.drift_hessians = model.drift_hessians(x);
  so.input_hessians = model.input_hessians(x);
  so.input_jacobians = model.input_jacobians(x);
  for (const auto& h : so.drift_hessians) {
    if (!all_finite(h)) throw NumericError("second_order: non-finite drift Hessian");
  }
  for (const auto& per_input : so.input_hessians) {
    for (const auto& h : per_input) {
      if (!all_finite(h)) throw NumericError("second_order: non-finite input Hessian");
    }
  }
  return so;
}

double derivative_check(const ControlAffineModel& model,
                        const std::vector<Vector>& states,
                        const std::vector<Vector>& controls) {
  require(states.size() == controls.size(), "derivative_check: point count mismatch");
  auto rel = [](double got, double ref) {
    return std::fabs(got - ref) / std::max(1.0, std::fabs(ref));
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Vector& x = states[k];
    const Matrix jac = model.drift_jacobian(x);
    const Matrix jac_fd = fd_jacobian([&](const Vector& xx) { return model.drift(xx); }, x);
    for (int i = 0; i < jac.rows(); ++i)
      for (int j = 0; j < jac.cols(); ++j) worst = std::max(worst, rel(jac(i, j), jac_fd(i, j)));

    const auto gj = model.input_jacobians(x);
    for (int j = 0; j < model.control_dim(); ++j) {
      const Matrix gj_fd =
          fd_jacobian([&](const Vector& xx) -> Vector { return model.input_matrix(xx).col(j); }, x);
      for (int a = 0; a < gj_fd.rows(); ++a)
        for (int b = 0; b < gj_fd.cols(); ++b) worst = std::max(worst, rel(gj[j](a, b), gj_fd(a, b)));
    }

    const auto fh = model.drift_hessians(x);
    for (int c = 0; c < model.state_dim(); ++c) {
      const Matrix fh_fd =
          fd_hessian([&](const Vector& xx) -> double { return model.drift(xx)[c]; }, x);
      for (int a = 0; a < fh_fd.rows(); ++a)
        for (int b = 0; b < fh_fd.cols(); ++b) worst = std::max(worst, rel(fh[c](a, b), fh_fd(a, b)));
    }
  }
  return worst;
}

}  // namespace socl
