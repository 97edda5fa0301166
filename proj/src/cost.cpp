#include "socl/cost.hpp"

#include <Eigen/Eigenvalues>

namespace socl {

StageCost::StageCost(ScalarFn state_cost, Matrix control_penalty, GradFn gradient,
                     HessFn hessian)
    : l_(std::move(state_cost)),
      R_(std::move(control_penalty)),
      grad_(std::move(gradient)),
      hess_(std::move(hessian)) {
  require(static_cast<bool>(l_) && static_cast<bool>(grad_) && static_cast<bool>(hess_),
          "StageCost: state cost, gradient and hessian are all required");
  require(R_.rows() == R_.cols(), "StageCost: R must be square");
  require((R_ - R_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, R_.cwiseAbs().maxCoeff()),
          "StageCost: R must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(R_);
  require(es.eigenvalues().minCoeff() > 0.0, "StageCost: R must be positive definite");
}

StageCost make_quadratic_stage(const Matrix& Q, const Matrix& R, const Vector& target) {
  require(Q.rows() == Q.cols() && Q.rows() == target.size(),
          "make_quadratic_stage: Q/target dimension mismatch");
  return StageCost(
      [Q, target](const Vector& x) {
        const Vector d = x - target;
        return 0.5 * d.dot(Q * d);
      },
      R,
      [Q, target](const Vector& x) -> Vector { return Q * (x - target); },
      [Q](const Vector&) -> Matrix { return Q; });
}

TerminalCost make_quadratic_terminal(const Matrix& QT, const Vector& target) {
  require(QT.rows() == QT.cols() && QT.rows() == target.size(),
          "make_quadratic_terminal: QT/target dimension mismatch");
  return TerminalCost(
      [QT, target](const Vector& x) {
        const Vector d = x - target;
        return 0.5 * d.dot(QT * d);
      },
      [QT, target](const Vector& x) -> Vector { return QT * (x - target); },
      [QT](const Vector&) -> Matrix { return QT; });
}

CostModel make_quadratic_cost(const Matrix& Q, const Matrix& R, const Matrix& QT,
                              const Vector& target) {
  return CostModel{make_quadratic_stage(Q, R, target),
                   make_quadratic_terminal(QT, target)};
}

}  // namespace socl
