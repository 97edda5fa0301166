#include "socl/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace socl {

GaussHermite gauss_hermite(int n) {
  require(n >= 1, "gauss_hermite: need at least one node");
  // Jacobi matrix of the (physicists') Hermite recurrence: zero diagonal,
  // off-diagonal beta_k = sqrt(k/2).
  Matrix J = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = std::sqrt(0.5 * k);
    J(k, k - 1) = beta;
    J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  require(es.info() == Eigen::Success, "gauss_hermite: eigensolver failed");

  const double mu0 = std::sqrt(M_PI);  // integral of exp(-x^2)
  GaussHermite rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace socl
