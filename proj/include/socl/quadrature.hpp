#pragma once

#include "socl/types.hpp"

namespace socl {

/// Gauss-Hermite rule for the weight exp(-x^2): integral f(x)e^{-x^2}dx
/// ~= sum w_i f(xi_i). Nodes/weights from the Golub-Welsch eigenproblem of
/// the Hermite Jacobi matrix.
struct GaussHermite {
  Vector nodes;
  Vector weights;
};

GaussHermite gauss_hermite(int n);

/// E[f(Z)] for Z ~ N(0,1) via an n-node rule: (1/sqrt(pi)) sum w_i f(sqrt(2) xi_i).
template <typename F>
double normal_expectation(const GaussHermite& rule, F&& f) {
  constexpr double inv_sqrt_pi = 0.5641895835477562869;
  double acc = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(1.4142135623730951 * rule.nodes[i]);
  }
  return acc * inv_sqrt_pi;
}

}  // namespace socl
