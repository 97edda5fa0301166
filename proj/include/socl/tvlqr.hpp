#pragma once

#include <vector>

#include "socl/cost.hpp"
#include "socl/model.hpp"
#include "socl/trajectory.hpp"

namespace socl {

/// Gain/value sequences of a standard time-varying LQR about a nominal.
struct TvlqrResult {
  std::vector<Matrix> gains;     // K_t, p x n, t = 0..T-1
  std::vector<Matrix> hessians;  // P_t, n x n, t = 0..T
};

/**
 * Classic discrete time-varying LQR backward pass about a nominal
 * trajectory: quadratic cost expansion, first-order dynamics only,
 *
 *   K_t = -(R dt + B'P_{t+1}B)^{-1} B'P_{t+1}A
 *   P_t = A'P_{t+1}A + Hess l(x_t) dt - K_t'(R dt + B'P_{t+1}B)K_t.
 *
 * Deliberately independent of the perturbation-feedback backward pass: the
 * two coincide exactly when the dynamics' second derivatives vanish and the
 * input matrix is state-independent, and differ otherwise.
 */
TvlqrResult tvlqr_backward_pass(const ControlAffineModel& model, const CostModel& cost,
                                const Trajectory& nominal);

}  // namespace socl
