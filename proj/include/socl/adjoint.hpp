#pragma once

#include <vector>

#include "socl/cost.hpp"
#include "socl/model.hpp"
#include "socl/trajectory.hpp"

namespace socl {

/**
 * Backward co-state recursion along a trajectory:
 *
 *   G_T = grad c_T(x_T),   G_t = grad l(x_t) dt + A_t' G_{t+1},
 *
 * the discrete Minimum-Principle adjoint. Shared by the stationarity
 * residual and by the feedback-gain backward pass so the two stay
 * bitwise consistent.
 */
std::vector<Vector> costate_backward(const ControlAffineModel& model,
                                     const CostModel& cost, const Trajectory& traj);

/// Largest relative stationarity violation max_t |u_t + R^{-1} B_t' G_{t+1} / dt|_inf
/// normalized by max(1, |u|_inf). Zero iff the discrete Minimum Principle
/// holds at every step. Throws ContractError if the trajectory is not
/// dynamically feasible under the model at epsilon = 0.
double minimum_principle_residual(const ControlAffineModel& model, const CostModel& cost,
                                  const Trajectory& traj);

}  // namespace socl
