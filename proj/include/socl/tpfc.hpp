#pragma once

#include <vector>

#include "socl/ilqr.hpp"

namespace socl {

/**
 * Linear perturbation-feedback policy about an optimal nominal:
 * u_t(x) = ubar_t + K_t (x - xbar_t), with gains from the backward
 * co-state/Hessian recursion (not an LQR; see backward_gain_pass).
 * Immutable and shareable across concurrent rollouts.
 */
struct FeedbackPolicy {
  NominalTrajectory nominal;
  std::vector<Matrix> gains;     // K_t, p x n, t = 0..T-1
  std::vector<Vector> costates;  // G_t, t = 0..T
  std::vector<Matrix> hessians;  // P_t, t = 0..T

  int horizon() const { return static_cast<int>(gains.size()); }
};

struct GainPassOptions {
  // On loss of positive definiteness of (R dt + B'P B) the pass fails loudly
  // by default; the fallback adds a Levenberg shift instead, for exploratory
  // runs where a broken second-order sufficiency condition is acceptable.
  bool levenberg_fallback = false;
  double levenberg = 1e-6;
};

/**
 * Backward pass for the perturbation-feedback gains about a converged
 * nominal. For t = T-1..0, with A_t, B_t the step linearization and
 * G the Minimum-Principle co-state:
 *
 *   H_t = R dt + B_t'P_{t+1}B_t
 *   K_t = -H_t^{-1} [ E_t + B_t'P_{t+1}A_t ],   E_t(:,i) = (dG/dx_i)'G_{t+1} dt
 *   P_t = A_t'P_{t+1}A_t + Hess l dt
 *         + sum_c G_{t+1}^c [Hess f_c + sum_j u_t^j Hess Gamma^j_c] dt
 *         - K_t'H_t K_t
 *
 * terminal conditions G_T = grad c_T, P_T = Hess c_T. The second-order
 * drift/input tensor term and the dG/dx gain term are what distinguish the
 * recursion from a time-varying LQR about the same nominal.
 */
FeedbackPolicy backward_gain_pass(const ControlAffineModel& model, const CostModel& cost,
                                  const NominalTrajectory& nominal,
                                  const GainPassOptions& options = {});

/// u = ubar_t + K_t (x - xbar_t). Throws ContractError for t out of range.
Vector apply_policy(const FeedbackPolicy& policy, const Vector& x, int t);

/**
 * Cost-triggered replanning test: true iff the realized accumulated cost
 * deviates from the nominal accumulated cost by more than the threshold
 * fraction. Degenerate nominal (<= 0) falls back to absolute deviation.
 */
bool should_replan(double accumulated_cost, double nominal_cost_to_date, double threshold);

}  // namespace socl
