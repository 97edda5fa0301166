#pragma once

#include <optional>
#include <vector>

#include "socl/adjoint.hpp"
#include "socl/cost.hpp"
#include "socl/model.hpp"
#include "socl/trajectory.hpp"

namespace socl {

struct SolverSettings {
  int max_iterations = 200;
  double cost_tolerance = 1e-9;      // relative cost decrease per accepted step
  double gradient_tolerance = 1e-6;  // Minimum-Principle residual
  double regularization = 1e-6;      // initial Levenberg value on the control Hessian
  double reg_growth = 10.0;
  double reg_shrink = 0.5;
  double reg_min = 1e-12;
  double reg_max = 1e10;
  int line_search_steps = 11;  // alpha = 1, 1/2, ..., 2^-10

  void validate() const {
    require(max_iterations >= 1, "SolverSettings: max_iterations must be >= 1");
    require(cost_tolerance > 0 && gradient_tolerance > 0 && regularization > 0,
            "SolverSettings: tolerances must be positive");
    require(reg_growth > 1.0 && reg_shrink < 1.0 && reg_shrink > 0.0,
            "SolverSettings: growth factor > 1 > shrink factor required");
    require(line_search_steps >= 1, "SolverSettings: line_search_steps must be >= 1");
  }
};

/// Result of the deterministic open-loop solve: the nominal trajectory plus
/// convergence bookkeeping. cost_history is non-increasing by construction.
struct NominalTrajectory {
  Trajectory trajectory;
  bool converged = false;
  int iterations = 0;
  double final_gradient_norm = 0.0;
  std::vector<double> cost_history;
};

/**
 * Solve the noise-free finite-horizon optimal control problem by iLQR
 * (Gauss-Newton expansion, Levenberg regularization on the control Hessian,
 * backtracking line search accepting any cost decrease).
 *
 * For smooth control-affine dynamics with cost quadratic in the control the
 * returned stationary point is the unique global minimum, so multi-start
 * solves agree on the cost.
 */
NominalTrajectory solve_open_loop(const ControlAffineModel& model, const CostModel& cost,
                                  const Vector& x0, int horizon,
                                  const SolverSettings& settings = {},
                                  const std::optional<std::vector<Vector>>& warm_start = std::nullopt);

}  // namespace socl
