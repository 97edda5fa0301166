#pragma once

#include <vector>

#include "socl/cost.hpp"
#include "socl/model.hpp"
#include "socl/types.hpp"

namespace socl {

/// A realized (or planned) state/control path with its cost breakdown.
/// states has one more entry than controls; total_cost is the sum of
/// stage_costs plus terminal_cost.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<double> stage_costs;
  double terminal_cost = 0.0;
  double total_cost = 0.0;

  int horizon() const { return static_cast<int>(controls.size()); }
};

/// Recompute the total cost from states/controls alone (independent of the
/// stored per-step numbers).
double recompute_cost(const ControlAffineModel& model, const CostModel& cost,
                      const Trajectory& traj);

/// Deterministic forward pass under a fixed control sequence (epsilon = 0).
Trajectory forward_pass(const ControlAffineModel& model, const CostModel& cost,
                        const Vector& x0, const std::vector<Vector>& controls);

}  // namespace socl
