#include "socl/trajectory.hpp"

namespace socl {

double recompute_cost(const ControlAffineModel& model, const CostModel& cost,
                      const Trajectory& traj) {
  require(traj.states.size() == traj.controls.size() + 1,
          "recompute_cost: states must have one more entry than controls");
  double total = 0.0;
  for (std::size_t t = 0; t < traj.controls.size(); ++t) {
    total += cost.stage.evaluate(traj.states[t], traj.controls[t], model.dt());
  }
  return total + cost.terminal.value(traj.states.back());
}

Trajectory forward_pass(const ControlAffineModel& model, const CostModel& cost,
                        const Vector& x0, const std::vector<Vector>& controls) {
  Trajectory traj;
  const int T = static_cast<int>(controls.size());
  traj.states.reserve(T + 1);
  traj.controls = controls;
  traj.stage_costs.reserve(T);
  traj.states.push_back(x0);
  const Vector zero_w = Vector::Zero(model.state_dim());
  for (int t = 0; t < T; ++t) {
    const Vector& x = traj.states.back();
    traj.stage_costs.push_back(cost.stage.evaluate(x, controls[t], model.dt()));
    Vector next = step(model, x, controls[t], zero_w, 0.0);
    if (!all_finite(next)) throw NumericError("forward_pass: state diverged at step " + std::to_string(t));
    traj.states.push_back(std::move(next));
  }
  traj.terminal_cost = cost.terminal.value(traj.states.back());
  traj.total_cost = traj.terminal_cost;
  for (double c : traj.stage_costs) traj.total_cost += c;
  return traj;
}

}  // namespace socl
