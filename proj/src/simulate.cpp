#include "socl/simulate.hpp"

#include <string>

namespace socl {

Trajectory rollout(const ControlAffineModel& model, const CostModel& cost,
                   const Vector& x0, const Controller& controller,
                   const DisturbanceModel& disturbance, double epsilon, int T,
                   std::uint64_t run_index) {
  require(T >= 1, "rollout: horizon must be >= 1");
  require(x0.size() == model.state_dim(), "rollout: x0 dimension mismatch");
  require(static_cast<bool>(controller), "rollout: controller required");

  Trajectory traj;
  traj.states.reserve(T + 1);
  traj.controls.reserve(T);
  traj.stage_costs.reserve(T);
  traj.states.push_back(x0);

  const Vector zero_w = Vector::Zero(model.state_dim());
  for (int t = 0; t < T; ++t) {
    const Vector& x = traj.states.back();
    Vector u;
    try {
      u = controller(x, t);
    } catch (const std::exception& e) {
      throw SolverError("rollout: controller failed at step " + std::to_string(t) +
                        ": " + e.what());
    }
    require(u.size() == model.control_dim(),
            "rollout: controller returned wrong control dimension at step " + std::to_string(t));
    traj.stage_costs.push_back(cost.stage.evaluate(x, u, model.dt()));
    const Vector w = (epsilon == 0.0) ? zero_w : disturbance.sample(run_index, t);
    Vector next = step(model, x, u, w, epsilon);
    if (!all_finite(next)) {
      throw NumericError("rollout: state diverged at step " + std::to_string(t));
    }
    traj.controls.push_back(std::move(u));
    traj.states.push_back(std::move(next));
  }
  traj.terminal_cost = cost.terminal.value(traj.states.back());
  traj.total_cost = traj.terminal_cost;
  for (double c : traj.stage_costs) traj.total_cost += c;
  return traj;
}

}  // namespace socl
