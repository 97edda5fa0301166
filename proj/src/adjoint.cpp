#include "socl/adjoint.hpp"

#include <cmath>

namespace socl {

std::vector<Vector> costate_backward(const ControlAffineModel& model,
                                     const CostModel& cost, const Trajectory& traj) {
  const int T = traj.horizon();
  require(T >= 1, "costate_backward: empty trajectory");
  std::vector<Vector> G(T + 1);
  G[T] = cost.terminal.gradient(traj.states[T]);
  for (int t = T - 1; t >= 0; --t) {
    const Linearization lin = linearize(model, traj.states[t], traj.controls[t]);
    G[t] = cost.stage.gradient(traj.states[t]) * model.dt() + lin.A.transpose() * G[t + 1];
    if (!all_finite(G[t])) throw NumericError("costate_backward: non-finite co-state");
  }
  return G;
}

double minimum_principle_residual(const ControlAffineModel& model, const CostModel& cost,
                                  const Trajectory& traj) {
  const int T = traj.horizon();
  require(T >= 1, "minimum_principle_residual: empty trajectory");

  // Feasibility: the stored states must be the deterministic forward pass.
  const Vector zero_w = Vector::Zero(model.state_dim());
  for (int t = 0; t < T; ++t) {
    const Vector predicted = step(model, traj.states[t], traj.controls[t], zero_w, 0.0);
    const double mismatch = (predicted - traj.states[t + 1]).cwiseAbs().maxCoeff();
    if (mismatch > 1e-9) {
      throw ContractError("minimum_principle_residual: trajectory infeasible at step " +
                          std::to_string(t) + " (mismatch " + std::to_string(mismatch) + ")");
    }
  }

  const std::vector<Vector> G = costate_backward(model, cost, traj);
  const Matrix R_inv = cost.stage.control_penalty().inverse();

  double u_scale = 0.0;
  for (const Vector& u : traj.controls) u_scale = std::max(u_scale, u.cwiseAbs().maxCoeff());
  u_scale = std::max(1.0, u_scale);

  double worst = 0.0;
  for (int t = 0; t < T; ++t) {
    const Linearization lin = linearize(model, traj.states[t], traj.controls[t]);
    const Vector stationarity =
        traj.controls[t] + R_inv * lin.B.transpose() * G[t + 1] / model.dt();
    worst = std::max(worst, stationarity.cwiseAbs().maxCoeff());
  }
  return worst / u_scale;
}

}  // namespace socl
