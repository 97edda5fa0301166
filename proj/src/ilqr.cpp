#include "socl/ilqr.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace socl {

namespace {

struct BackwardPass {
  std::vector<Vector> feedforward;  // k_t
  std::vector<Matrix> feedback;     // K_t
  bool ok = false;                  // false when quu lost positive definiteness
};

BackwardPass backward_pass(const ControlAffineModel& model, const CostModel& cost,
                           const Trajectory& traj, double reg) {
  const int T = traj.horizon();
  const double dt = model.dt();
  const Matrix& R = cost.stage.control_penalty();
  const int p = model.control_dim();

  BackwardPass bp;
  bp.feedforward.resize(T);
  bp.feedback.resize(T);

  Vector Vx = cost.terminal.gradient(traj.states[T]);
  Matrix Vxx = cost.terminal.hessian(traj.states[T]);
  for (int t = T - 1; t >= 0; --t) {
    const Vector& x = traj.states[t];
    const Vector& u = traj.controls[t];
    const Linearization lin = linearize(model, x, u);

    const Vector qx = cost.stage.gradient(x) * dt + lin.A.transpose() * Vx;
    const Vector qu = R * u * dt + lin.B.transpose() * Vx;
    const Matrix qxx = cost.stage.hessian(x) * dt + lin.A.transpose() * Vxx * lin.A;
    const Matrix qux = lin.B.transpose() * Vxx * lin.A;
    const Matrix quu =
        R * dt + lin.B.transpose() * Vxx * lin.B + reg * Matrix::Identity(p, p);

    Eigen::LLT<Matrix> llt(quu);
    if (llt.info() != Eigen::Success) return bp;  // caller raises regularization

    bp.feedforward[t] = -llt.solve(qu);
    bp.feedback[t] = -llt.solve(qux);
    const Matrix& K = bp.feedback[t];
    const Vector& k = bp.feedforward[t];

    Vx = qx + K.transpose() * quu * k + K.transpose() * qu + qux.transpose() * k;
    Matrix next_Vxx = qxx + K.transpose() * quu * K + K.transpose() * qux +
                      qux.transpose() * K;
    Vxx = 0.5 * (next_Vxx + next_Vxx.transpose());
    if (!all_finite(Vx) || !all_finite(Vxx)) {
      throw NumericError("solve_open_loop: non-finite value expansion at step " +
                         std::to_string(t));
    }
  }
  bp.ok = true;
  return bp;
}

// Shifted rollout u = ubar + alpha k + K (x - xbar); empty result on divergence.
std::optional<Trajectory> try_forward(const ControlAffineModel& model, const CostModel& cost,
                                      const Trajectory& ref, const BackwardPass& bp,
                                      double alpha) {
  const int T = ref.horizon();
  Trajectory traj;
  traj.states.reserve(T + 1);
  traj.controls.reserve(T);
  traj.stage_costs.reserve(T);
  traj.states.push_back(ref.states[0]);
  const Vector zero_w = Vector::Zero(model.state_dim());
  for (int t = 0; t < T; ++t) {
    const Vector& x = traj.states.back();
    Vector u = ref.controls[t] + alpha * bp.feedforward[t] + bp.feedback[t] * (x - ref.states[t]);
    if (!all_finite(u)) return std::nullopt;
    traj.stage_costs.push_back(cost.stage.evaluate(x, u, model.dt()));
    Vector next = step(model, x, u, zero_w, 0.0);
    if (!all_finite(next)) return std::nullopt;
    traj.controls.push_back(std::move(u));
    traj.states.push_back(std::move(next));
  }
  traj.terminal_cost = cost.terminal.value(traj.states.back());
  traj.total_cost = traj.terminal_cost;
  for (double c : traj.stage_costs) traj.total_cost += c;
  if (!std::isfinite(traj.total_cost)) return std::nullopt;
  return traj;
}

}  // namespace

NominalTrajectory solve_open_loop(const ControlAffineModel& model, const CostModel& cost,
                                  const Vector& x0, int horizon,
                                  const SolverSettings& settings,
                                  const std::optional<std::vector<Vector>>& warm_start) {
  settings.validate();
  require(horizon >= 1, "solve_open_loop: horizon must be >= 1");
  require(x0.size() == model.state_dim(), "solve_open_loop: x0 dimension mismatch");

  std::vector<Vector> controls;
  if (warm_start) {
    require(static_cast<int>(warm_start->size()) == horizon,
            "solve_open_loop: warm start length must equal the horizon");
    controls = *warm_start;
  } else {
    controls.assign(horizon, Vector::Zero(model.control_dim()));
  }

  NominalTrajectory result;
  result.trajectory = forward_pass(model, cost, x0, controls);
  if (!std::isfinite(result.trajectory.total_cost)) {
    throw NumericError("solve_open_loop: initial rollout diverged");
  }
  result.cost_history.push_back(result.trajectory.total_cost);
  result.final_gradient_norm =
      minimum_principle_residual(model, cost, result.trajectory);
  if (result.final_gradient_norm <= settings.gradient_tolerance) {
    result.converged = true;
    return result;
  }

  double reg = settings.regularization;
  for (int it = 0; it < settings.max_iterations; ++it) {
    result.iterations = it + 1;

    BackwardPass bp = backward_pass(model, cost, result.trajectory, reg);
    while (!bp.ok && reg < settings.reg_max) {
      reg *= settings.reg_growth;
      bp = backward_pass(model, cost, result.trajectory, reg);
    }
    if (!bp.ok) break;

    bool accepted = false;
    double alpha = 1.0;
    for (int s = 0; s < settings.line_search_steps; ++s, alpha *= 0.5) {
      const auto candidate = try_forward(model, cost, result.trajectory, bp, alpha);
      if (!candidate || candidate->total_cost >= result.trajectory.total_cost) continue;
      const double decrease = result.trajectory.total_cost - candidate->total_cost;
      const double rel_decrease = decrease / std::max(1.0, std::fabs(result.trajectory.total_cost));
      result.trajectory = *candidate;
      result.cost_history.push_back(result.trajectory.total_cost);
      reg = std::max(reg * settings.reg_shrink, settings.reg_min);
      accepted = true;

      result.final_gradient_norm =
          minimum_principle_residual(model, cost, result.trajectory);
      if (rel_decrease < settings.cost_tolerance &&
          result.final_gradient_norm <= settings.gradient_tolerance) {
        result.converged = true;
        return result;
      }
      break;
    }

    if (!accepted) {
      reg *= settings.reg_growth;
      if (reg > settings.reg_max) break;  // stalled; report best iterate
    }
    if (accepted && result.final_gradient_norm <= settings.gradient_tolerance) {
      result.converged = true;
      return result;
    }
  }

  result.final_gradient_norm = minimum_principle_residual(model, cost, result.trajectory);
  result.converged = result.final_gradient_norm <= settings.gradient_tolerance;
  return result;
}

}  // namespace socl
