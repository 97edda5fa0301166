#include "socl/tpfc.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "socl/adjoint.hpp"

namespace socl {

FeedbackPolicy backward_gain_pass(const ControlAffineModel& model, const CostModel& cost,
                                  const NominalTrajectory& nominal,
                                  const GainPassOptions& options) {
  require(nominal.converged, "backward_gain_pass: nominal must be converged");
  const Trajectory& traj = nominal.trajectory;
  const int T = traj.horizon();
  const int n = model.state_dim();
  const int p = model.control_dim();
  const double dt = model.dt();
  const Matrix Rdt = cost.stage.control_penalty() * dt;

  FeedbackPolicy policy;
  policy.nominal = nominal;
  policy.gains.resize(T);
  policy.costates = costate_backward(model, cost, traj);
  policy.hessians.resize(T + 1);
  policy.hessians[T] = cost.terminal.hessian(traj.states[T]);

  for (int t = T - 1; t >= 0; --t) {
    const Vector& x = traj.states[t];
    const Vector& u = traj.controls[t];
    const Vector& G_next = policy.costates[t + 1];
    const Matrix& P_next = policy.hessians[t + 1];
    const Linearization lin = linearize(model, x, u);
    const SecondOrder so = second_order(model, x, u);

    // sum_c G_{t+1}^c [Hess f_c + sum_j u^j Hess Gamma^j_c] dt — the Hessian
    // of x -> G'(f + G u), contracted over the state component.
    Matrix tensor = Matrix::Zero(n, n);
    for (int c = 0; c < n; ++c) {
      Matrix h = so.drift_hessians[c];
      for (int j = 0; j < p; ++j) h += u[j] * so.input_hessians[j][c];
      tensor += G_next[c] * h;
    }
    tensor *= dt;

    // E(:,i) = (dG/dx_i)' G_{t+1} dt — the state dependence of the input matrix.
    Matrix gain_extra = Matrix::Zero(p, n);
    for (int i = 0; i < n; ++i) {
      gain_extra.col(i) = so.input_matrix_dx(i).transpose() * G_next * dt;
    }

    Matrix H = Rdt + lin.B.transpose() * P_next * lin.B;
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success) {
      if (!options.levenberg_fallback) {
        throw SolverError(
            "backward_gain_pass: R dt + B'P B not positive definite at step " +
            std::to_string(t));
      }
      double shift = options.levenberg;
      while (llt.info() != Eigen::Success && shift < 1e12) {
        llt.compute(H + shift * Matrix::Identity(p, p));
        shift *= 10.0;
      }
      if (llt.info() != Eigen::Success) {
        throw SolverError("backward_gain_pass: Levenberg fallback failed at step " +
                          std::to_string(t));
      }
    }

    policy.gains[t] = -llt.solve(gain_extra + lin.B.transpose() * P_next * lin.A);
    const Matrix& K = policy.gains[t];
    Matrix P = lin.A.transpose() * P_next * lin.A + cost.stage.hessian(x) * dt + tensor -
               K.transpose() * H * K;
    policy.hessians[t] = 0.5 * (P + P.transpose());
    if (!all_finite(policy.hessians[t]) || !all_finite(K)) {
      throw NumericError("backward_gain_pass: non-finite propagation at step " +
                         std::to_string(t));
    }
  }
  return policy;
}

Vector apply_policy(const FeedbackPolicy& policy, const Vector& x, int t) {
  require(t >= 0 && t < policy.horizon(),
          "apply_policy: step index " + std::to_string(t) + " out of range");
  const Trajectory& nom = policy.nominal.trajectory;
  return nom.controls[t] + policy.gains[t] * (x - nom.states[t]);
}

bool should_replan(double accumulated_cost, double nominal_cost_to_date, double threshold) {
  require(threshold > 0.0, "should_replan: threshold must be positive");
  const double deviation = std::fabs(accumulated_cost - nominal_cost_to_date);
  if (nominal_cost_to_date <= 0.0) return deviation > threshold;
  return deviation / nominal_cost_to_date > threshold;
}

}  // namespace socl
