#include "socl/tvlqr.hpp"

#include <Eigen/Cholesky>

namespace socl {

TvlqrResult tvlqr_backward_pass(const ControlAffineModel& model, const CostModel& cost,
                                const Trajectory& nominal) {
  const int T = nominal.horizon();
  require(T >= 1, "tvlqr_backward_pass: empty trajectory");
  const double dt = model.dt();
  const Matrix Rdt = cost.stage.control_penalty() * dt;

  TvlqrResult out;
  out.gains.resize(T);
  out.hessians.resize(T + 1);
  out.hessians[T] = cost.terminal.hessian(nominal.states[T]);
  for (int t = T - 1; t >= 0; --t) {
    const Linearization lin = linearize(model, nominal.states[t], nominal.controls[t]);
    const Matrix& P_next = out.hessians[t + 1];
    const Matrix H = Rdt + lin.B.transpose() * P_next * lin.B;
    Eigen::LDLT<Matrix> ldlt(H);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive(),
            "tvlqr_backward_pass: control Hessian not positive definite at step " +
                std::to_string(t));
    out.gains[t] = -ldlt.solve(lin.B.transpose() * P_next * lin.A);
    Matrix P = lin.A.transpose() * P_next * lin.A +
               cost.stage.hessian(nominal.states[t]) * dt -
               out.gains[t].transpose() * H * out.gains[t];
    out.hessians[t] = 0.5 * (P + P.transpose());
  }
  return out;
}

}  // namespace socl
