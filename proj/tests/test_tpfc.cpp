#include <doctest.h>

#include <cmath>

#include "socl/adjoint.hpp"
#include "socl/models_builtin.hpp"
#include "socl/tpfc.hpp"
#include "socl/tvlqr.hpp"

using namespace socl;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

NominalTrajectory solved_system1(const ControlAffineModel& model, const CostModel& cost) {
  NominalTrajectory nominal = solve_open_loop(model, cost, scalar(1.0), 50);
  REQUIRE(nominal.converged);
  return nominal;
}

}  // namespace

TEST_CASE("LQR reduction: gains coincide on a linear 4-state model") {
  auto model = make_linear4(0.05);
  Matrix Q = Matrix::Identity(4, 4);
  Q.diagonal() << 2.0, 1.0, 0.5, 1.5;
  const Matrix R = Matrix::Identity(2, 2) * 0.4;
  const Matrix QT = Matrix::Identity(4, 4) * 8.0;
  Vector target(4);
  target << 1.0, -0.5, 0.25, 0.0;
  CostModel cost = make_quadratic_cost(Q, R, QT, target);

  Vector x0(4);
  x0 << -1.0, 0.8, 0.3, -0.2;
  const NominalTrajectory nominal = solve_open_loop(model, cost, x0, 30);
  REQUIRE(nominal.converged);

  const FeedbackPolicy policy = backward_gain_pass(model, cost, nominal);
  const TvlqrResult lqr = tvlqr_backward_pass(model, cost, nominal.trajectory);

  double max_gain_dev = 0.0, max_hess_dev = 0.0;
  for (int t = 0; t < 30; ++t) {
    max_gain_dev = std::max(max_gain_dev,
                            (policy.gains[t] - lqr.gains[t]).cwiseAbs().maxCoeff());
    max_hess_dev = std::max(max_hess_dev,
                            (policy.hessians[t] - lqr.hessians[t]).cwiseAbs().maxCoeff());
  }
  CHECK(max_gain_dev <= 1e-8);
  CHECK(max_hess_dev <= 1e-8);
}

TEST_CASE("non-LQR witness: system 1 gains differ from time-varying LQR") {
  auto model = make_system1(0.02);
  CostModel cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                       Matrix::Identity(1, 1) * 50.0, scalar(4.8));
  const NominalTrajectory nominal = solved_system1(model, cost);
  const FeedbackPolicy policy = backward_gain_pass(model, cost, nominal);
  const TvlqrResult lqr = tvlqr_backward_pass(model, cost, nominal.trajectory);

  double max_dev = 0.0;
  for (int t = 0; t < nominal.trajectory.horizon(); ++t) {
    max_dev = std::max(max_dev, (policy.gains[t] - lqr.gains[t]).cwiseAbs().maxCoeff());
  }
  CHECK(max_dev >= 1e-3);
}

TEST_CASE("terminal conditions hold exactly and P stays symmetric") {
  auto model = make_system1(0.02);
  CostModel cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                       Matrix::Identity(1, 1) * 50.0, scalar(4.8));
  const NominalTrajectory nominal = solved_system1(model, cost);
  const FeedbackPolicy policy = backward_gain_pass(model, cost, nominal);
  const Vector& xT = nominal.trajectory.states.back();
  CHECK((policy.costates.back() - cost.terminal.gradient(xT)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((policy.hessians.back() - cost.terminal.hessian(xT)).cwiseAbs().maxCoeff() == 0.0);

  auto car = make_car_like(0.01);
  Matrix Qc = Matrix::Identity(4, 4) * 2.0;
  const Matrix Rc = Matrix::Identity(2, 2) * 0.1;
  const Matrix QTc = Matrix::Identity(4, 4) * 40.0;
  Vector goal(4);
  goal << 0.6, 0.1, 0.0, 0.0;
  CostModel cost_car = make_quadratic_cost(Qc, Rc, QTc, goal);
  const NominalTrajectory nom_car = solve_open_loop(car, cost_car, Vector::Zero(4), 30);
  REQUIRE(nom_car.converged);
  const FeedbackPolicy pol_car = backward_gain_pass(car, cost_car, nom_car);
  for (const Matrix& P : pol_car.hessians) {
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("co-state sequence is shared with the minimum-principle adjoint") {
  auto model = make_system2(0.02);
  CostModel cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                       Matrix::Identity(1, 1) * 50.0, scalar(4.8));
  const NominalTrajectory nominal = solve_open_loop(model, cost, scalar(1.0), 50);
  REQUIRE(nominal.converged);
  const FeedbackPolicy policy = backward_gain_pass(model, cost, nominal);
  const auto adjoint = costate_backward(model, cost, nominal.trajectory);
  REQUIRE(policy.costates.size() == adjoint.size());
  for (std::size_t t = 0; t < adjoint.size(); ++t) {
    CHECK(policy.costates[t][0] == adjoint[t][0]);  // same implementation, bitwise
  }
}

TEST_CASE("co-state matches finite-difference re-solve gradients on system 1") {
  auto model = make_system1(0.02);
  CostModel cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                       Matrix::Identity(1, 1) * 50.0, scalar(4.8));
  const NominalTrajectory nominal = solved_system1(model, cost);
  const FeedbackPolicy policy = backward_gain_pass(model, cost, nominal);

  SolverSettings tight;
  tight.gradient_tolerance = 1e-9;
  tight.cost_tolerance = 1e-12;
  const double h = 1e-4;
  for (int t : {5, 25, 45}) {
    const int remaining = 50 - t;
    const double x_t = nominal.trajectory.states[t][0];
    // Warm start from the nominal tail for speed and reliability.
    std::vector<Vector> tail(nominal.trajectory.controls.begin() + t,
                             nominal.trajectory.controls.end());
    const double J_plus =
        solve_open_loop(model, cost, scalar(x_t + h), remaining, tight, tail)
            .trajectory.total_cost;
    const double J_minus =
        solve_open_loop(model, cost, scalar(x_t - h), remaining, tight, tail)
            .trajectory.total_cost;
    const double fd_gradient = (J_plus - J_minus) / (2.0 * h);
    const double G_t = policy.costates[t][0];
    CHECK(G_t == doctest::Approx(fd_gradient).epsilon(1e-3));
  }
}

TEST_CASE("apply_policy: zero deviation, linearity, range checks") {
  auto model = make_system1(0.02);
  CostModel cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                       Matrix::Identity(1, 1) * 50.0, scalar(4.8));
  const NominalTrajectory nominal = solved_system1(model, cost);
  const FeedbackPolicy policy = backward_gain_pass(model, cost, nominal);

  const int t = 12;
  const Vector xbar = nominal.trajectory.states[t];
  CHECK(apply_policy(policy, xbar, t)[0] == nominal.trajectory.controls[t][0]);

  const Vector dx = scalar(0.2);
  const Vector u1 = apply_policy(policy, xbar + dx, t);
  const Vector u2 = apply_policy(policy, xbar + 2.0 * dx, t);
  const Vector ubar = nominal.trajectory.controls[t];
  CHECK((u2 - ubar - 2.0 * (u1 - ubar)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(apply_policy(policy, xbar, -1), ContractError);
  CHECK_THROWS_AS(apply_policy(policy, xbar, 50), ContractError);
}

TEST_CASE("apply_policy reproduces the Riccati feedback on an LQ problem") {
  // On a linear model with quadratic cost the T-PFC gain equals the LQR gain,
  // so the policy's response to a deviation is the oracle's K_t * dx.
  auto model = make_linear(Matrix::Constant(1, 1, -1.0), Matrix::Identity(1, 1), 0.05);
  CostModel cost = make_quadratic_cost(Matrix::Identity(1, 1) * 2.0,
                                       Matrix::Identity(1, 1) * 0.5,
                                       Matrix::Identity(1, 1) * 10.0, scalar(0.0));
  const NominalTrajectory nominal = solve_open_loop(model, cost, scalar(1.3), 40);
  REQUIRE(nominal.converged);
  const FeedbackPolicy policy = backward_gain_pass(model, cost, nominal);
  const TvlqrResult lqr = tvlqr_backward_pass(model, cost, nominal.trajectory);
  const int t = 7;
  const Vector x = nominal.trajectory.states[t] + scalar(0.1);
  const double expected = nominal.trajectory.controls[t][0] + lqr.gains[t](0, 0) * 0.1;
  CHECK(apply_policy(policy, x, t)[0] == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("should_replan thresholds") {
  CHECK_FALSE(should_replan(10.0, 10.0, 0.2));
  CHECK(should_replan(12.5, 10.0, 0.2));        // 25% over
  CHECK_FALSE(should_replan(11.9, 10.0, 0.2));  // 19% over
  CHECK(should_replan(7.9, 10.0, 0.2));         // 21% under
  // Degenerate nominal: absolute deviation rule.
  CHECK(should_replan(0.3, 0.0, 0.2));
  CHECK_FALSE(should_replan(0.1, 0.0, 0.2));
  CHECK_THROWS_AS(should_replan(1.0, 1.0, 0.0), ContractError);
}

TEST_CASE("backward_gain_pass requires a converged nominal") {
  auto model = make_system1(0.02);
  CostModel cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                       Matrix::Identity(1, 1) * 50.0, scalar(4.8));
  NominalTrajectory nominal = solved_system1(model, cost);
  nominal.converged = false;
  CHECK_THROWS_AS(backward_gain_pass(model, cost, nominal), ContractError);
}
