#include <doctest.h>

#include <cmath>

#include "socl/models_builtin.hpp"
#include "socl/noise.hpp"
#include "socl/rng.hpp"
#include "socl/simulate.hpp"
#include "socl/trajectory.hpp"

using namespace socl;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

// Deterministic pseudo-random state/control points for property checks.
Vector random_point(int dim, double lo, double hi, std::uint64_t key) {
  Vector x(dim);
  for (int i = 0; i < dim; ++i) {
    x[i] = lo + (hi - lo) * rng::uniform(key, rng::kTestPoints, i, 0, 0);
  }
  return x;
}

}  // namespace

TEST_CASE("counter rng: deterministic, keyed and well distributed") {
  CHECK(rng::uniform(1, 1, 2, 3, 4) == rng::uniform(1, 1, 2, 3, 4));
  CHECK(rng::uniform(1, 1, 2, 3, 4) != rng::uniform(1, 1, 2, 3, 5));
  CHECK(rng::uniform(1, 1, 2, 3, 4) != rng::uniform(2, 1, 2, 3, 4));

  // Inverse normal CDF reference values (Wichura 1988).
  CHECK(rng::inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rng::inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(rng::inverse_normal_cdf(0.001) == doctest::Approx(-3.090232306167814).epsilon(1e-12));

  double sum = 0.0, sum2 = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double z = rng::normal(42, rng::kTestPoints, i, 0, 0);
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::fabs(sum / N) < 0.01);
  CHECK(sum2 / N == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("step: direct evaluations") {
  const Vector u0 = Vector::Zero(1), w0 = Vector::Zero(1);

  // System 1 at x = 1: x' = 1 - cos(1) * 0.02.
  auto sys1 = make_system1(0.02);
  CHECK(step(sys1, scalar(1.0), u0, w0, 0.0)[0] ==
        doctest::Approx(1.0 - std::cos(1.0) * 0.02).epsilon(1e-15));

  // System 2 at x = 1: x' = 1 + (-1 - 2 - 0.5) * 0.02 = 0.93.
  auto sys2 = make_system2(0.02);
  CHECK(step(sys2, scalar(1.0), u0, w0, 0.0)[0] == doctest::Approx(0.93).epsilon(1e-15));

  // Zero drift keeps the state.
  auto still = make_linear(Matrix::Zero(2, 2), Matrix::Identity(2, 2), 0.1);
  const Vector x = random_point(2, -1, 1, 7);
  CHECK((step(still, x, Vector::Zero(2), Vector::Zero(2), 0.0) - x).norm() == 0.0);
}

TEST_CASE("step: affine in the control") {
  auto car = make_car_like(0.01);
  const Vector x = random_point(4, -0.5, 0.5, 11);
  const Vector u1 = random_point(2, -2, 2, 12);
  const Vector u2 = random_point(2, -2, 2, 13);
  const Vector w = Vector::Zero(4);
  for (double a : {0.0, 0.25, 0.7, 1.0}) {
    const Vector lhs = step(car, x, a * u1 + (1 - a) * u2, w, 0.0);
    const Vector rhs = a * step(car, x, u1, w, 0.0) + (1 - a) * step(car, x, u2, w, 0.0);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("step: contract and numeric errors") {
  auto sys1 = make_system1(0.02);
  CHECK_THROWS_AS(step(sys1, Vector::Zero(2), Vector::Zero(1), Vector::Zero(1), 0.0),
                  ContractError);
  Vector bad = scalar(std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(step(sys1, bad, Vector::Zero(1), Vector::Zero(1), 0.0), NumericError);
}

TEST_CASE("linearize: exact on linear models, hand values on system 1") {
  Matrix M(2, 2);
  M << 0.0, 1.0, -2.0, -0.5;
  Matrix G(2, 1);
  G << 0.0, 1.0;
  auto lin_model = make_linear(M, G, 0.05);
  const auto lin = linearize(lin_model, random_point(2, -1, 1, 3), random_point(1, -1, 1, 4));
  CHECK(((lin.A - (Matrix::Identity(2, 2) + M * 0.05)).cwiseAbs().maxCoeff()) == 0.0);
  CHECK((lin.B - G * 0.05).cwiseAbs().maxCoeff() == 0.0);

  auto sys1 = make_system1(0.02);
  const auto l1 = linearize(sys1, scalar(1.0), Vector::Zero(1));
  CHECK(l1.A(0, 0) == doctest::Approx(1.0 + std::sin(1.0) * 0.02).epsilon(1e-15));
  CHECK(l1.B(0, 0) == doctest::Approx(0.02).epsilon(1e-15));
}

TEST_CASE("analytic derivatives agree with finite differences on 100+ points") {
  auto check_on_points = [](const ControlAffineModel& model, double lo, double hi,
                            std::uint64_t salt) {
    std::vector<Vector> xs, us;
    for (int k = 0; k < 100; ++k) {
      xs.push_back(random_point(model.state_dim(), lo, hi, salt + k));
      us.push_back(random_point(model.control_dim(), -2, 2, salt + 1000 + k));
    }
    return derivative_check(model, xs, us);
  };
  CHECK(check_on_points(make_system1(0.02), 0.0, 5.0, 100) < 1e-5);
  CHECK(check_on_points(make_system2(0.02), 0.0, 5.0, 200) < 1e-5);
  CHECK(check_on_points(make_car_like(0.01), -0.8, 0.8, 300) < 1e-5);
}

TEST_CASE("second_order: zeros on linear models, curvature on system 1, car rows") {
  auto lin = make_linear4(0.05);
  const auto so = second_order(lin, random_point(4, -1, 1, 5), random_point(2, -1, 1, 6));
  for (const auto& h : so.drift_hessians) CHECK(h.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& per_input : so.input_hessians)
    for (const auto& h : per_input) CHECK(h.cwiseAbs().maxCoeff() == 0.0);

  auto sys1 = make_system1(0.02);
  const auto so1 = second_order(sys1, scalar(1.0), Vector::Zero(1));
  CHECK(so1.drift_hessians[0](0, 0) == doctest::Approx(std::cos(1.0)).epsilon(1e-12));

  // Car: dG/dtheta has nonzero entries in the velocity column.
  auto car = make_car_like(0.01);
  const auto soc = second_order(car, random_point(4, -0.5, 0.5, 8), Vector::Zero(2));
  const Matrix dG_dtheta = soc.input_matrix_dx(2);
  CHECK(dG_dtheta.col(0).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("cart pole finite-difference derivatives are self-consistent") {
  auto cp = make_cart_pole(0.02);
  // FD-vs-FD is trivially consistent; instead check the input column against
  // a direct difference of the drift+input evaluation in u.
  const Vector x = random_point(4, -0.3, 0.3, 21);
  const Matrix G = cp.input_matrix(x);
  const double h = 1e-6;
  const Vector f_plus = cp.drift(x) + G * Vector::Constant(1, h);
  const Vector f_minus = cp.drift(x) - G * Vector::Constant(1, h);
  const Vector col_fd = (f_plus - f_minus) / (2 * h);
  CHECK((col_fd - G.col(0)).cwiseAbs().maxCoeff() < 1e-9);
  // Pole accelerates sideways when pushed.
  CHECK(std::fabs(G(1, 0)) > 0.1);
}

TEST_CASE("rollout: eps = 0 matches the deterministic forward pass bitwise") {
  auto sys1 = make_system1(0.02);
  auto cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                  Matrix::Identity(1, 1) * 50.0, scalar(4.8));
  std::vector<Vector> controls(50, Vector::Zero(1));
  const Trajectory direct = forward_pass(sys1, cost, scalar(1.0), controls);

  DisturbanceModel noise(scalar(3.0), 99);
  Controller zero = [](const Vector&, int) { return Vector::Zero(1); };
  const Trajectory rolled = rollout(sys1, cost, scalar(1.0), zero, noise, 0.0, 50);
  for (int t = 0; t <= 50; ++t) CHECK(rolled.states[t][0] == direct.states[t][0]);

  // Different seed, still eps = 0: bit-identical.
  DisturbanceModel noise2(scalar(3.0), 12345);
  const Trajectory rolled2 = rollout(sys1, cost, scalar(1.0), zero, noise2, 0.0, 50);
  for (int t = 0; t <= 50; ++t) CHECK(rolled2.states[t][0] == rolled.states[t][0]);
}

TEST_CASE("rollout: frozen two-step values for system 1") {
  // Oracle: two direct applications of x' = x - cos(x) dt.
  const double x1 = 1.0 - std::cos(1.0) * 0.02;
  const double x2 = x1 - std::cos(x1) * 0.02;

  auto sys1 = make_system1(0.02);
  auto cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                  Matrix::Identity(1, 1), scalar(0.0));
  DisturbanceModel noise(scalar(1.0), 0);
  Controller zero = [](const Vector&, int) { return Vector::Zero(1); };
  const Trajectory traj = rollout(sys1, cost, scalar(1.0), zero, noise, 0.0, 2);
  CHECK(traj.states[0][0] == 1.0);
  CHECK(traj.states[1][0] == doctest::Approx(0.9891939538826372).epsilon(1e-15));
  CHECK(traj.states[2][0] == doctest::Approx(0.9782066827274781).epsilon(1e-15));
}

TEST_CASE("rollout: same seed gives bitwise identical noisy trajectories") {
  auto sys1 = make_system1(0.02);
  auto cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                  Matrix::Identity(1, 1) * 50.0, scalar(4.8));
  DisturbanceModel noise(scalar(3.0), 77);
  Controller zero = [](const Vector&, int) { return Vector::Zero(1); };
  const Trajectory a = rollout(sys1, cost, scalar(1.0), zero, noise, 0.5, 50, 3);
  const Trajectory b = rollout(sys1, cost, scalar(1.0), zero, noise, 0.5, 50, 3);
  for (int t = 0; t <= 50; ++t) CHECK(a.states[t][0] == b.states[t][0]);
  CHECK(a.total_cost == b.total_cost);

  // Different run index gives a different path.
  const Trajectory c = rollout(sys1, cost, scalar(1.0), zero, noise, 0.5, 50, 4);
  CHECK(c.states[50][0] != a.states[50][0]);
}

TEST_CASE("rollout: controller failures carry the step index") {
  auto sys1 = make_system1(0.02);
  auto cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                  Matrix::Identity(1, 1), scalar(0.0));
  DisturbanceModel noise(scalar(1.0), 0);
  Controller failing = [](const Vector&, int t) -> Vector {
    if (t == 3) throw std::runtime_error("boom");
    return Vector::Zero(1);
  };
  try {
    rollout(sys1, cost, scalar(1.0), failing, noise, 0.0, 10);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("step 3") != std::string::npos);
  }
}

TEST_CASE("trajectory cost identity holds to 1e-12 relative") {
  auto sys2 = make_system2(0.02);
  auto cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                  Matrix::Identity(1, 1) * 50.0, scalar(4.8));
  DisturbanceModel noise(scalar(2.0), 5);
  Controller ctrl = [](const Vector& x, int) { return Vector::Constant(1, 2.0 - x[0]); };
  const Trajectory traj = rollout(sys2, cost, scalar(1.0), ctrl, noise, 0.3, 50, 1);
  const double recomputed = recompute_cost(sys2, cost, traj);
  CHECK(traj.total_cost ==
        doctest::Approx(recomputed).epsilon(1e-12));
}

TEST_CASE("u_avg sigma rule reduces to mean |u| for unit-gain scalar models") {
  auto sys1 = make_system1(0.02);
  auto cost = make_quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                  Matrix::Identity(1, 1), scalar(0.0));
  std::vector<Vector> controls = {scalar(1.0), scalar(-2.0), scalar(3.0), scalar(-4.0)};
  const Trajectory nominal = forward_pass(sys1, cost, scalar(1.0), controls);
  const Vector sigma = u_avg_sigma(sys1, nominal);
  CHECK(sigma[0] == doctest::Approx(2.5).epsilon(1e-15));

  NoiseConfig config;
  config.rule = NoiseConfig::SigmaRule::kUAvg;
  config.seed = 9;
  const DisturbanceModel dist = resolve_noise(config, sys1, &nominal);
  CHECK(dist.base_sigma()[0] == doctest::Approx(2.5).epsilon(1e-15));

  // epsilon = 0 forces exact zeros regardless of sigma.
  NoiseConfig zero_eps;
  zero_eps.rule = NoiseConfig::SigmaRule::kFixed;
  zero_eps.fixed_sigma = scalar(5.0);
  const DisturbanceModel d2 = resolve_noise(zero_eps, sys1, nullptr);
  const Vector w = d2.sample(0, 0);
  CHECK(w.size() == 1);  // sampling works; eps scaling happens in step()
  const Vector next = step(sys1, scalar(1.0), Vector::Zero(1), w, 0.0);
  CHECK(next[0] == doctest::Approx(1.0 - std::cos(1.0) * 0.02).epsilon(1e-15));
}
