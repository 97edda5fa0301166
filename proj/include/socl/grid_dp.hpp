#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "socl/cost.hpp"
#include "socl/model.hpp"
#include "socl/simulate.hpp"

namespace socl {

/// Uniform 1-D state grid.
struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  int n_points = 2;

  void validate() const {
    require(lo < hi, "GridSpec: lo must be < hi");
    require(n_points >= 2, "GridSpec: need at least two points");
  }
  double spacing() const { return (hi - lo) / (n_points - 1); }
  double point(int j) const { return lo + spacing() * j; }
};

enum class ExpectationMode { kMonteCarlo, kQuadrature };

struct ExpectationSpec {
  ExpectationMode mode = ExpectationMode::kMonteCarlo;
  int n = 100;  // Monte Carlo samples or quadrature nodes
};

/// How the argmin over candidate next states is taken. kParabolic adds one
/// local quadratic fit through the discrete argmin and its neighbours,
/// recovering the continuous-control limit of the same enumeration — needed
/// when fourth-order effects must survive the control quantization.
enum class ArgminRefine { kNone, kParabolic };

struct GridDpOptions {
  ExpectationSpec expectation;
  ArgminRefine refine = ArgminRefine::kNone;
  double boundary_penalty = 0.0;  // added when a query clamps to the domain edge
  bool nearest_neighbor = false;  // ablation: nearest-neighbour instead of linear
};

/// Tabulated value function J(t, j) and controls u(t, j) on a grid.
struct GridValueFunction {
  GridSpec grid;
  double epsilon = 0.0;
  int expectation_n = 0;
  Matrix values;    // (T+1) x n_points
  Matrix controls;  // T x n_points
  int infeasible_entries = 0;

  int horizon() const { return static_cast<int>(controls.rows()); }
  /// Linear interpolation of J(t, .) with clamping to the domain.
  double value_at(int t, double x) const;
  /// Linear interpolation of u(t, .) with clamping to the domain.
  double control_at(int t, double x) const;
};

/// Control driving the deterministic Euler step from x to x_next:
/// u = ((x_next - x)/dt - f(x)) / g(x). Throws SolverError when |g| <= 1e-12.
double invert_control_1d(const ControlAffineModel& model, double x, double x_next);

/**
 * Expectation of the next-step value: mean of J_next at
 * x + (f + g u) dt + eps * w * sqrt(dt), w ~ N(0, base_sigma^2).
 * Monte Carlo draws are counter-based on (seed, t_key, j_key, sample);
 * quadrature mode is deterministic. Off-grid queries interpolate linearly,
 * out-of-domain queries clamp to the edge value plus the boundary penalty.
 */
double expected_next_value(const GridSpec& grid, const Eigen::RowVectorXd& J_next,
                           const ControlAffineModel& model, double x, double u,
                           double epsilon, double base_sigma,
                           const GridDpOptions& options, std::uint64_t seed,
                           std::uint64_t t_key, std::uint64_t j_key);

/**
 * Exact tabular stochastic DP: backward sweep over t = T..0 enumerating all
 * candidate next grid points, inverting the control for each transition and
 * keeping the argmin (ties broken toward smaller |u|). epsilon = 0 gives the
 * deterministic DP, bitwise independent of the seed.
 */
GridValueFunction solve_grid_dp(const ControlAffineModel& model, const CostModel& cost,
                                const GridSpec& grid, int T, double epsilon,
                                double base_sigma, const GridDpOptions& options,
                                std::uint64_t seed);

/// Backward policy-evaluation sweep (no minimization): fixes u = policy(t, x_j)
/// and accumulates the expected cost-to-go.
GridValueFunction evaluate_policy_on_grid(
    const ControlAffineModel& model, const CostModel& cost, const GridSpec& grid, int T,
    double epsilon, double base_sigma,
    const std::function<double(int, double)>& policy, const GridDpOptions& options,
    std::uint64_t seed);

/// Rollout controller interpolating u(t, .) at the current state (clamped).
Controller dp_policy_controller(std::shared_ptr<const GridValueFunction> table);

/// CSV round-trip of a value table; columns t, j, x, J, u (u empty on the
/// terminal row).
void write_grid_value_csv(const GridValueFunction& table, const std::string& path);
GridValueFunction read_grid_value_csv(const std::string& path);

}  // namespace socl
