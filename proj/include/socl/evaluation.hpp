#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socl/controllers.hpp"

namespace socl {

/// Least-squares slope of log y against log x; the regression behind the
/// scaling checks. Requires positive inputs.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Aggregated cost statistics of one (controller, epsilon) cell.
struct RolloutStats {
  std::string controller;
  double epsilon = 0.0;
  int n_runs = 0;
  double mean_cost = 0.0;
  double std_cost = 0.0;   // sample standard deviation (0 when n_runs == 1)
  double stderr_cost = 0.0;
  int degraded_runs = 0;
  bool has_replan_stats = false;
  double replan_mean = 0.0;
  double replan_std = 0.0;
};

/// One realized closed-loop run inside a cell.
struct RunRecord {
  std::string controller;
  double epsilon = 0.0;
  int run = 0;
  double cost = 0.0;
  bool degraded = false;
  int replans = 0;
};

struct SweepMetadata {
  std::string model;
  int T = 0;
  double dt = 0.0;
  int n_runs = 0;
  std::uint64_t seed = 0;
};

struct SweepTable {
  SweepMetadata meta;
  std::vector<RolloutStats> rows;   // one per (controller, epsilon)
  std::vector<RunRecord> runs;      // per-run costs, fixed order
};

/// Inputs shared by every cell of an evaluation: the problem, the resolved
/// disturbance model (common random numbers across controllers and epsilons)
/// and the optional grid context for DP-policy controllers.
struct EvalContext {
  const ControlAffineModel& model;
  const CostModel& cost;
  Vector x0;
  int T = 0;
  DisturbanceModel disturbance;
  std::optional<DpPolicyContext> dp_context;
};

/**
 * n_runs independent closed-loop rollouts of one controller at one epsilon.
 * Run i consumes the (seed, run = i) disturbance stream, so different
 * controllers evaluated with the same context see identical noise paths.
 * Throws SolverError if every run degrades.
 */
RolloutStats monte_carlo_eval(const EvalContext& ctx, const ControllerSpec& spec,
                              double epsilon, int n_runs,
                              std::vector<RunRecord>* per_run = nullptr);

/// Full controllers x epsilons cross product; cells run concurrently when
/// jobs > 1 and the assembled table is identical regardless of scheduling.
/// Cell failures are recorded (empty rows flagged in `errors`), not fatal.
struct SweepError {
  std::string controller;
  double epsilon;
  std::string message;
};
SweepTable epsilon_sweep(const EvalContext& ctx, const std::vector<ControllerSpec>& specs,
                         const std::vector<double>& eps_list, int n_runs, int jobs = 1,
                         std::vector<SweepError>* errors = nullptr);

/**
 * Empirical second-order scaling of the linearization error: simulate the
 * nonlinear closed loop under the linear feedback policy and, on the same
 * noise path, the linear comparison system
 *     dx^l_{t+1} = (A_t + B_t K_t) dx^l_t + eps w_t sqrt(dt);
 * e_t is the gap between realized deviation and dx^l. Reports
 * max_t E|e_t| per epsilon and the log-log slope (theory: 2).
 */
struct Lemma1Result {
  std::vector<double> eps_used;
  std::vector<double> error_norms;    // max_t mean_runs |e_t|
  std::vector<double> eps_dropped;    // diverged and excluded
  double slope = 0.0;
  bool exact_zero = false;            // linear system: e identically zero
};
Lemma1Result lemma1_scaling_check(const ControlAffineModel& model, const CostModel& cost,
                                  const FeedbackPolicy& policy,
                                  const DisturbanceModel& disturbance,
                                  const std::vector<double>& eps_list, int n_runs);

/**
 * Weighted least squares of mean cost on {1, eps^2, eps^4} (optionally
 * + eps^3), weights 1/stderr^2. Returns coefficients, their standard
 * errors and the relative fit residual.
 */
struct ExpansionFit {
  std::vector<double> coefficients;   // J0, J1, J2 [, J3 when cubic included]
  std::vector<double> std_errors;
  double relative_residual = 0.0;
  bool includes_cubic = false;
};
ExpansionFit expansion_fit(const std::vector<RolloutStats>& rows, bool include_cubic = false);

/**
 * Order of the optimality gap |varphi(x0) - J(x0)| in epsilon, measured with
 * variance-free quadrature expectations and the parabolic argmin refinement
 * (without it the control quantization buries the fourth-order signal).
 * J comes from the stochastic grid DP per epsilon; varphi evaluates the
 * deterministic-optimal grid policy on the stochastic system. Gaps are
 * measured on a doubled grid, and an epsilon is admitted only when its gap
 * exceeds 10x the grid-error floor |gap_n - gap_2n|.
 */
struct ClosenessResult {
  std::vector<double> eps_list;
  std::vector<double> gaps;         // on the doubled grid
  std::vector<double> floors;       // |gap_n - gap_2n|
  std::vector<bool> admitted;
  double slope = 0.0;               // over admitted epsilons
  double slope_lo = 0.0;            // refit with gaps shifted by -/+ floor
  double slope_hi = 0.0;
  int n_admitted = 0;
};
ClosenessResult closeness_order_check(const ControlAffineModel& model, const CostModel& cost,
                                      const GridSpec& grid, double x0, int T,
                                      const std::vector<double>& eps_list, int n_nodes,
                                      double base_sigma);

}  // namespace socl
