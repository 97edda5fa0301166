#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "socl/grid_dp.hpp"
#include "socl/ilqr.hpp"
#include "socl/noise.hpp"
#include "socl/tpfc.hpp"

namespace socl {

enum class ControllerKind {
  kShrinkingMpc,
  kFixedMpc,
  kTpfc,
  kTpfc2,
  kGridDpPolicy,
  kOpenLoop,
};

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::kShrinkingMpc;
  std::string label;                // report name; defaults to the kind
  int fixed_horizon = 5;            // fixed_mpc only
  double replan_threshold = 0.2;    // tpfc2 only
  SolverSettings solver;
  // grid_dp_policy only: epsilon the table is solved at; negative means
  // "match the evaluation epsilon" (the paper's DP-at-the-tested-noise setup).
  double dp_table_epsilon = -1.0;

  std::string name() const { return label.empty() ? to_string(kind) : label; }
  void validate() const;
};

/// Inner-solve bookkeeping for the replan log.
struct SolveStat {
  int step = 0;
  int iterations = 0;
  bool converged = true;
  double planned_cost = 0.0;
};

struct RunResult {
  Trajectory trajectory;
  bool degraded = false;  // some inner solve failed; best iterate was used
  int replans = 0;        // solves after the first (tpfc2 triggers, MPC re-solves)
  std::vector<SolveStat> solve_log;
};

/// Everything a grid_dp_policy controller needs besides the model/cost.
struct DpPolicyContext {
  GridSpec grid;
  GridDpOptions options;
  double base_sigma = 1.0;
  std::uint64_t seed = 0;  // inner-expectation stream
};

/**
 * A controller bound to one (model, cost, x0, T, epsilon) cell with all
 * per-cell precomputation done (nominal solve, feedback gains, DP table).
 * run() is const and thread-safe: concurrent runs only share immutable state.
 */
class PreparedController {
 public:
  virtual ~PreparedController() = default;
  virtual RunResult run(const DisturbanceModel& disturbance, double epsilon,
                        std::uint64_t run_index) const = 0;
};

std::unique_ptr<PreparedController> prepare_controller(
    const ControllerSpec& spec, const ControlAffineModel& model, const CostModel& cost,
    const Vector& x0, int T, double epsilon,
    const std::optional<DpPolicyContext>& dp_context = std::nullopt);

/// Shrinking-horizon MPC: re-solve the remaining-horizon deterministic
/// problem from the current state each step and apply the first control.
RunResult run_shrinking_mpc(const ControlAffineModel& model, const CostModel& cost,
                            const Vector& x0, int T, const DisturbanceModel& disturbance,
                            double epsilon, std::uint64_t run_index,
                            const SolverSettings& settings = {});

/// Fixed-horizon (receding) MPC with the terminal cost applied at the
/// receding boundary; horizons truncate to the remaining steps near the end.
RunResult run_fixed_mpc(const ControlAffineModel& model, const CostModel& cost,
                        const Vector& x0, int T, int H,
                        const DisturbanceModel& disturbance, double epsilon,
                        std::uint64_t run_index, const SolverSettings& settings = {});

/**
 * T-PFC: one nominal solve plus the perturbation-feedback gains, then pure
 * offline execution. With a replan threshold (T-PFC2) the accumulated
 * realized stage cost is compared against the nominal's accumulated stage
 * cost each step; a trigger re-solves from the current state for the
 * remaining horizon and recomputes the gains.
 */
RunResult run_tpfc(const ControlAffineModel& model, const CostModel& cost, const Vector& x0,
                   int T, const DisturbanceModel& disturbance, double epsilon,
                   std::uint64_t run_index, const SolverSettings& settings = {},
                   std::optional<double> replan_threshold = std::nullopt);

}  // namespace socl
