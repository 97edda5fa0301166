#include "socl/controllers.hpp"

#include <cmath>

namespace socl {

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kShrinkingMpc: return "shrinking_mpc";
    case ControllerKind::kFixedMpc: return "fixed_mpc";
    case ControllerKind::kTpfc: return "tpfc";
    case ControllerKind::kTpfc2: return "tpfc2";
    case ControllerKind::kGridDpPolicy: return "grid_dp_policy";
    case ControllerKind::kOpenLoop: return "open_loop";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "shrinking_mpc") return ControllerKind::kShrinkingMpc;
  if (name == "fixed_mpc") return ControllerKind::kFixedMpc;
  if (name == "tpfc") return ControllerKind::kTpfc;
  if (name == "tpfc2") return ControllerKind::kTpfc2;
  if (name == "grid_dp_policy") return ControllerKind::kGridDpPolicy;
  if (name == "open_loop") return ControllerKind::kOpenLoop;
  throw ContractError("unknown controller kind '" + name + "'");
}

void ControllerSpec::validate() const {
  solver.validate();
  if (kind == ControllerKind::kFixedMpc) {
    require(fixed_horizon >= 1, "ControllerSpec: fixed_horizon must be >= 1");
  }
  if (kind == ControllerKind::kTpfc2) {
    require(replan_threshold > 0.0, "ControllerSpec: replan_threshold must be positive");
  }
}

namespace {

class ShrinkingMpcController final : public PreparedController {
 public:
  ShrinkingMpcController(const ControlAffineModel& model, const CostModel& cost,
                         Vector x0, int T, SolverSettings settings)
      : model_(model), cost_(cost), x0_(std::move(x0)), T_(T), settings_(settings) {}

  RunResult run(const DisturbanceModel& disturbance, double epsilon,
                std::uint64_t run_index) const override {
    RunResult result;
    std::optional<std::vector<Vector>> warm;
    Controller controller = [&](const Vector& x, int t) -> Vector {
      const int H = T_ - t;
      const NominalTrajectory sol = solve_open_loop(model_, cost_, x, H, settings_, warm);
      if (!sol.converged) result.degraded = true;
      result.solve_log.push_back({t, sol.iterations, sol.converged, sol.trajectory.total_cost});
      if (t > 0) ++result.replans;
      if (H > 1) {
        warm = std::vector<Vector>(sol.trajectory.controls.begin() + 1,
                                   sol.trajectory.controls.end());
      } else {
        warm.reset();
      }
      return sol.trajectory.controls.front();
    };
    result.trajectory = rollout(model_, cost_, x0_, controller, disturbance, epsilon, T_,
                                run_index);
    return result;
  }

 private:
  const ControlAffineModel& model_;
  const CostModel& cost_;
  Vector x0_;
  int T_;
  SolverSettings settings_;
};

class FixedMpcController final : public PreparedController {
 public:
  FixedMpcController(const ControlAffineModel& model, const CostModel& cost, Vector x0,
                     int T, int H, SolverSettings settings)
      : model_(model), cost_(cost), x0_(std::move(x0)), T_(T), H_(H), settings_(settings) {}

  RunResult run(const DisturbanceModel& disturbance, double epsilon,
                std::uint64_t run_index) const override {
    RunResult result;
    std::vector<Vector> previous;  // last accepted plan, for warm starts
    Controller controller = [&](const Vector& x, int t) -> Vector {
      const int H = std::min(H_, T_ - t);
      std::optional<std::vector<Vector>> warm;
      if (!previous.empty()) {
        std::vector<Vector> tail(previous.begin() + 1, previous.end());
        while (static_cast<int>(tail.size()) < H) {
          tail.push_back(previous.back());  // repeat the last control as padding
        }
        tail.resize(H);
        warm = std::move(tail);
      }
      const NominalTrajectory sol = solve_open_loop(model_, cost_, x, H, settings_, warm);
      if (!sol.converged) result.degraded = true;
      result.solve_log.push_back({t, sol.iterations, sol.converged, sol.trajectory.total_cost});
      if (t > 0) ++result.replans;
      previous = sol.trajectory.controls;
      return sol.trajectory.controls.front();
    };
    result.trajectory = rollout(model_, cost_, x0_, controller, disturbance, epsilon, T_,
                                run_index);
    return result;
  }

 private:
  const ControlAffineModel& model_;
  const CostModel& cost_;
  Vector x0_;
  int T_;
  int H_;
  SolverSettings settings_;
};

class TpfcController final : public PreparedController {
 public:
  TpfcController(const ControlAffineModel& model, const CostModel& cost, Vector x0, int T,
                 SolverSettings settings, std::optional<double> replan_threshold)
      : model_(model), cost_(cost), x0_(std::move(x0)), T_(T), settings_(settings),
        threshold_(replan_threshold) {
    const NominalTrajectory nominal = solve_open_loop(model_, cost_, x0_, T_, settings_);
    if (!nominal.converged) {
      throw SolverError("tpfc: nominal solve did not converge");
    }
    initial_ = std::make_shared<FeedbackPolicy>(backward_gain_pass(model_, cost_, nominal));
  }

  RunResult run(const DisturbanceModel& disturbance, double epsilon,
                std::uint64_t run_index) const override {
    RunResult result;
    // Per-run execution state; replans swap in a locally owned policy.
    std::shared_ptr<const FeedbackPolicy> active = initial_;
    int base = 0;             // step the active policy was planned from
    double acc_real = 0.0;    // realized stage cost since `base`
    double acc_nom = 0.0;     // nominal stage cost since `base`
    bool nominal_only = false;  // gain pass failed; run open loop on the nominal

    Controller controller = [&, this](const Vector& x, int t) -> Vector {
      int k = t - base;
      if (threshold_ && k >= 1 && !nominal_only &&
          should_replan(acc_real, acc_nom, *threshold_)) {
        // Warm start from the tail of the active nominal; its length is
        // exactly the remaining horizon.
        const std::vector<Vector>& active_controls = active->nominal.trajectory.controls;
        std::vector<Vector> warm(active_controls.begin() + k, active_controls.end());
        const NominalTrajectory fresh =
            solve_open_loop(model_, cost_, x, T_ - t, settings_, warm);
        result.solve_log.push_back({t, fresh.iterations, fresh.converged,
                                    fresh.trajectory.total_cost});
        ++result.replans;
        if (!fresh.converged) {
          result.degraded = true;
          nominal_only = true;  // keep flying the previous plan open loop
        } else {
          try {
            active = std::make_shared<FeedbackPolicy>(
                backward_gain_pass(model_, cost_, fresh));
            base = t;
            acc_real = 0.0;
            acc_nom = 0.0;
            k = 0;
          } catch (const SolverError&) {
            result.degraded = true;
            nominal_only = true;
          }
        }
      }
      const Trajectory& nom = active->nominal.trajectory;
      const int last = nom.horizon() - 1;
      const int idx = std::min(k, last);
      const Vector u = nominal_only ? nom.controls[idx] : apply_policy(*active, x, idx);
      acc_real += cost_.stage.evaluate(x, u, model_.dt());
      acc_nom += nom.stage_costs[idx];
      return u;
    };
    result.trajectory = rollout(model_, cost_, x0_, controller, disturbance, epsilon, T_,
                                run_index);
    return result;
  }

 private:
  const ControlAffineModel& model_;
  const CostModel& cost_;
  Vector x0_;
  int T_;
  SolverSettings settings_;
  std::optional<double> threshold_;
  std::shared_ptr<const FeedbackPolicy> initial_;
};

class OpenLoopController final : public PreparedController {
 public:
  OpenLoopController(const ControlAffineModel& model, const CostModel& cost, Vector x0,
                     int T, SolverSettings settings)
      : model_(model), cost_(cost), x0_(std::move(x0)), T_(T) {
    nominal_ = solve_open_loop(model_, cost_, x0_, T_, settings);
    if (!nominal_.converged) throw SolverError("open_loop: nominal solve did not converge");
  }

  RunResult run(const DisturbanceModel& disturbance, double epsilon,
                std::uint64_t run_index) const override {
    RunResult result;
    Controller controller = [this](const Vector&, int t) -> Vector {
      return nominal_.trajectory.controls[t];
    };
    result.trajectory = rollout(model_, cost_, x0_, controller, disturbance, epsilon, T_,
                                run_index);
    return result;
  }

 private:
  const ControlAffineModel& model_;
  const CostModel& cost_;
  Vector x0_;
  int T_;
  NominalTrajectory nominal_;
};

class GridDpPolicyController final : public PreparedController {
 public:
  GridDpPolicyController(const ControlAffineModel& model, const CostModel& cost, Vector x0,
                         int T, double table_epsilon, const DpPolicyContext& ctx)
      : model_(model), cost_(cost), x0_(std::move(x0)), T_(T) {
    table_ = std::make_shared<GridValueFunction>(
        solve_grid_dp(model_, cost_, ctx.grid, T_, table_epsilon, ctx.base_sigma,
                      ctx.options, ctx.seed));
    controller_ = dp_policy_controller(table_);
  }

  RunResult run(const DisturbanceModel& disturbance, double epsilon,
                std::uint64_t run_index) const override {
    RunResult result;
    result.trajectory = rollout(model_, cost_, x0_, controller_, disturbance, epsilon, T_,
                                run_index);
    return result;
  }

 private:
  const ControlAffineModel& model_;
  const CostModel& cost_;
  Vector x0_;
  int T_;
  std::shared_ptr<GridValueFunction> table_;
  Controller controller_;
};

}  // namespace

std::unique_ptr<PreparedController> prepare_controller(
    const ControllerSpec& spec, const ControlAffineModel& model, const CostModel& cost,
    const Vector& x0, int T, double epsilon,
    const std::optional<DpPolicyContext>& dp_context) {
  spec.validate();
  require(T >= 1, "prepare_controller: horizon must be >= 1");
  switch (spec.kind) {
    case ControllerKind::kShrinkingMpc:
      return std::make_unique<ShrinkingMpcController>(model, cost, x0, T, spec.solver);
    case ControllerKind::kFixedMpc:
      return std::make_unique<FixedMpcController>(model, cost, x0, T, spec.fixed_horizon,
                                                  spec.solver);
    case ControllerKind::kTpfc:
      return std::make_unique<TpfcController>(model, cost, x0, T, spec.solver, std::nullopt);
    case ControllerKind::kTpfc2:
      return std::make_unique<TpfcController>(model, cost, x0, T, spec.solver,
                                              spec.replan_threshold);
    case ControllerKind::kOpenLoop:
      return std::make_unique<OpenLoopController>(model, cost, x0, T, spec.solver);
    case ControllerKind::kGridDpPolicy: {
      require(dp_context.has_value(),
              "prepare_controller: grid_dp_policy needs a DpPolicyContext");
      const double table_eps = spec.dp_table_epsilon < 0.0 ? epsilon : spec.dp_table_epsilon;
      return std::make_unique<GridDpPolicyController>(model, cost, x0, T, table_eps,
                                                      *dp_context);
    }
  }
  throw ContractError("prepare_controller: unhandled controller kind");
}

RunResult run_shrinking_mpc(const ControlAffineModel& model, const CostModel& cost,
                            const Vector& x0, int T, const DisturbanceModel& disturbance,
                            double epsilon, std::uint64_t run_index,
                            const SolverSettings& settings) {
  return ShrinkingMpcController(model, cost, x0, T, settings)
      .run(disturbance, epsilon, run_index);
}

RunResult run_fixed_mpc(const ControlAffineModel& model, const CostModel& cost,
                        const Vector& x0, int T, int H,
                        const DisturbanceModel& disturbance, double epsilon,
                        std::uint64_t run_index, const SolverSettings& settings) {
  require(H >= 1, "run_fixed_mpc: horizon must be >= 1");
  return FixedMpcController(model, cost, x0, T, H, settings)
      .run(disturbance, epsilon, run_index);
}

RunResult run_tpfc(const ControlAffineModel& model, const CostModel& cost, const Vector& x0,
                   int T, const DisturbanceModel& disturbance, double epsilon,
                   std::uint64_t run_index, const SolverSettings& settings,
                   std::optional<double> replan_threshold) {
  return TpfcController(model, cost, x0, T, settings, replan_threshold)
      .run(disturbance, epsilon, run_index);
}

}  // namespace socl
