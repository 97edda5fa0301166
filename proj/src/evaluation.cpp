#include "socl/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace socl {

namespace {

// Slope of a least-squares line through (x, y); also writes the intercept's
// partner statistics when requested.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "ols_slope: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  require(std::fabs(denom) > 1e-300, "ols_slope: degenerate design");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "log_log_slope: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log_log_slope: inputs must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return ols_slope(lx, ly);
}

RolloutStats monte_carlo_eval(const EvalContext& ctx, const ControllerSpec& spec,
                              double epsilon, int n_runs,
                              std::vector<RunRecord>* per_run) {
  require(n_runs >= 1, "monte_carlo_eval: n_runs must be >= 1");
  const auto controller =
      prepare_controller(spec, ctx.model, ctx.cost, ctx.x0, ctx.T, epsilon, ctx.dp_context);

  RolloutStats stats;
  stats.controller = spec.name();
  stats.epsilon = epsilon;
  stats.n_runs = n_runs;
  stats.has_replan_stats =
      spec.kind == ControllerKind::kTpfc2 || spec.kind == ControllerKind::kTpfc;

  std::vector<double> costs(n_runs);
  std::vector<int> replans(n_runs);
  for (int i = 0; i < n_runs; ++i) {
    const RunResult run = controller->run(ctx.disturbance, epsilon, i);
    costs[i] = run.trajectory.total_cost;
    replans[i] = run.replans;
    if (run.degraded) ++stats.degraded_runs;
    if (per_run) {
      per_run->push_back({spec.name(), epsilon, i, costs[i], run.degraded, run.replans});
    }
  }
  if (stats.degraded_runs == n_runs) {
    throw SolverError("monte_carlo_eval: every run degraded for controller '" +
                      spec.name() + "' at epsilon " + std::to_string(epsilon));
  }

  double mean = 0.0;
  for (double c : costs) mean += c;
  mean /= n_runs;
  double var = 0.0;
  for (double c : costs) var += (c - mean) * (c - mean);
  stats.mean_cost = mean;
  stats.std_cost = n_runs > 1 ? std::sqrt(var / (n_runs - 1)) : 0.0;
  stats.stderr_cost = stats.std_cost / std::sqrt(static_cast<double>(n_runs));

  if (stats.has_replan_stats) {
    double rm = 0.0;
    for (int r : replans) rm += r;
    rm /= n_runs;
    double rv = 0.0;
    for (int r : replans) rv += (r - rm) * (r - rm);
    stats.replan_mean = rm;
    stats.replan_std = n_runs > 1 ? std::sqrt(rv / (n_runs - 1)) : 0.0;
  }
  return stats;
}

SweepTable epsilon_sweep(const EvalContext& ctx, const std::vector<ControllerSpec>& specs,
                         const std::vector<double>& eps_list, int n_runs, int jobs,
                         std::vector<SweepError>* errors) {
  require(!eps_list.empty(), "epsilon_sweep: eps_list must be nonempty");
  require(!specs.empty(), "epsilon_sweep: controllers must be nonempty");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    require(eps_list[i] > eps_list[i - 1], "epsilon_sweep: eps_list must be ascending");
  }

  struct Cell {
    std::size_t spec_idx;
    double epsilon;
    std::optional<RolloutStats> stats;
    std::vector<RunRecord> runs;
    std::string error;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (double eps : eps_list) cells.push_back({s, eps, std::nullopt, {}, {}});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      Cell& cell = cells[i];
      try {
        cell.stats = monte_carlo_eval(ctx, specs[cell.spec_idx], cell.epsilon, n_runs,
                                      &cell.runs);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepTable table;
  table.meta.T = ctx.T;
  table.meta.dt = ctx.model.dt();
  table.meta.n_runs = n_runs;
  table.meta.seed = ctx.disturbance.seed();
  for (const Cell& cell : cells) {
    if (cell.stats) {
      table.rows.push_back(*cell.stats);
      table.runs.insert(table.runs.end(), cell.runs.begin(), cell.runs.end());
    } else if (errors) {
      errors->push_back({specs[cell.spec_idx].name(), cell.epsilon, cell.error});
    }
  }
  return table;
}

Lemma1Result lemma1_scaling_check(const ControlAffineModel& model, const CostModel& cost,
                                  const FeedbackPolicy& policy,
                                  const DisturbanceModel& disturbance,
                                  const std::vector<double>& eps_list, int n_runs) {
  require(eps_list.size() >= 3, "lemma1_scaling_check: need >= 3 epsilon values");
  for (double e : eps_list) require(e > 0.0, "lemma1_scaling_check: epsilons must be positive");
  require(n_runs >= 1, "lemma1_scaling_check: n_runs must be >= 1");

  const Trajectory& nominal = policy.nominal.trajectory;
  const int T = nominal.horizon();
  const double sqrt_dt = std::sqrt(model.dt());

  // Closed-loop linearization about the nominal, shared by all runs.
  std::vector<Matrix> Abar(T);
  for (int t = 0; t < T; ++t) {
    const Linearization lin = linearize(model, nominal.states[t], nominal.controls[t]);
    Abar[t] = lin.A + lin.B * policy.gains[t];
  }

  Lemma1Result result;
  double reference_scale = 0.0;
  for (double eps : eps_list) {
    std::vector<double> mean_err(T + 1, 0.0);
    bool diverged = false;
    for (int run = 0; run < n_runs && !diverged; ++run) {
      Vector x = nominal.states[0];
      Vector dxl = Vector::Zero(model.state_dim());
      for (int t = 0; t < T; ++t) {
        const Vector w = disturbance.sample(run, t);
        const Vector u = apply_policy(policy, x, t);
        x = step(model, x, u, w, eps);
        dxl = Abar[t] * dxl + eps * sqrt_dt * w;
        if (!all_finite(x)) {
          diverged = true;
          break;
        }
        const Vector e = (x - nominal.states[t + 1]) - dxl;
        mean_err[t + 1] += e.norm();
        reference_scale = std::max(reference_scale, dxl.norm());
      }
    }
    if (diverged) {
      result.eps_dropped.push_back(eps);
      continue;
    }
    double worst = 0.0;
    for (double m : mean_err) worst = std::max(worst, m / n_runs);
    result.eps_used.push_back(eps);
    result.error_norms.push_back(worst);
  }

  require(result.eps_used.size() >= 2 || !result.eps_dropped.empty(),
          "lemma1_scaling_check: nothing to fit");

  // Linear closed loop: e is identically zero (up to roundoff on the scale
  // of the linear deviations).
  double max_err = 0.0;
  for (double e : result.error_norms) max_err = std::max(max_err, e);
  if (max_err <= 1e-12 * std::max(1.0, reference_scale)) {
    result.exact_zero = true;
    result.slope = 0.0;
    return result;
  }

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < result.eps_used.size(); ++i) {
    lx.push_back(std::log(result.eps_used[i]));
    ly.push_back(std::log(result.error_norms[i]));
  }
  result.slope = ols_slope(lx, ly);
  return result;
}

ExpansionFit expansion_fit(const std::vector<RolloutStats>& rows, bool include_cubic) {
  std::vector<double> distinct;
  for (const auto& r : rows) {
    const double e2 = r.epsilon * r.epsilon;
    bool seen = false;
    for (double d : distinct) {
      if (std::fabs(d - e2) < 1e-15) seen = true;
    }
    if (!seen) distinct.push_back(e2);
  }
  const int k = include_cubic ? 4 : 3;
  require(static_cast<int>(rows.size()) >= (include_cubic ? 4 : 4),
          "expansion_fit: need >= 4 rows");
  require(static_cast<int>(distinct.size()) >= (include_cubic ? 4 : 3),
          "expansion_fit: ill-conditioned design (too few distinct epsilon^2)");

  const int m = static_cast<int>(rows.size());
  Matrix X(m, k);
  Vector y(m), w(m);
  for (int i = 0; i < m; ++i) {
    const double eps = rows[i].epsilon;
    X(i, 0) = 1.0;
    X(i, 1) = eps * eps;
    X(i, 2) = eps * eps * eps * eps;
    if (include_cubic) X(i, 3) = eps * eps * eps;
    y[i] = rows[i].mean_cost;
    const double se = std::max(rows[i].stderr_cost, 1e-12);
    w[i] = 1.0 / (se * se);
  }

  const Matrix Xw = w.asDiagonal() * X;
  const Matrix normal = X.transpose() * Xw;
  const Matrix cov = normal.inverse();
  const Vector beta = cov * (Xw.transpose() * y);

  ExpansionFit fit;
  fit.includes_cubic = include_cubic;
  for (int j = 0; j < k; ++j) {
    fit.coefficients.push_back(beta[j]);
    fit.std_errors.push_back(std::sqrt(std::max(0.0, cov(j, j))));
  }
  const Vector resid = y - X * beta;
  fit.relative_residual = resid.norm() / std::max(1e-300, y.norm());
  return fit;
}

ClosenessResult closeness_order_check(const ControlAffineModel& model, const CostModel& cost,
                                      const GridSpec& grid, double x0, int T,
                                      const std::vector<double>& eps_list, int n_nodes,
                                      double base_sigma) {
  require(eps_list.size() >= 3, "closeness_order_check: need >= 3 epsilon values");
  grid.validate();
  require(n_nodes >= 3, "closeness_order_check: need >= 3 quadrature nodes");

  GridDpOptions options;
  options.expectation = {ExpectationMode::kQuadrature, n_nodes};
  options.refine = ArgminRefine::kParabolic;

  GridSpec fine = grid;
  fine.n_points = 2 * grid.n_points;

  auto gap_on = [&](const GridSpec& g) {
    const GridValueFunction det = solve_grid_dp(model, cost, g, T, 0.0, base_sigma, options, 0);
    auto policy = [&det](int t, double x) { return det.control_at(t, x); };
    std::vector<double> gaps;
    gaps.reserve(eps_list.size());
    for (double eps : eps_list) {
      const GridValueFunction J =
          solve_grid_dp(model, cost, g, T, eps, base_sigma, options, 0);
      const GridValueFunction phi = evaluate_policy_on_grid(model, cost, g, T, eps,
                                                            base_sigma, policy, options, 0);
      gaps.push_back(std::fabs(phi.value_at(0, x0) - J.value_at(0, x0)));
    }
    return gaps;
  };

  const std::vector<double> gap_coarse = gap_on(grid);
  const std::vector<double> gap_fine = gap_on(fine);

  ClosenessResult result;
  result.eps_list = eps_list;
  result.gaps = gap_fine;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double floor = std::fabs(gap_fine[i] - gap_coarse[i]);
    result.floors.push_back(floor);
    result.admitted.push_back(gap_fine[i] > 10.0 * floor && gap_fine[i] > 0.0);
    if (result.admitted.back()) ++result.n_admitted;
  }
  require(result.n_admitted >= 2,
          "closeness_order_check: fewer than two epsilons above the grid-error floor");

  auto fit_with_shift = [&](double direction) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      if (!result.admitted[i]) continue;
      const double g = std::max(result.gaps[i] + direction * result.floors[i], 1e-300);
      lx.push_back(std::log(eps_list[i]));
      ly.push_back(std::log(g));
    }
    return ols_slope(lx, ly);
  };
  result.slope = fit_with_shift(0.0);
  // Band: perturb small-eps gaps down and large-eps gaps up and vice versa
  // would be the worst case; shifting all one way is the documented simpler
  // envelope and is what the acceptance threshold accounts for.
  result.slope_lo = std::min(fit_with_shift(-1.0), fit_with_shift(1.0));
  result.slope_hi = std::max(fit_with_shift(-1.0), fit_with_shift(1.0));
  return result;
}

}  // namespace socl
