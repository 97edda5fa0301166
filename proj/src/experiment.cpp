#include "socl/experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "socl/models_builtin.hpp"
#include "socl/tpfc.hpp"

namespace socl {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix diag_matrix(const std::vector<double>& entries, int dim) {
  Vector d(dim);
  if (entries.size() == 1) {
    d.setConstant(entries[0]);
  } else {
    for (int i = 0; i < dim; ++i) d[i] = entries[i];
  }
  return d.asDiagonal();
}

Vector to_vector(const std::vector<double>& entries, int dim) {
  Vector v(dim);
  if (entries.size() == 1) {
    v.setConstant(entries[0]);
  } else {
    for (int i = 0; i < dim; ++i) v[i] = entries[i];
  }
  return v;
}

void write_sweep_csv(const SweepTable& table, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write " + path);
  out << "controller,epsilon,n_runs,mean_cost,std_cost,stderr,degraded,replan_mean,replan_std\n";
  for (const auto& row : table.rows) {
    out << row.controller << ',' << fmt(row.epsilon) << ',' << row.n_runs << ','
        << fmt(row.mean_cost) << ',' << fmt(row.std_cost) << ',' << fmt(row.stderr_cost)
        << ',' << row.degraded_runs << ',';
    if (row.has_replan_stats) {
      out << fmt(row.replan_mean) << ',' << fmt(row.replan_std);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

void write_costs_csv(const SweepTable& table, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write " + path);
  out << "controller,epsilon,run,cost,degraded,replans\n";
  for (const auto& run : table.runs) {
    out << run.controller << ',' << fmt(run.epsilon) << ',' << run.run << ','
        << fmt(run.cost) << ',' << (run.degraded ? 1 : 0) << ',' << run.replans << '\n';
  }
}

void write_replan_csv(const SweepTable& table, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write " + path);
  out << "controller,epsilon,run,replans\n";
  // Only controllers that report replan statistics appear here.
  std::vector<std::string> replanning;
  for (const auto& row : table.rows) {
    if (row.has_replan_stats) replanning.push_back(row.controller);
  }
  for (const auto& run : table.runs) {
    if (std::find(replanning.begin(), replanning.end(), run.controller) != replanning.end()) {
      out << run.controller << ',' << fmt(run.epsilon) << ',' << run.run << ','
          << run.replans << '\n';
    }
  }
}

json config_manifest(const ExperimentConfig& config, const Vector& resolved_sigma) {
  json j;
  j["model"] = {{"name", config.model_name}, {"dt", config.dt},
                {"params", config.model_params}};
  j["cost"] = {{"Q", config.q_diag}, {"R", config.r_diag}, {"QT", config.qt_diag},
               {"target", config.target}};
  j["problem"] = {{"x0", config.x0}, {"T", config.T}};
  j["noise"] = {{"rule", config.sigma_is_u_avg ? "u_avg" : "fixed"},
                {"seed", config.seed},
                {"resolved_sigma", std::vector<double>(resolved_sigma.data(),
                                                       resolved_sigma.data() + resolved_sigma.size())}};
  if (config.grid) {
    j["grid"] = {{"lo", config.grid->lo}, {"hi", config.grid->hi},
                 {"n_points", config.grid->n_points},
                 {"boundary_penalty", config.boundary_penalty}};
  }
  j["expectation"] = {
      {"mode", config.expectation.mode == ExpectationMode::kQuadrature ? "quadrature"
                                                                       : "monte_carlo"},
      {"n", config.expectation.n}};
  j["sweep"] = {{"eps_list", config.eps_list}, {"n_runs", config.n_runs}};
  json controllers = json::array();
  for (const auto& spec : config.controllers) {
    json c = {{"label", spec.name()}, {"kind", to_string(spec.kind)}};
    if (spec.kind == ControllerKind::kFixedMpc) c["fixed_horizon"] = spec.fixed_horizon;
    if (spec.kind == ControllerKind::kTpfc2) c["replan_threshold"] = spec.replan_threshold;
    if (spec.kind == ControllerKind::kGridDpPolicy) {
      c["dp_epsilon"] = spec.dp_table_epsilon < 0 ? json("match") : json(spec.dp_table_epsilon);
    }
    controllers.push_back(c);
  }
  j["controllers"] = controllers;
  j["output"] = {{"dir", config.output_dir}, {"jobs", config.jobs}};
  return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto problems = validate_config(config);
  if (!problems.empty()) {
    std::string joined = "config validation failed:";
    for (const auto& p : problems) joined += "\n  " + p;
    throw ContractError(joined);
  }

  const ControlAffineModel model = make_model(config.model_name, config.model_params, config.dt);
  const int n = model.state_dim(), p = model.control_dim();
  const CostModel cost = make_quadratic_cost(diag_matrix(config.q_diag, n),
                                             diag_matrix(config.r_diag, p),
                                             diag_matrix(config.qt_diag, n),
                                             to_vector(config.target, n));
  const Vector x0 = to_vector(config.x0, n);

  // The eps = 0 nominal fixes the u_avg noise scale and seeds the checks.
  const NominalTrajectory nominal = solve_open_loop(model, cost, x0, config.T);
  if (!nominal.converged) {
    throw SolverError("run_experiment: nominal solve did not converge for model '" +
                      config.model_name + "'");
  }
  NoiseConfig noise;
  noise.rule = config.sigma_is_u_avg ? NoiseConfig::SigmaRule::kUAvg
                                     : NoiseConfig::SigmaRule::kFixed;
  if (!config.sigma_is_u_avg) noise.fixed_sigma = to_vector(config.fixed_sigma, n);
  noise.seed = config.seed;
  const DisturbanceModel disturbance = resolve_noise(noise, model, &nominal.trajectory);

  std::optional<DpPolicyContext> dp_context;
  if (config.grid) {
    DpPolicyContext ctx;
    ctx.grid = *config.grid;
    ctx.options.expectation = config.expectation;
    ctx.options.boundary_penalty = config.boundary_penalty;
    ctx.base_sigma = disturbance.base_sigma()[0];
    ctx.seed = config.seed;
    dp_context = ctx;
  }

  ExperimentResult result;
  EvalContext ctx{model, cost, x0, config.T, disturbance, dp_context};
  result.sweep =
      epsilon_sweep(ctx, config.controllers, config.eps_list, config.n_runs, config.jobs,
                    &result.cell_errors);
  result.sweep.meta.model = config.model_name;

  json diagnostics;
  bool check_failed = false;

  if (!config.checks.lemma1_eps.empty()) {
    const FeedbackPolicy policy = backward_gain_pass(model, cost, nominal);
    const Lemma1Result lemma = lemma1_scaling_check(model, cost, policy, disturbance,
                                                    config.checks.lemma1_eps,
                                                    config.checks.lemma1_runs);
    json entry = {{"slope", lemma.slope},
                  {"exact_zero", lemma.exact_zero},
                  {"eps", lemma.eps_used},
                  {"error_norms", lemma.error_norms},
                  {"eps_dropped", lemma.eps_dropped},
                  {"n_runs", config.checks.lemma1_runs}};
    if (config.checks.lemma1_slope_min) {
      const bool ok = lemma.exact_zero || lemma.slope >= *config.checks.lemma1_slope_min;
      entry["slope_min"] = *config.checks.lemma1_slope_min;
      entry["pass"] = ok;
      if (!ok) check_failed = true;
    }
    if (config.checks.lemma1_slope_max && !lemma.exact_zero) {
      const bool ok = lemma.slope <= *config.checks.lemma1_slope_max;
      entry["slope_max"] = *config.checks.lemma1_slope_max;
      entry["pass"] = entry.value("pass", true) && ok;
      if (!ok) check_failed = true;
    }
    diagnostics["lemma1"] = entry;
  }

  if (!config.checks.expansion_controller.empty()) {
    std::vector<RolloutStats> rows;
    for (const auto& row : result.sweep.rows) {
      if (row.controller == config.checks.expansion_controller) rows.push_back(row);
    }
    const ExpansionFit fit = expansion_fit(rows);
    json entry = {{"controller", config.checks.expansion_controller},
                  {"coefficients", fit.coefficients},
                  {"std_errors", fit.std_errors},
                  {"relative_residual", fit.relative_residual},
                  {"nominal_cost", nominal.trajectory.total_cost}};
    // The zeroth coefficient is the nominal cost; report the z-score.
    const double se = std::max(fit.std_errors[0], 1e-300);
    entry["j0_z_score"] = (fit.coefficients[0] - nominal.trajectory.total_cost) / se;
    if (config.checks.expansion_cubic_column) {
      const ExpansionFit cubic = expansion_fit(rows, true);
      entry["cubic_coefficient"] = cubic.coefficients[3];
      entry["cubic_std_error"] = cubic.std_errors[3];
      entry["cubic_z_score"] = cubic.coefficients[3] / std::max(cubic.std_errors[3], 1e-300);
    }
    diagnostics["expansion_fit"] = entry;
  }

  if (!config.checks.closeness_eps.empty()) {
    const ClosenessResult closeness = closeness_order_check(
        model, cost, *config.grid, x0[0], config.T, config.checks.closeness_eps,
        config.checks.closeness_nodes, disturbance.base_sigma()[0]);
    json entry = {{"slope", closeness.slope},
                  {"slope_lo", closeness.slope_lo},
                  {"slope_hi", closeness.slope_hi},
                  {"eps", closeness.eps_list},
                  {"gaps", closeness.gaps},
                  {"floors", closeness.floors},
                  {"admitted", closeness.admitted},
                  {"n_admitted", closeness.n_admitted}};
    if (config.checks.closeness_slope_min) {
      const bool ok = closeness.slope >= *config.checks.closeness_slope_min;
      entry["slope_min"] = *config.checks.closeness_slope_min;
      entry["pass"] = ok;
      if (!ok) check_failed = true;
    }
    diagnostics["closeness"] = entry;
  }

  if (!result.cell_errors.empty()) {
    json cell_errors = json::array();
    for (const auto& e : result.cell_errors) {
      cell_errors.push_back(
          {{"controller", e.controller}, {"epsilon", e.epsilon}, {"message", e.message}});
    }
    diagnostics["cell_errors"] = cell_errors;
  }
  result.diagnostics_json = diagnostics.dump(2);

  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const fs::path dir(config.output_dir);
  write_sweep_csv(result.sweep, (dir / "sweep.csv").string());
  write_costs_csv(result.sweep, (dir / "costs.csv").string());
  write_replan_csv(result.sweep, (dir / "replan.csv").string());
  {
    std::ofstream out(dir / "diagnostics.json");
    out << result.diagnostics_json << '\n';
  }
  {
    std::ofstream out(dir / "manifest.json");
    out << config_manifest(config, disturbance.base_sigma()).dump(2) << '\n';
  }

  if (check_failed) {
    result.exit_code = kExitCheckFailure;
  } else if (!result.cell_errors.empty()) {
    result.exit_code = kExitCellFailure;
  }
  return result;
}

std::vector<std::string> emit_plot_data(const std::string& sweep_csv,
                                        const std::string& output_dir) {
  std::ifstream in(sweep_csv);
  require(in.good(), "emit_plot_data: cannot open " + sweep_csv);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "emit_plot_data: empty file");
  require(line.rfind("controller,epsilon,", 0) == 0,
          "emit_plot_data: unrecognized header at line 1");

  struct Row {
    std::string controller;
    double epsilon, mean, stddev;
  };
  std::vector<Row> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Row row;
    try {
      std::getline(ss, row.controller, ',');
      std::getline(ss, field, ',');
      row.epsilon = std::stod(field);
      std::getline(ss, field, ',');  // n_runs
      std::getline(ss, field, ',');
      row.mean = std::stod(field);
      std::getline(ss, field, ',');
      row.stddev = std::stod(field);
    } catch (const std::exception&) {
      throw ContractError("emit_plot_data: parse error at line " + std::to_string(lineno));
    }
    require(!row.controller.empty(),
            "emit_plot_data: missing controller at line " + std::to_string(lineno));
    rows.push_back(row);
  }

  namespace fs = std::filesystem;
  fs::create_directories(output_dir);
  std::vector<std::string> series;
  for (const auto& row : rows) {
    if (std::find(series.begin(), series.end(), row.controller) == series.end()) {
      series.push_back(row.controller);
    }
  }
  std::vector<std::string> written;
  for (const auto& name : series) {
    const fs::path path = fs::path(output_dir) / ("plot_" + name + ".csv");
    std::ofstream out(path);
    require(out.good(), "emit_plot_data: cannot write " + path.string());
    out << "series,epsilon,mean,band_lo,band_hi\n";
    for (const auto& row : rows) {
      if (row.controller != name) continue;
      out << name << ',' << fmt(row.epsilon) << ',' << fmt(row.mean) << ','
          << fmt(row.mean - row.stddev) << ',' << fmt(row.mean + row.stddev) << '\n';
    }
    written.push_back(path.string());
  }
  return written;
}

}  // namespace socl
