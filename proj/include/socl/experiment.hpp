#pragma once

#include <string>

#include "socl/config.hpp"
#include "socl/evaluation.hpp"

namespace socl {

/// Exit statuses shared by the library runner and the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitCellFailure = 2,
  kExitCheckFailure = 3,
};

struct ExperimentResult {
  SweepTable sweep;
  std::vector<SweepError> cell_errors;
  std::string diagnostics_json;  // fit coefficients, slopes, check outcomes
  int exit_code = kExitOk;
};

/**
 * Execute a validated config end to end: resolve the model/cost/noise,
 * run the controller x epsilon sweep, run any requested checks, and write
 * sweep.csv, costs.csv, replan.csv, diagnostics.json and manifest.json
 * into output_dir. Throws ContractError on validation failure.
 */
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Rewrite a sweep.csv into per-controller long-format series files
/// (plot_<controller>.csv with columns series, epsilon, mean, band_lo,
/// band_hi). Returns the file names written.
std::vector<std::string> emit_plot_data(const std::string& sweep_csv,
                                        const std::string& output_dir);

}  // namespace socl
