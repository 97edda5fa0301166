#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socl/controllers.hpp"
#include "socl/noise.hpp"

namespace socl {

/**
 * Experiment description parsed from the flat sectioned key-value format
 * (see the config-format notes in the README). Controllers come from
 * [controller.<label>] sections; the optional [checks] section requests
 * perturbation-theory diagnostics on top of the sweep.
 */
struct ExperimentConfig {
  // [model]
  std::string model_name;
  std::map<std::string, double> model_params;
  double dt = 0.02;

  // [cost] diagonals broadcast to the model dimensions when given as scalars
  std::vector<double> q_diag{1.0};
  std::vector<double> r_diag{1.0};
  std::vector<double> qt_diag{1.0};
  std::vector<double> target{0.0};

  // [problem]
  std::vector<double> x0{0.0};
  int T = 50;

  // [noise]
  bool sigma_is_u_avg = true;
  std::vector<double> fixed_sigma;
  std::uint64_t seed = 0;

  // [grid] (required exactly when a DP-policy controller or closeness check
  // needs it)
  std::optional<GridSpec> grid;
  double boundary_penalty = 0.0;

  // [expectation]
  ExpectationSpec expectation{ExpectationMode::kMonteCarlo, 100};

  // [sweep]
  std::vector<double> eps_list{0.0};
  int n_runs = 100;

  std::vector<ControllerSpec> controllers;

  // [checks]
  struct Checks {
    std::vector<double> lemma1_eps;
    int lemma1_runs = 200;
    std::optional<double> lemma1_slope_min;
    std::optional<double> lemma1_slope_max;
    std::string expansion_controller;  // fit this controller's sweep rows
    bool expansion_cubic_column = false;
    std::vector<double> closeness_eps;
    int closeness_nodes = 7;
    std::optional<double> closeness_slope_min;
    bool any() const {
      return !lemma1_eps.empty() || !expansion_controller.empty() || !closeness_eps.empty();
    }
  } checks;

  // [output]
  std::string output_dir = "out";
  int jobs = 1;
};

/// Parse a config file. Throws ContractError carrying every syntax problem.
ExperimentConfig load_config(const std::string& path);

/// Parse config text (file contents). Same error behaviour as load_config.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

/// All validation problems, each prefixed with its field path; empty when
/// the config is runnable.
std::vector<std::string> validate_config(const ExperimentConfig& config);

}  // namespace socl
