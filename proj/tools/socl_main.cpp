#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "socl/experiment.hpp"
#include "socl/models_builtin.hpp"

namespace {

int cmd_run(const std::string& config_path, int seed_override, const std::string& dir_override,
            int jobs_override) {
  socl::ExperimentConfig config;
  try {
    config = socl::load_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return socl::kExitValidation;
  }
  if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
  if (!dir_override.empty()) config.output_dir = dir_override;
  if (jobs_override >= 1) config.jobs = jobs_override;

  try {
    const socl::ExperimentResult result = socl::run_experiment(config);
    std::printf("wrote %s/{sweep.csv,costs.csv,replan.csv,diagnostics.json,manifest.json}\n",
                config.output_dir.c_str());
    for (const auto& row : result.sweep.rows) {
      std::printf("%-24s eps=%-8g mean=%-12g std=%-12g degraded=%d\n", row.controller.c_str(),
                  row.epsilon, row.mean_cost, row.std_cost, row.degraded_runs);
    }
    for (const auto& err : result.cell_errors) {
      std::fprintf(stderr, "cell failed: %s eps=%g: %s\n", err.controller.c_str(), err.epsilon,
                   err.message.c_str());
    }
    if (result.exit_code == socl::kExitCheckFailure) {
      std::fprintf(stderr, "one or more requested checks failed (see diagnostics.json)\n");
    }
    return result.exit_code;
  } catch (const socl::ContractError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return socl::kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime failure: %s\n", e.what());
    return socl::kExitCellFailure;
  }
}

int cmd_validate(const std::string& config_path) {
  try {
    const socl::ExperimentConfig config = socl::load_config(config_path);
    const auto problems = socl::validate_config(config);
    if (problems.empty()) {
      std::printf("%s: ok\n", config_path.c_str());
      return socl::kExitOk;
    }
    for (const auto& p : problems) std::fprintf(stderr, "%s\n", p.c_str());
    return socl::kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return socl::kExitValidation;
  }
}

int cmd_plotdata(const std::string& sweep_csv, const std::string& output_dir) {
  try {
    const auto files = socl::emit_plot_data(sweep_csv, output_dir);
    for (const auto& f : files) std::printf("%s\n", f.c_str());
    return socl::kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return socl::kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic optimal control experiments"};
  app.require_subcommand(1);

  std::string config_path, sweep_csv;
  std::string output_dir;
  int seed = -1, jobs = -1;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--seed", seed, "override the noise seed");
  run->add_option("--output-dir", output_dir, "override the output directory");
  run->add_option("--jobs", jobs, "worker threads for sweep cells");

  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config_path, "config file")->required();

  auto* plotdata = app.add_subcommand("plotdata", "emit per-series plot CSVs from a sweep");
  plotdata->add_option("sweep", sweep_csv, "sweep.csv produced by run")->required();
  plotdata->add_option("--output-dir", output_dir, "destination directory")->default_val(".");

  auto* list = app.add_subcommand("list-models", "print the model registry");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, seed, output_dir, jobs);
  if (validate->parsed()) return cmd_validate(config_path);
  if (plotdata->parsed()) return cmd_plotdata(sweep_csv, output_dir);
  if (list->parsed()) {
    for (const auto& name : socl::model_registry_names()) std::printf("%s\n", name.c_str());
    return socl::kExitOk;
  }
  return socl::kExitOk;
}
