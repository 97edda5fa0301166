#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "socl/experiment.hpp"

using namespace socl;
namespace fs = std::filesystem;

namespace {

std::string tiny_config(const std::string& out_dir) {
  std::ostringstream cfg;
  cfg << "[model]\nname = system1\ndt = 0.02\n"
      << "[cost]\nQ = 1.0\nR = 1.0\nQT = 50.0\ntarget = 4.8\n"
      << "[problem]\nx0 = 1.0\nT = 10\n"
      << "[noise]\nbase_sigma = u_avg\nseed = 7\n"
      << "[sweep]\neps_list = 0.0, 0.2\nn_runs = 3\n"
      << "[controller.ol]\nkind = open_loop\n"
      << "[controller.tpfc]\nkind = tpfc\n"
      << "[output]\ndir = " << out_dir << "\njobs = 1\n";
  return cfg.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing: values, lists and model params") {
  const ExperimentConfig cfg = parse_config_text(tiny_config("x"), "test");
  CHECK(cfg.model_name == "system1");
  CHECK(cfg.dt == 0.02);
  CHECK(cfg.T == 10);
  CHECK(cfg.eps_list == std::vector<double>{0.0, 0.2});
  REQUIRE(cfg.controllers.size() == 2);
  CHECK(cfg.controllers[0].name() == "ol");
  CHECK(cfg.controllers[1].kind == ControllerKind::kTpfc);
  CHECK(validate_config(cfg).empty());

  const ExperimentConfig car = parse_config_text(
      "[model]\nname = car_like\ndt = 0.01\nwheelbase = 0.3\n"
      "[cost]\nQ = 1\nR = 1\nQT = 1\ntarget = 0\n"
      "[problem]\nx0 = 0\nT = 5\n[sweep]\neps_list = 0.1\nn_runs = 1\n"
      "[controller.m]\nkind = shrinking_mpc\n",
      "test");
  CHECK(car.model_params.at("wheelbase") == 0.3);
  CHECK(validate_config(car).empty());
}

TEST_CASE("config syntax errors carry line numbers; unknown keys are rejected") {
  try {
    parse_config_text("[model]\nname = system1\nbogus_line_without_equals\n", "cfg");
    FAIL("expected ContractError");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("cfg:3") != std::string::npos);
  }
  try {
    parse_config_text("[sweep]\neps_list = 0.1\nn_rnus = 5\n", "cfg");
    FAIL("expected ContractError");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("sweep.n_rnus") != std::string::npos);
  }
}

TEST_CASE("validation: empty controllers, grid iff rule, dimension mismatches") {
  ExperimentConfig cfg = parse_config_text(tiny_config("x"), "test");
  cfg.controllers.clear();
  auto problems = validate_config(cfg);
  REQUIRE(!problems.empty());
  CHECK(problems[0].find("controllers") != std::string::npos);

  // Grid present but unused.
  ExperimentConfig with_grid = parse_config_text(tiny_config("x"), "test");
  with_grid.grid = GridSpec{0.0, 5.0, 50};
  problems = validate_config(with_grid);
  bool found = false;
  for (const auto& p : problems) found = found || p.find("grid") != std::string::npos;
  CHECK(found);

  // DP controller without a grid.
  ExperimentConfig no_grid = parse_config_text(tiny_config("x"), "test");
  ControllerSpec dp;
  dp.kind = ControllerKind::kGridDpPolicy;
  dp.label = "dp";
  no_grid.controllers.push_back(dp);
  problems = validate_config(no_grid);
  found = false;
  for (const auto& p : problems) found = found || p.find("grid: required") != std::string::npos;
  CHECK(found);

  // Dimension mismatch reported with its field path.
  ExperimentConfig bad_dim = parse_config_text(tiny_config("x"), "test");
  bad_dim.x0 = {1.0, 2.0, 3.0};
  problems = validate_config(bad_dim);
  found = false;
  for (const auto& p : problems) found = found || p.find("problem.x0") != std::string::npos;
  CHECK(found);
}

TEST_CASE("run_experiment writes the artifact set and is byte-deterministic") {
  const fs::path dir1 = fs::temp_directory_path() / "socl_exp_a";
  const fs::path dir2 = fs::temp_directory_path() / "socl_exp_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  ExperimentConfig cfg = parse_config_text(tiny_config(dir1.string()), "test");
  const ExperimentResult r1 = run_experiment(cfg);
  CHECK(r1.exit_code == kExitOk);
  for (const char* name : {"sweep.csv", "costs.csv", "replan.csv", "diagnostics.json",
                           "manifest.json"}) {
    CHECK(fs::exists(dir1 / name));
  }

  cfg.output_dir = dir2.string();
  const ExperimentResult r2 = run_experiment(cfg);
  CHECK(slurp(dir1 / "sweep.csv") == slurp(dir2 / "sweep.csv"));
  CHECK(slurp(dir1 / "costs.csv") == slurp(dir2 / "costs.csv"));

  // eps = 0 rows have zero spread; mean equals the per-run costs.
  const std::string sweep = slurp(dir1 / "sweep.csv");
  CHECK(sweep.find("ol,0,3,") != std::string::npos);

  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("emit_plot_data: bands, single rows and parse errors") {
  const fs::path dir = fs::temp_directory_path() / "socl_plotdata";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "sweep.csv");
    out << "controller,epsilon,n_runs,mean_cost,std_cost,stderr,degraded,replan_mean,replan_std\n";
    out << "mpc,0,5,2.5,0,0,0,,\n";
    out << "mpc,0.2,5,3.5,0.5,0.22,0,,\n";
  }
  const auto files = emit_plot_data((dir / "sweep.csv").string(), dir.string());
  REQUIRE(files.size() == 1);
  const std::string plot = slurp(files[0]);
  CHECK(plot.find("series,epsilon,mean,band_lo,band_hi") == 0);
  CHECK(plot.find("mpc,0,2.5,2.5,2.5") != std::string::npos);  // zero band at eps = 0
  CHECK(plot.find(",3.5,3,4") != std::string::npos);           // mean -/+ std

  {
    std::ofstream out(dir / "bad.csv");
    out << "controller,epsilon,n_runs,mean_cost,std_cost,stderr,degraded,replan_mean,replan_std\n";
    out << "mpc,not_a_number,5,2.5,0,0,0,,\n";
  }
  try {
    emit_plot_data((dir / "bad.csv").string(), dir.string());
    FAIL("expected ContractError");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("bundled configs parse and validate") {
  for (const char* name :
       {"system1_fig3.cfg", "system2_fig3.cfg", "car_fig4.cfg", "cartpole_fig5.cfg",
        "system1_diagnostics.cfg"}) {
    const fs::path path = fs::path(SOCL_CONFIG_DIR) / name;
    INFO(name);
    REQUIRE(fs::exists(path));
    const ExperimentConfig cfg = load_config(path.string());
    const auto problems = validate_config(cfg);
    for (const auto& p : problems) INFO(p);
    CHECK(problems.empty());
  }
}
