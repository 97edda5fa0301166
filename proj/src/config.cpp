#include "socl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "socl/models_builtin.hpp"

namespace socl {

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
  bool consumed = false;
};

// section -> key -> entry; section order preserved separately for controllers.
struct RawConfig {
  std::map<std::string, std::map<std::string, RawEntry>> sections;
  std::vector<std::string> section_order;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

RawConfig tokenize(const std::string& text, const std::string& origin,
                   std::vector<std::string>& errors) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(origin + ":" + std::to_string(lineno) + ": unterminated section");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!raw.sections.count(section)) raw.section_order.push_back(section);
      raw.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(origin + ":" + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      errors.push_back(origin + ":" + std::to_string(lineno) + ": key outside any section");
      continue;
    }
    raw.sections[section][key] = RawEntry{value, lineno, false};
  }
  return raw;
}

class Reader {
 public:
  Reader(RawConfig& raw, std::vector<std::string>& errors) : raw_(raw), errors_(errors) {}

  bool has_section(const std::string& s) const { return raw_.sections.count(s) > 0; }

  std::optional<std::string> take(const std::string& section, const std::string& key) {
    auto sit = raw_.sections.find(section);
    if (sit == raw_.sections.end()) return std::nullopt;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return std::nullopt;
    kit->second.consumed = true;
    return kit->second.value;
  }

  double take_double(const std::string& section, const std::string& key, double fallback) {
    const auto v = take(section, key);
    if (!v) return fallback;
    return parse_double(section + "." + key, *v).value_or(fallback);
  }

  int take_int(const std::string& section, const std::string& key, int fallback) {
    const auto v = take(section, key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const int parsed = std::stoi(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
      return parsed;
    } catch (const std::exception&) {
      errors_.push_back(section + "." + key + ": expected an integer, got '" + *v + "'");
      return fallback;
    }
  }

  std::vector<double> take_list(const std::string& section, const std::string& key,
                                std::vector<double> fallback) {
    const auto v = take(section, key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto parsed = parse_double(section + "." + key, trim(item));
      if (!parsed) return fallback;
      out.push_back(*parsed);
    }
    if (out.empty()) {
      errors_.push_back(section + "." + key + ": empty list");
      return fallback;
    }
    return out;
  }

  std::optional<double> parse_double(const std::string& path, const std::string& text) {
    try {
      std::size_t used = 0;
      const double parsed = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return parsed;
    } catch (const std::exception&) {
      errors_.push_back(path + ": expected a number, got '" + text + "'");
      return std::nullopt;
    }
  }

  void report_unconsumed() {
    for (const auto& [section, keys] : raw_.sections) {
      for (const auto& [key, entry] : keys) {
        if (!entry.consumed) {
          errors_.push_back(section + "." + key + ": unknown key (line " +
                            std::to_string(entry.line) + ")");
        }
      }
    }
  }

 private:
  RawConfig& raw_;
  std::vector<std::string>& errors_;
};

void parse_controller(Reader& reader, const std::string& section, const std::string& label,
                      ExperimentConfig& config, std::vector<std::string>& errors) {
  ControllerSpec spec;
  spec.label = label;
  const auto kind = reader.take(section, "kind");
  if (!kind) {
    errors.push_back(section + ".kind: required");
    return;
  }
  try {
    spec.kind = controller_kind_from_string(*kind);
  } catch (const ContractError& e) {
    errors.push_back(section + ".kind: " + e.what());
    return;
  }
  spec.fixed_horizon = reader.take_int(section, "fixed_horizon", spec.fixed_horizon);
  spec.replan_threshold =
      reader.take_double(section, "replan_threshold", spec.replan_threshold);
  if (const auto v = reader.take(section, "dp_epsilon")) {
    if (*v == "match") {
      spec.dp_table_epsilon = -1.0;
    } else {
      spec.dp_table_epsilon = reader.parse_double(section + ".dp_epsilon", *v).value_or(-1.0);
    }
  }
  spec.solver.max_iterations =
      reader.take_int(section, "max_iterations", spec.solver.max_iterations);
  spec.solver.cost_tolerance =
      reader.take_double(section, "cost_tolerance", spec.solver.cost_tolerance);
  spec.solver.gradient_tolerance =
      reader.take_double(section, "gradient_tolerance", spec.solver.gradient_tolerance);
  config.controllers.push_back(std::move(spec));
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  std::vector<std::string> errors;
  RawConfig raw = tokenize(text, origin, errors);
  Reader reader(raw, errors);
  ExperimentConfig config;

  if (const auto v = reader.take("model", "name")) config.model_name = *v;
  config.dt = reader.take_double("model", "dt", config.dt);
  if (raw.sections.count("model")) {
    // Remaining [model] keys are model parameters.
    for (auto& [key, entry] : raw.sections["model"]) {
      if (entry.consumed) continue;
      entry.consumed = true;
      const auto parsed = reader.parse_double("model." + key, entry.value);
      if (parsed) config.model_params[key] = *parsed;
    }
  }

  config.q_diag = reader.take_list("cost", "Q", config.q_diag);
  config.r_diag = reader.take_list("cost", "R", config.r_diag);
  config.qt_diag = reader.take_list("cost", "QT", config.qt_diag);
  config.target = reader.take_list("cost", "target", config.target);

  config.x0 = reader.take_list("problem", "x0", config.x0);
  config.T = reader.take_int("problem", "T", config.T);

  if (const auto v = reader.take("noise", "base_sigma")) {
    if (*v == "u_avg") {
      config.sigma_is_u_avg = true;
    } else {
      config.sigma_is_u_avg = false;
      std::stringstream ss(*v);
      std::string item;
      config.fixed_sigma.clear();
      while (std::getline(ss, item, ',')) {
        const auto parsed = reader.parse_double("noise.base_sigma", trim(item));
        if (parsed) config.fixed_sigma.push_back(*parsed);
      }
    }
  }
  config.seed = static_cast<std::uint64_t>(reader.take_int("noise", "seed", 0));

  if (reader.has_section("grid")) {
    GridSpec grid;
    grid.lo = reader.take_double("grid", "lo", 0.0);
    grid.hi = reader.take_double("grid", "hi", 1.0);
    grid.n_points = reader.take_int("grid", "n_points", 2);
    config.grid = grid;
    config.boundary_penalty = reader.take_double("grid", "boundary_penalty", 0.0);
  }

  if (const auto v = reader.take("expectation", "mode")) {
    if (*v == "monte_carlo") {
      config.expectation.mode = ExpectationMode::kMonteCarlo;
    } else if (*v == "quadrature") {
      config.expectation.mode = ExpectationMode::kQuadrature;
    } else {
      errors.push_back("expectation.mode: expected monte_carlo or quadrature, got '" + *v + "'");
    }
  }
  config.expectation.n = reader.take_int("expectation", "n", config.expectation.n);

  config.eps_list = reader.take_list("sweep", "eps_list", config.eps_list);
  config.n_runs = reader.take_int("sweep", "n_runs", config.n_runs);

  for (const std::string& section : raw.section_order) {
    const std::string prefix = "controller.";
    if (section.rfind(prefix, 0) == 0) {
      parse_controller(reader, section, section.substr(prefix.size()), config, errors);
    }
  }

  config.checks.lemma1_eps = reader.take_list("checks", "lemma1_eps", {});
  config.checks.lemma1_runs = reader.take_int("checks", "lemma1_runs", 200);
  if (const auto v = reader.take("checks", "lemma1_slope_min")) {
    config.checks.lemma1_slope_min = reader.parse_double("checks.lemma1_slope_min", *v);
  }
  if (const auto v = reader.take("checks", "lemma1_slope_max")) {
    config.checks.lemma1_slope_max = reader.parse_double("checks.lemma1_slope_max", *v);
  }
  if (const auto v = reader.take("checks", "expansion_controller")) {
    config.checks.expansion_controller = *v;
  }
  config.checks.expansion_cubic_column =
      reader.take_int("checks", "expansion_cubic_column", 0) != 0;
  config.checks.closeness_eps = reader.take_list("checks", "closeness_eps", {});
  config.checks.closeness_nodes = reader.take_int("checks", "closeness_nodes", 7);
  if (const auto v = reader.take("checks", "closeness_slope_min")) {
    config.checks.closeness_slope_min = reader.parse_double("checks.closeness_slope_min", *v);
  }

  if (const auto v = reader.take("output", "dir")) config.output_dir = *v;
  config.jobs = reader.take_int("output", "jobs", config.jobs);

  reader.report_unconsumed();
  if (!errors.empty()) {
    std::string joined = "config errors in " + origin + ":";
    for (const auto& e : errors) joined += "\n  " + e;
    throw ContractError(joined);
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ContractError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::vector<std::string> validate_config(const ExperimentConfig& config) {
  std::vector<std::string> errors;

  std::optional<ControlAffineModel> model;
  if (config.model_name.empty()) {
    errors.push_back("model.name: required");
  } else {
    try {
      model.emplace(make_model(config.model_name, config.model_params, config.dt));
    } catch (const std::exception& e) {
      errors.push_back(std::string("model: ") + e.what());
    }
  }
  if (config.dt <= 0) errors.push_back("model.dt: must be positive");
  if (config.T < 1) errors.push_back("problem.T: must be >= 1");
  if (config.n_runs < 1) errors.push_back("sweep.n_runs: must be >= 1");
  if (config.eps_list.empty()) errors.push_back("sweep.eps_list: must be nonempty");
  for (std::size_t i = 0; i + 1 < config.eps_list.size(); ++i) {
    if (config.eps_list[i] >= config.eps_list[i + 1]) {
      errors.push_back("sweep.eps_list: must be strictly ascending");
      break;
    }
  }
  for (double e : config.eps_list) {
    if (e < 0) errors.push_back("sweep.eps_list: epsilons must be nonnegative");
  }

  auto check_dim = [&](const std::vector<double>& v, int dim, const std::string& path) {
    if (static_cast<int>(v.size()) != 1 && static_cast<int>(v.size()) != dim) {
      errors.push_back(path + ": expected 1 or " + std::to_string(dim) + " entries, got " +
                       std::to_string(v.size()));
    }
  };
  if (model) {
    const int n = model->state_dim(), p = model->control_dim();
    check_dim(config.q_diag, n, "cost.Q");
    check_dim(config.qt_diag, n, "cost.QT");
    check_dim(config.target, n, "cost.target");
    check_dim(config.r_diag, p, "cost.R");
    check_dim(config.x0, n, "problem.x0");
    if (!config.sigma_is_u_avg) check_dim(config.fixed_sigma, n, "noise.base_sigma");
  }
  for (double r : config.r_diag) {
    if (r <= 0) errors.push_back("cost.R: diagonal entries must be positive");
  }

  if (config.controllers.empty()) errors.push_back("controllers: at least one [controller.<label>] section is required");
  bool needs_grid = !config.checks.closeness_eps.empty();
  for (const auto& spec : config.controllers) {
    const std::string path = "controller." + spec.name();
    if (spec.kind == ControllerKind::kFixedMpc && spec.fixed_horizon < 1) {
      errors.push_back(path + ".fixed_horizon: must be >= 1");
    }
    if (spec.kind == ControllerKind::kTpfc2 && spec.replan_threshold <= 0) {
      errors.push_back(path + ".replan_threshold: must be positive");
    }
    if (spec.kind == ControllerKind::kGridDpPolicy) {
      needs_grid = true;
      if (model && model->state_dim() != 1) {
        errors.push_back(path + ": grid_dp_policy requires a 1-D model");
      }
    }
  }
  std::map<std::string, int> label_counts;
  for (const auto& spec : config.controllers) ++label_counts[spec.name()];
  for (const auto& [label, count] : label_counts) {
    if (count > 1) errors.push_back("controller." + label + ": duplicate label");
  }

  if (needs_grid && !config.grid) {
    errors.push_back("grid: required by a grid_dp_policy controller or closeness check");
  }
  if (!needs_grid && config.grid) {
    errors.push_back("grid: present but no controller or check uses it");
  }
  if (config.grid) {
    if (config.grid->lo >= config.grid->hi) errors.push_back("grid.lo: must be < grid.hi");
    if (config.grid->n_points < 2) errors.push_back("grid.n_points: must be >= 2");
    if (model && model->state_dim() != 1) {
      errors.push_back("grid: only 1-D models can use a grid");
    }
  }
  if (!config.checks.closeness_eps.empty()) {
    if (config.checks.closeness_eps.size() < 3) {
      errors.push_back("checks.closeness_eps: need at least 3 values");
    }
    for (double e : config.checks.closeness_eps) {
      if (e <= 0) errors.push_back("checks.closeness_eps: values must be positive");
    }
  }
  if (!config.checks.lemma1_eps.empty()) {
    if (config.checks.lemma1_eps.size() < 3) {
      errors.push_back("checks.lemma1_eps: need at least 3 values");
    }
    if (config.checks.lemma1_runs < 1) errors.push_back("checks.lemma1_runs: must be >= 1");
  }
  if (!config.checks.expansion_controller.empty()) {
    bool found = false;
    for (const auto& spec : config.controllers) {
      if (spec.name() == config.checks.expansion_controller) found = true;
    }
    if (!found) {
      errors.push_back("checks.expansion_controller: no controller labelled '" +
                       config.checks.expansion_controller + "'");
    }
    if (config.eps_list.size() < 4) {
      errors.push_back("checks.expansion_controller: sweep needs >= 4 epsilon values to fit");
    }
  }
  if (config.expectation.n < 1) errors.push_back("expectation.n: must be >= 1");
  if (config.jobs < 1) errors.push_back("output.jobs: must be >= 1");
  return errors;
}

}  // namespace socl
