#include "socl/grid_dp.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "socl/quadrature.hpp"
#include "socl/rng.hpp"

namespace socl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double interp_row(const GridSpec& grid, const Eigen::RowVectorXd& row, double x,
                  double boundary_penalty, bool nearest) {
  if (x <= grid.lo) return row[0] + (x < grid.lo ? boundary_penalty : 0.0);
  if (x >= grid.hi) return row[grid.n_points - 1] + (x > grid.hi ? boundary_penalty : 0.0);
  const double pos = (x - grid.lo) / grid.spacing();
  const int j = std::min(static_cast<int>(pos), grid.n_points - 2);
  const double frac = pos - j;
  if (nearest) return frac < 0.5 ? row[j] : row[j + 1];
  return (1.0 - frac) * row[j] + frac * row[j + 1];
}

void require_1d(const ControlAffineModel& model, const char* who) {
  require(model.state_dim() == 1 && model.control_dim() == 1,
          std::string(who) + ": grid DP supports 1-D models only");
}

// Standard-normal samples for cell (t, j); identical keys give identical
// samples, which also makes candidate transitions share noise.
std::vector<double> cell_samples(int n, std::uint64_t seed, std::uint64_t t_key,
                                 std::uint64_t j_key) {
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) {
    z[i] = rng::normal(seed, rng::kDpExpectation, t_key, j_key, static_cast<std::uint64_t>(i));
  }
  return z;
}

struct ExpectationEngine {
  const GridSpec& grid;
  const GridDpOptions& options;
  GaussHermite rule;  // populated in quadrature mode

  explicit ExpectationEngine(const GridSpec& g, const GridDpOptions& opt)
      : grid(g), options(opt) {
    if (opt.expectation.mode == ExpectationMode::kQuadrature) {
      rule = gauss_hermite(opt.expectation.n);
    }
    require(opt.expectation.n >= 1, "ExpectationSpec: need at least one sample/node");
  }

  // E[J_next(mean + scale * Z)], Z ~ N(0,1); `z` carries the Monte Carlo
  // samples (unused in quadrature mode).
  double eval(const Eigen::RowVectorXd& J_next, double mean, double scale,
              const std::vector<double>& z) const {
    if (scale == 0.0) {
      return interp_row(grid, J_next, mean, options.boundary_penalty,
                        options.nearest_neighbor);
    }
    if (options.expectation.mode == ExpectationMode::kQuadrature) {
      return normal_expectation(rule, [&](double zz) {
        return interp_row(grid, J_next, mean + scale * zz, options.boundary_penalty,
                          options.nearest_neighbor);
      });
    }
    double acc = 0.0;
    for (double zz : z) {
      acc += interp_row(grid, J_next, mean + scale * zz, options.boundary_penalty,
                        options.nearest_neighbor);
    }
    return acc / static_cast<double>(z.size());
  }
};

}  // namespace

double GridValueFunction::value_at(int t, double x) const {
  require(t >= 0 && t < static_cast<int>(values.rows()), "value_at: t out of range");
  return interp_row(grid, values.row(t), x, 0.0, false);
}

double GridValueFunction::control_at(int t, double x) const {
  require(t >= 0 && t < static_cast<int>(controls.rows()), "control_at: t out of range");
  return interp_row(grid, controls.row(t), x, 0.0, false);
}

double invert_control_1d(const ControlAffineModel& model, double x, double x_next) {
  require_1d(model, "invert_control_1d");
  const Vector xv = Vector::Constant(1, x);
  const double g = model.input_matrix(xv)(0, 0);
  if (std::fabs(g) <= 1e-12) {
    throw SolverError("invert_control_1d: singular input gain at x = " + std::to_string(x));
  }
  const double f = model.drift(xv)[0];
  return ((x_next - x) / model.dt() - f) / g;
}

double expected_next_value(const GridSpec& grid, const Eigen::RowVectorXd& J_next,
                           const ControlAffineModel& model, double x, double u,
                           double epsilon, double base_sigma,
                           const GridDpOptions& options, std::uint64_t seed,
                           std::uint64_t t_key, std::uint64_t j_key) {
  require_1d(model, "expected_next_value");
  grid.validate();
  require(J_next.size() == grid.n_points, "expected_next_value: row size mismatch");
  const ExpectationEngine engine(grid, options);
  const Vector xv = Vector::Constant(1, x);
  const double mean = x + (model.drift(xv)[0] + model.input_matrix(xv)(0, 0) * u) * model.dt();
  const double scale = epsilon * base_sigma * std::sqrt(model.dt());
  std::vector<double> z;
  if (scale != 0.0 && options.expectation.mode == ExpectationMode::kMonteCarlo) {
    z = cell_samples(options.expectation.n, seed, t_key, j_key);
  }
  return engine.eval(J_next, mean, scale, z);
}

GridValueFunction solve_grid_dp(const ControlAffineModel& model, const CostModel& cost,
                                const GridSpec& grid, int T, double epsilon,
                                double base_sigma, const GridDpOptions& options,
                                std::uint64_t seed) {
  require_1d(model, "solve_grid_dp");
  grid.validate();
  require(T >= 0, "solve_grid_dp: horizon must be nonnegative");
  require(epsilon >= 0.0 && base_sigma >= 0.0,
          "solve_grid_dp: epsilon and sigma must be nonnegative");

  const int n = grid.n_points;
  const double dt = model.dt();
  const double R = cost.stage.control_penalty()(0, 0);
  const ExpectationEngine engine(grid, options);
  const double scale = epsilon * base_sigma * std::sqrt(dt);
  const bool sampling = scale != 0.0 && options.expectation.mode == ExpectationMode::kMonteCarlo;

  GridValueFunction table;
  table.grid = grid;
  table.epsilon = epsilon;
  table.expectation_n = options.expectation.n;
  table.values.resize(T + 1, n);
  table.controls = Matrix::Zero(std::max(T, 0), n);

  for (int j = 0; j < n; ++j) {
    table.values(T, j) = cost.terminal.value(Vector::Constant(1, grid.point(j)));
  }

  std::vector<double> u_cand(n), val(n);
  const std::vector<double> no_samples;
  for (int t = T - 1; t >= 0; --t) {
    const Eigen::RowVectorXd J_next = table.values.row(t + 1);
    for (int j = 0; j < n; ++j) {
      const double x = grid.point(j);
      const Vector xv = Vector::Constant(1, x);
      const double g = model.input_matrix(xv)(0, 0);
      const double f = model.drift(xv)[0];
      const double l_x = cost.stage.state_cost(xv);
      if (std::fabs(g) <= 1e-12) {
        table.values(t, j) = kInf;
        table.controls(t, j) = 0.0;
        ++table.infeasible_entries;
        continue;
      }
      const std::vector<double> z = sampling
          ? cell_samples(options.expectation.n, seed, static_cast<std::uint64_t>(t),
                         static_cast<std::uint64_t>(j))
          : no_samples;

      auto value_of = [&](double u) {
        const double mean = x + (f + g * u) * dt;
        return (l_x + 0.5 * R * u * u) * dt + engine.eval(J_next, mean, scale, z);
      };

      int best = -1;
      for (int k = 0; k < n; ++k) {
        u_cand[k] = ((grid.point(k) - x) / dt - f) / g;
        val[k] = value_of(u_cand[k]);
        if (best < 0 || val[k] < val[best] ||
            (val[k] == val[best] && std::fabs(u_cand[k]) < std::fabs(u_cand[best]))) {
          best = k;
        }
      }
      double best_u = u_cand[best];
      double best_val = val[best];

      if (options.refine == ArgminRefine::kParabolic && best > 0 && best < n - 1 &&
          std::isfinite(val[best - 1]) && std::isfinite(val[best + 1])) {
        const double du = u_cand[best + 1] - u_cand[best];
        const double d1 = (val[best + 1] - val[best - 1]) / (2.0 * du);
        const double d2 = (val[best + 1] - 2.0 * val[best] + val[best - 1]) / (du * du);
        if (d2 > 1e-12) {
          const double u_star = u_cand[best] - d1 / d2;
          const double v_star = value_of(u_star);
          if (v_star < best_val) {
            best_u = u_star;
            best_val = v_star;
          }
        }
      }

      table.values(t, j) = best_val;
      table.controls(t, j) = best_u;
      if (!std::isfinite(best_val)) ++table.infeasible_entries;
    }
  }
  return table;
}

GridValueFunction evaluate_policy_on_grid(
    const ControlAffineModel& model, const CostModel& cost, const GridSpec& grid, int T,
    double epsilon, double base_sigma,
    const std::function<double(int, double)>& policy, const GridDpOptions& options,
    std::uint64_t seed) {
  require_1d(model, "evaluate_policy_on_grid");
  grid.validate();
  require(static_cast<bool>(policy), "evaluate_policy_on_grid: policy required");

  const int n = grid.n_points;
  const double dt = model.dt();
  const double R = cost.stage.control_penalty()(0, 0);
  const ExpectationEngine engine(grid, options);
  const double scale = epsilon * base_sigma * std::sqrt(dt);
  const bool sampling = scale != 0.0 && options.expectation.mode == ExpectationMode::kMonteCarlo;

  GridValueFunction table;
  table.grid = grid;
  table.epsilon = epsilon;
  table.expectation_n = options.expectation.n;
  table.values.resize(T + 1, n);
  table.controls = Matrix::Zero(std::max(T, 0), n);
  for (int j = 0; j < n; ++j) {
    table.values(T, j) = cost.terminal.value(Vector::Constant(1, grid.point(j)));
  }

  const std::vector<double> no_samples;
  for (int t = T - 1; t >= 0; --t) {
    const Eigen::RowVectorXd J_next = table.values.row(t + 1);
    for (int j = 0; j < n; ++j) {
      const double x = grid.point(j);
      const Vector xv = Vector::Constant(1, x);
      const double u = policy(t, x);
      const double mean = x + (model.drift(xv)[0] + model.input_matrix(xv)(0, 0) * u) * dt;
      const std::vector<double> z = sampling
          ? cell_samples(options.expectation.n, seed, static_cast<std::uint64_t>(t),
                         static_cast<std::uint64_t>(j))
          : no_samples;
      table.values(t, j) = (cost.stage.state_cost(xv) + 0.5 * R * u * u) * dt +
                           engine.eval(J_next, mean, scale, z);
      table.controls(t, j) = u;
    }
  }
  return table;
}

Controller dp_policy_controller(std::shared_ptr<const GridValueFunction> table) {
  require(table != nullptr, "dp_policy_controller: null table");
  return [table](const Vector& x, int t) -> Vector {
    require(t >= 0 && t < table->horizon(), "dp_policy_controller: t out of range");
    return Vector::Constant(1, table->control_at(t, x[0]));
  };
}

void write_grid_value_csv(const GridValueFunction& table, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "write_grid_value_csv: cannot open " + path);
  out << "t,j,x,J,u\n";
  char buf[128];
  const int T = table.horizon();
  for (int t = 0; t <= T; ++t) {
    for (int j = 0; j < table.grid.n_points; ++j) {
      if (t < T) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", t, j,
                      table.grid.point(j), table.values(t, j), table.controls(t, j));
      } else {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,\n", t, j, table.grid.point(j),
                      table.values(t, j));
      }
      out << buf;
    }
  }
}

GridValueFunction read_grid_value_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_grid_value_csv: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  struct Row { int t, j; double x, J; bool has_u; double u; };
  std::vector<Row> rows;
  int max_t = 0, max_j = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Row r{};
    try {
      std::getline(ss, field, ','); r.t = std::stoi(field);
      std::getline(ss, field, ','); r.j = std::stoi(field);
      std::getline(ss, field, ','); r.x = std::stod(field);
      std::getline(ss, field, ','); r.J = std::stod(field);
      r.has_u = static_cast<bool>(std::getline(ss, field, ',')) && !field.empty();
      if (r.has_u) r.u = std::stod(field);
    } catch (const std::exception&) {
      throw ContractError("read_grid_value_csv: parse error at line " + std::to_string(lineno));
    }
    max_t = std::max(max_t, r.t);
    max_j = std::max(max_j, r.j);
    rows.push_back(r);
  }
  require(!rows.empty(), "read_grid_value_csv: empty table");

  GridValueFunction table;
  table.grid.n_points = max_j + 1;
  double lo = kInf, hi = -kInf;
  for (const Row& r : rows) {
    lo = std::min(lo, r.x);
    hi = std::max(hi, r.x);
  }
  table.grid.lo = lo;
  table.grid.hi = hi;
  table.values.resize(max_t + 1, max_j + 1);
  table.controls = Matrix::Zero(max_t, max_j + 1);
  for (const Row& r : rows) {
    table.values(r.t, r.j) = r.J;
    if (r.has_u && r.t < max_t) table.controls(r.t, r.j) = r.u;
  }
  return table;
}

}  // namespace socl
