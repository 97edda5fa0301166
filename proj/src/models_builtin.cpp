#include "socl/models_builtin.hpp"

#include <cmath>

namespace socl {

namespace {

std::vector<Matrix> zero_hessians(int n) {
  return std::vector<Matrix>(n, Matrix::Zero(n, n));
}

std::vector<std::vector<Matrix>> zero_input_hessians(int n, int p) {
  return std::vector<std::vector<Matrix>>(p, zero_hessians(n));
}

ControlAffineModel make_scalar(double dt, std::function<double(double)> f,
                               std::function<double(double)> fx,
                               std::function<double(double)> fxx) {
  ControlAffineModel model(
      1, 1, dt,
      [f](const Vector& x) -> Vector { return Vector::Constant(1, f(x[0])); },
      [](const Vector&) -> Matrix { return Matrix::Constant(1, 1, 1.0); },
      DerivativeMode::kAnalytic);
  model
      .with_drift_jacobian(
          [fx](const Vector& x) -> Matrix { return Matrix::Constant(1, 1, fx(x[0])); })
      .with_input_jacobians(
          [](const Vector&) { return std::vector<Matrix>{Matrix::Zero(1, 1)}; })
      .with_drift_hessians([fxx](const Vector& x) {
        return std::vector<Matrix>{Matrix::Constant(1, 1, fxx(x[0]))};
      })
      .with_input_hessians([](const Vector&) { return zero_input_hessians(1, 1); });
  return model;
}

}  // namespace

ControlAffineModel make_system1(double dt) {
  return make_scalar(
      dt, [](double x) { return -std::cos(x); }, [](double x) { return std::sin(x); },
      [](double x) { return std::cos(x); });
}

ControlAffineModel make_system2(double dt) {
  return make_scalar(
      dt, [](double x) { return -x - 2.0 * x * x - 0.5 * x * x * x; },
      [](double x) { return -1.0 - 4.0 * x - 1.5 * x * x; },
      [](double x) { return -4.0 - 3.0 * x; });
}

ControlAffineModel make_car_like(double dt, double wheelbase) {
  require(wheelbase > 0.0, "make_car_like: wheelbase must be positive");
  const double L = wheelbase;
  // State (x, y, theta, phi); controls (v, omega). Drift is zero; all motion
  // enters through the state-dependent input matrix.
  auto input = [L](const Vector& x) -> Matrix {
    const double th = x[2], ph = x[3];
    Matrix G = Matrix::Zero(4, 2);
    G(0, 0) = std::cos(th);
    G(1, 0) = std::sin(th);
    G(2, 0) = std::tan(ph) / L;
    G(3, 1) = 1.0;
    return G;
  };
  ControlAffineModel model(
      4, 2, dt, [](const Vector&) -> Vector { return Vector::Zero(4); }, input,
      DerivativeMode::kAnalytic);
  model
      .with_drift_jacobian([](const Vector&) -> Matrix { return Matrix::Zero(4, 4); })
      .with_input_jacobians([L](const Vector& x) {
        const double th = x[2], ph = x[3];
        const double sec2 = 1.0 / (std::cos(ph) * std::cos(ph));
        Matrix J1 = Matrix::Zero(4, 4);  // Jacobian of Gamma^1 = (cos th, sin th, tan ph / L, 0)
        J1(0, 2) = -std::sin(th);
        J1(1, 2) = std::cos(th);
        J1(2, 3) = sec2 / L;
        return std::vector<Matrix>{J1, Matrix::Zero(4, 4)};
      })
      .with_drift_hessians([](const Vector&) { return zero_hessians(4); })
      .with_input_hessians([L](const Vector& x) {
        const double th = x[2], ph = x[3];
        const double sec2 = 1.0 / (std::cos(ph) * std::cos(ph));
        auto out = zero_input_hessians(4, 2);
        out[0][0](2, 2) = -std::cos(th);                    // d2(cos th)/dth2
        out[0][1](2, 2) = -std::sin(th);                    // d2(sin th)/dth2
        out[0][2](3, 3) = 2.0 * sec2 * std::tan(ph) / L;    // d2(tan ph / L)/dph2
        return out;
      });
  return model;
}

ControlAffineModel make_cart_pole(double dt, const CartPoleParams& params) {
  require(params.cart_mass > 0.0 && params.pole_mass > 0.0 && params.pole_length > 0.0,
          "make_cart_pole: masses and length must be positive");
  const double mc = params.cart_mass, mp = params.pole_mass;
  const double l = params.pole_length, g = params.gravity;
  // State (z, zdot, theta, thetadot), theta = 0 hanging down; control is the
  // horizontal force on the cart.
  auto accel_denominator = [mc, mp](double th) {
    const double s = std::sin(th);
    return mc + mp * s * s;
  };
  auto drift = [mc, mp, l, g, accel_denominator](const Vector& x) -> Vector {
    const double th = x[2], thd = x[3];
    const double s = std::sin(th), c = std::cos(th);
    const double den = accel_denominator(th);
    const double zdd = mp * s * (g * c + l * thd * thd) / den;
    const double thdd = -(zdd * c + g * s) / l;
    Vector dx(4);
    dx << x[1], zdd, thd, thdd;
    return dx;
  };
  auto input = [l, accel_denominator](const Vector& x) -> Matrix {
    const double th = x[2];
    const double den = accel_denominator(th);
    Matrix G = Matrix::Zero(4, 1);
    G(1, 0) = 1.0 / den;
    G(3, 0) = -std::cos(th) / (l * den);
    return G;
  };
  return ControlAffineModel(4, 1, dt, drift, input, DerivativeMode::kFiniteDifference);
}

ControlAffineModel make_linear(const Matrix& M, const Matrix& G, double dt) {
  require(M.rows() == M.cols(), "make_linear: M must be square");
  require(G.rows() == M.rows(), "make_linear: G row count mismatch");
  const int n = static_cast<int>(M.rows());
  const int p = static_cast<int>(G.cols());
  ControlAffineModel model(
      n, p, dt, [M](const Vector& x) -> Vector { return M * x; },
      [G](const Vector&) -> Matrix { return G; }, DerivativeMode::kAnalytic);
  model.with_drift_jacobian([M](const Vector&) -> Matrix { return M; })
      .with_input_jacobians([n, p](const Vector&) {
        return std::vector<Matrix>(p, Matrix::Zero(n, n));
      })
      .with_drift_hessians([n](const Vector&) { return zero_hessians(n); })
      .with_input_hessians([n, p](const Vector&) { return zero_input_hessians(n, p); });
  return model;
}

ControlAffineModel make_linear4(double dt) {
  Matrix M(4, 4);
  M << -0.6,  0.3,  0.0,  0.1,
       -0.3, -0.4,  0.2,  0.0,
        0.0,  0.1, -0.5,  0.4,
        0.1,  0.0, -0.4, -0.7;
  Matrix G(4, 2);
  G << 1.0, 0.0,
       0.0, 1.0,
       0.5, 0.0,
       0.0, 0.5;
  return make_linear(M, G, dt);
}

ControlAffineModel make_model(const std::string& name,
                              const std::map<std::string, double>& params, double dt) {
  auto get = [&params](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto check_keys = [&params, &name](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
      bool ok = false;
      for (const char* a : allowed) {
        if (key == a) { ok = true; break; }
      }
      require(ok, "make_model: unknown parameter '" + key + "' for model '" + name + "'");
    }
  };
  if (name == "system1") {
    check_keys({});
    return make_system1(dt);
  }
  if (name == "system2") {
    check_keys({});
    return make_system2(dt);
  }
  if (name == "car_like") {
    check_keys({"wheelbase"});
    return make_car_like(dt, get("wheelbase", 0.25));
  }
  if (name == "cart_pole") {
    check_keys({"cart_mass", "pole_mass", "pole_length", "gravity"});
    CartPoleParams cp;
    cp.cart_mass = get("cart_mass", cp.cart_mass);
    cp.pole_mass = get("pole_mass", cp.pole_mass);
    cp.pole_length = get("pole_length", cp.pole_length);
    cp.gravity = get("gravity", cp.gravity);
    return make_cart_pole(dt, cp);
  }
  if (name == "linear4") {
    check_keys({});
    return make_linear4(dt);
  }
  throw ContractError("make_model: unknown model '" + name + "'");
}

std::vector<std::string> model_registry_names() {
  return {"system1", "system2", "car_like", "cart_pole", "linear4"};
}

}  // namespace socl
