#pragma once

#include <map>
#include <string>
#include <vector>

#include "socl/model.hpp"

namespace socl {

/// System 1 of the 1-D benchmarks: xdot = -cos(x) + u. Analytic derivatives.
ControlAffineModel make_system1(double dt);

/// System 2: xdot = -x - 2x^2 - 0.5x^3 + u. Analytic derivatives.
ControlAffineModel make_system2(double dt);

/// Kinematic car: state (x, y, heading, steering angle), controls
/// (forward speed, steering rate). State-dependent input matrix; analytic
/// derivatives throughout.
ControlAffineModel make_car_like(double dt, double wheelbase = 0.25);

/// Cart-pole with a force input on the cart; pole angle measured from the
/// hanging position. Finite-difference derivatives.
struct CartPoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_length = 0.5;
  double gravity = 9.81;
};
ControlAffineModel make_cart_pole(double dt, const CartPoleParams& params = {});

/// Continuous-time linear model xdot = M x + G u. Analytic derivatives,
/// all second-order tensors zero.
ControlAffineModel make_linear(const Matrix& M, const Matrix& G, double dt);

/// Fixed stable 4-state, 2-input linear model used by oracle tests.
ControlAffineModel make_linear4(double dt);

/// Construct a registered model by name. Recognized parameter keys:
/// car_like: "wheelbase"; cart_pole: "cart_mass", "pole_mass",
/// "pole_length", "gravity". Unknown names or keys raise ContractError.
ControlAffineModel make_model(const std::string& name,
                              const std::map<std::string, double>& params, double dt);

std::vector<std::string> model_registry_names();

}  // namespace socl
