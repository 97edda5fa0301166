#include "socl/noise.hpp"

namespace socl {

Vector u_avg_sigma(const ControlAffineModel& model, const Trajectory& nominal) {
  const int T = nominal.horizon();
  require(T >= 1, "u_avg_sigma: nominal trajectory has no controls");
  Vector u_avg = Vector::Zero(model.control_dim());
  for (const Vector& u : nominal.controls) u_avg += u.cwiseAbs();
  u_avg /= static_cast<double>(T);

  Vector sigma = Vector::Zero(model.state_dim());
  for (int t = 0; t < T; ++t) {
    sigma += model.input_matrix(nominal.states[t]).cwiseAbs() * u_avg;
  }
  sigma /= static_cast<double>(T);
  return sigma;
}

DisturbanceModel resolve_noise(const NoiseConfig& config, const ControlAffineModel& model,
                               const Trajectory* nominal) {
  require(config.epsilon >= 0.0, "NoiseConfig: epsilon must be nonnegative");
  if (config.rule == NoiseConfig::SigmaRule::kFixed) {
    require(config.fixed_sigma.size() == model.state_dim(),
            "NoiseConfig: fixed sigma dimension mismatch");
    return DisturbanceModel(config.fixed_sigma, config.seed);
  }
  require(nominal != nullptr, "NoiseConfig: u_avg rule needs a nominal trajectory");
  return DisturbanceModel(u_avg_sigma(model, *nominal), config.seed);
}

}  // namespace socl
