#pragma once

#include <cstdint>
#include <optional>

#include "socl/model.hpp"
#include "socl/rng.hpp"
#include "socl/trajectory.hpp"
#include "socl/types.hpp"

namespace socl {

/**
 * Process-noise description. The disturbance entering the dynamics is
 * eps * w * sqrt(dt) with w ~ N(0, diag(base_sigma)^2) per coordinate.
 * base_sigma is either a fixed vector or derived from the nominal controls
 * (the "u_avg" convention): sigma_i = mean_t sum_j |G(xbar_t)_{ij}| * uavg_j,
 * where uavg_j is the time-average of |ubar_t^j| over the eps = 0 open-loop
 * solution. For a 1-D system with g = 1 this reduces to sigma = uavg.
 */
struct NoiseConfig {
  enum class SigmaRule { kFixed, kUAvg };

  double epsilon = 0.0;
  SigmaRule rule = SigmaRule::kUAvg;
  Vector fixed_sigma;  // consumed only when rule == kFixed
  std::uint64_t seed = 0;
};

/// Resolved per-coordinate noise scale plus the stream seed. All sampling is
/// counter-based: draw (run, t, i) is a pure function of the key, so
/// rollouts are reproducible under any parallel schedule.
class DisturbanceModel {
 public:
  DisturbanceModel(Vector base_sigma, std::uint64_t seed)
      : base_sigma_(std::move(base_sigma)), seed_(seed) {
    require(base_sigma_.size() >= 1, "DisturbanceModel: empty sigma");
    require(base_sigma_.minCoeff() >= 0.0, "DisturbanceModel: negative sigma");
  }

  const Vector& base_sigma() const { return base_sigma_; }
  std::uint64_t seed() const { return seed_; }

  /// Pre-scaled disturbance sample w for (run, step): N(0, diag(sigma)^2).
  Vector sample(std::uint64_t run, int t) const {
    Vector w(base_sigma_.size());
    for (int i = 0; i < w.size(); ++i) {
      w[i] = base_sigma_[i] *
             rng::normal(seed_, rng::kRollout, run, static_cast<std::uint64_t>(t),
                         static_cast<std::uint64_t>(i));
    }
    return w;
  }

 private:
  Vector base_sigma_;
  std::uint64_t seed_;
};

/// The u_avg sigma rule applied to a nominal trajectory.
Vector u_avg_sigma(const ControlAffineModel& model, const Trajectory& nominal);

/// Resolve a NoiseConfig into a concrete DisturbanceModel. `nominal` is
/// required for the u_avg rule and ignored otherwise.
DisturbanceModel resolve_noise(const NoiseConfig& config, const ControlAffineModel& model,
                               const Trajectory* nominal);

}  // namespace socl
