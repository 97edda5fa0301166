#pragma once

#include <cstdint>
#include <functional>

#include "socl/noise.hpp"
#include "socl/trajectory.hpp"

namespace socl {

/// Per-step control law: maps (state, step index) to a control.
using Controller = std::function<Vector(const Vector&, int)>;

/**
 * Simulate T noisy steps of the closed loop. Disturbances come from the
 * counter-based stream (run_index, t); epsilon = 0 skips sampling entirely,
 * so noise-free runs are bitwise seed-independent.
 *
 * Controller failures are rethrown with the step index attached.
 */
Trajectory rollout(const ControlAffineModel& model, const CostModel& cost,
                   const Vector& x0, const Controller& controller,
                   const DisturbanceModel& disturbance, double epsilon, int T,
                   std::uint64_t run_index = 0);

}  // namespace socl
