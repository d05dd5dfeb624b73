#pragma once

#include <cstdint>
#include <vector>

#include "frictorq/dynamics.hpp"
#include "frictorq/runlog.hpp"
#include "frictorq/scenario.hpp"
#include "frictorq/state.hpp"

namespace frictorq {

/// One RK4 step of the coupled robot+motor plant with the motor torque held
/// constant. The joint-side input is u = Gamma^-T tau_m; plant friction and
/// the reflected motor inertia live inside the constrained forward dynamics.
/// The base quaternion is integrated as a plain 4-vector and renormalized
/// once at the end of the step.
RobotState step_physics(const RobotModel& model, const RobotState& state, const Vec& tau_m,
                        double dt, const std::vector<ContactRef>* refs = nullptr);

/// Low-pass memory for the velocity measurement channels.
struct MeasurementState {
  Vec sdot_filtered;
  Vec6 base_filtered = Vec6::Zero();

  static MeasurementState init(const RobotState& state) {
    MeasurementState ms;
    ms.sdot_filtered = state.sdot;
    ms.base_filtered = state.v_b;
    return ms;
  }
};

struct Measurement {
  Vec s;
  Vec sdot;
  Vec6 base_vel = Vec6::Zero();
};

/// Advance the velocity low-pass one inner tick and sample the noisy
/// measurement. Positions pass through exactly. The noise draw for channel c
/// at this tick reads counter tick * n_channels + c, so streams depend only
/// on (seed, tick, channel) and never on evaluation order.
Measurement measure(const RobotState& state, const NoiseModel& noise, double dt_inner,
                    uint64_t tick, MeasurementState& ms, bool floating);

/// Execute the three-rate loop (outer controller, inner motor loop, physics)
/// with zero-order hold between rates and collect one log row per outer tick.
RunLog run_scenario(const ScenarioConfig& config);

}  // namespace frictorq
