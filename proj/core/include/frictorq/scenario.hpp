#pragma once

#include <cstdint>
#include <string>

#include "frictorq/control_fixed.hpp"
#include "frictorq/control_floating.hpp"
#include "frictorq/types.hpp"

namespace frictorq {

enum class ControllerKind { baseline, ef };
enum class ModeKind { fixed_base, floating_base };
enum class ReferenceKind { joint_sinusoid, com_sinusoid };

struct NoiseModel {
  double sigma_v = 0.0;  ///< velocity noise std, rad/s
  double tau_f = 0.0;    ///< first-order low-pass time constant, s (0 = off)
  uint64_t seed = 0;
};

/// Sinusoidal reference, either per-joint or on the CoM along one axis.
/// Amplitudes are stored in base units (rad, m); the config parser converts
/// amplitude_deg / amplitude_cm keys.
struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::joint_sinusoid;
  Vec amplitude;            ///< per joint, rad
  double amplitude_m = 0.0; ///< CoM amplitude, m
  double frequency = 0.0;   ///< Hz
  int axis = 0;             ///< CoM axis index
};

struct ScenarioConfig {
  std::string model_path;
  ControllerKind controller = ControllerKind::baseline;
  ModeKind mode = ModeKind::fixed_base;
  double duration = 0.0;
  double dt_physics = 1e-4;
  double dt_inner = 1e-3;
  double dt_outer = 1e-2;
  JointGains joint_gains;           // fixed-base tracking (EF)
  JointGains baseline_joint_gains;  // fixed-base tracking (baseline; defaults to joint_gains)
  MomentumGains momentum_gains;     // floating-base balancing (includes postural)
  Mat ki_inner;
  ReferenceSpec reference;
  NoiseModel noise;
  double windup_momentum = 50.0;
  double windup_inner = 50.0;
  std::string output;
};

/// Parse a scenario config JSON file. Gain entries accept a scalar (uniform
/// diagonal), a flat array (diagonal), or nested arrays (full matrix); the
/// model is consulted for the joint count, and a relative model path is
/// resolved against the config file's directory. Throws ModelError with the
/// first violation found.
ScenarioConfig load_scenario(const std::string& path);

/// Reference trajectory samples at time t.
JointReference joint_reference_at(const ReferenceSpec& ref, int n, double t);

/// CoM sinusoid: desired CoM offset from com0 plus the matching momentum
/// reference for a robot of the given mass. A smoothstep envelope over the
/// first period starts the sway from rest; afterwards the reference is the
/// pure sinusoid.
void com_reference_at(const ReferenceSpec& ref, double mass, const Vec3& com0, double t,
                      Vec3* com_ref, MomentumReference* mref);

}  // namespace frictorq
