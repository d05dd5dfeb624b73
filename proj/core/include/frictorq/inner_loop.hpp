#pragma once

#include "frictorq/model.hpp"
#include "frictorq/types.hpp"

namespace frictorq {

struct InnerLoopState {
  Vec integral;
  double last_time = 0.0;

  static InnerLoopState zero(int n) {
    InnerLoopState s;
    s.integral = Vec::Zero(n);
    return s;
  }
};

/// Regularized sign used by both the plant and the baseline compensation:
/// v / (|v| + eps) component-wise.
Vec regsign(const Vec& v, double eps);

/// Baseline motor command: compensate friction from the measured motor
/// velocity and track tau_star with an integral correction.
///   tau_m = Kv thetadot + Kc regsign(thetadot) + Gamma^T (tau_star - KI integral)
/// The integral accumulates dt * (tau_measured - tau_star), clamped at
/// +-clamp per component.
Vec baseline_motor_torque(const Actuation& act, const Vec& tau_star, const Vec& tau_measured,
                          const Vec& thetadot, InnerLoopState& state, const Mat& ki, double dt,
                          double clamp);

/// Friction-exploiting motor command: no compensation terms, just drive the
/// joint-side input u toward u_star.
///   tau_m = Gamma^T (u_star - KI integral)
/// The integral accumulates dt * (u_measured - u_star), clamped at +-clamp.
Vec ef_motor_torque(const Actuation& act, const Vec& u_star, const Vec& u_measured,
                    InnerLoopState& state, const Mat& ki, double dt, double clamp);

/// Joint-side input produced by an applied motor torque: u = Gamma^-T tau_m.
Vec measure_u(const Actuation& act, const Vec& tau_m);

}  // namespace frictorq
