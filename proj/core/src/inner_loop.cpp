#include "frictorq/inner_loop.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace frictorq {

namespace {

void accumulate(InnerLoopState& state, const Vec& rate, double dt, double clamp) {
  state.integral += dt * rate;
  for (int i = 0; i < state.integral.size(); ++i) {
    state.integral(i) = std::min(clamp, std::max(-clamp, state.integral(i)));
  }
}

}  // namespace

Vec regsign(const Vec& v, double eps) {
  Vec out(v.size());
  for (int i = 0; i < v.size(); ++i) out(i) = v(i) / (std::abs(v(i)) + eps);
  return out;
}

Vec baseline_motor_torque(const Actuation& act, const Vec& tau_star, const Vec& tau_measured,
                          const Vec& thetadot, InnerLoopState& state, const Mat& ki, double dt,
                          double clamp) {
  accumulate(state, tau_measured - tau_star, dt, clamp);
  return act.kv * thetadot + act.kc * regsign(thetadot, act.epsilon) +
         act.gamma.transpose() * (tau_star - ki * state.integral);
}

Vec ef_motor_torque(const Actuation& act, const Vec& u_star, const Vec& u_measured,
                    InnerLoopState& state, const Mat& ki, double dt, double clamp) {
  accumulate(state, u_measured - u_star, dt, clamp);
  return act.gamma.transpose() * (u_star - ki * state.integral);
}

Vec measure_u(const Actuation& act, const Vec& tau_m) {
  return act.gamma.transpose().partialPivLu().solve(tau_m);
}

}  // namespace frictorq
