#include "frictorq/sim.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

#include "frictorq/control_fixed.hpp"
#include "frictorq/control_floating.hpp"
#include "frictorq/inner_loop.hpp"
#include "frictorq/linalg.hpp"
#include "frictorq/rng.hpp"
#include "frictorq/spatial.hpp"

namespace frictorq {

namespace {

struct StateDeriv {
  Vec3 dpos = Vec3::Zero();
  Eigen::Vector4d dquat = Eigen::Vector4d::Zero();  // (w, x, y, z)
  Vec6 dvb = Vec6::Zero();
  Vec ds;
  Vec dsdot;
};

StateDeriv plant_derivative(const RobotModel& model, const RobotState& state, const Vec& u,
                            const std::vector<ContactRef>* refs) {
  RobotState local = state;
  local.base_quat.normalize();
  const DynamicsQuantities dq = compute_dynamics(model, local);
  const ForwardDynamicsResult fd = forward_dynamics_constrained(model, dq, local, u, refs);

  StateDeriv d;
  d.ds = local.sdot;
  if (model.floating_base) {
    const Vec6 tw = base_twist_from_state(dq, local);
    d.dpos = tw.head<3>() + tw.tail<3>().cross(local.base_pos);
    const Quat qd = quat_derivative(local.base_quat, tw.tail<3>());
    d.dquat << qd.w(), qd.x(), qd.y(), qd.z();
    d.dvb = fd.nudot.head<6>();
    d.dsdot = fd.nudot.tail(model.n_joints());
  } else {
    d.dsdot = fd.nudot;
  }
  return d;
}

RobotState advance(const RobotState& s, const StateDeriv& d, double h, bool floating) {
  RobotState out = s;
  out.s = s.s + h * d.ds;
  out.sdot = s.sdot + h * d.dsdot;
  if (floating) {
    out.base_pos = s.base_pos + h * d.dpos;
    Eigen::Vector4d q(s.base_quat.w(), s.base_quat.x(), s.base_quat.y(), s.base_quat.z());
    q += h * d.dquat;
    out.base_quat = Quat(q(0), q(1), q(2), q(3));
    out.v_b = s.v_b + h * d.dvb;
  }
  return out;
}

StateDeriv rk4_blend(const StateDeriv& k1, const StateDeriv& k2, const StateDeriv& k3,
                     const StateDeriv& k4) {
  StateDeriv d;
  d.dpos = (k1.dpos + 2.0 * k2.dpos + 2.0 * k3.dpos + k4.dpos) / 6.0;
  d.dquat = (k1.dquat + 2.0 * k2.dquat + 2.0 * k3.dquat + k4.dquat) / 6.0;
  d.dvb = (k1.dvb + 2.0 * k2.dvb + 2.0 * k3.dvb + k4.dvb) / 6.0;
  d.ds = (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds) / 6.0;
  d.dsdot = (k1.dsdot + 2.0 * k2.dsdot + 2.0 * k3.dsdot + k4.dsdot) / 6.0;
  return d;
}

bool state_finite(const RobotState& s, bool floating) {
  if (!s.s.allFinite() || !s.sdot.allFinite()) return false;
  if (floating) {
    if (!s.base_pos.allFinite() || !s.v_b.allFinite()) return false;
    if (!std::isfinite(s.base_quat.w()) || !std::isfinite(s.base_quat.x()) ||
        !std::isfinite(s.base_quat.y()) || !std::isfinite(s.base_quat.z())) {
      return false;
    }
  }
  return true;
}

std::string fmt_time(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", t);
  return buf;
}

}  // namespace

RobotState step_physics(const RobotModel& model, const RobotState& state, const Vec& tau_m,
                        double dt, const std::vector<ContactRef>* refs) {
  const bool floating = model.floating_base;
  const Vec u = measure_u(model.actuation, tau_m);

  const StateDeriv k1 = plant_derivative(model, state, u, refs);
  const StateDeriv k2 = plant_derivative(model, advance(state, k1, 0.5 * dt, floating), u, refs);
  const StateDeriv k3 = plant_derivative(model, advance(state, k2, 0.5 * dt, floating), u, refs);
  const StateDeriv k4 = plant_derivative(model, advance(state, k3, dt, floating), u, refs);

  RobotState out = advance(state, rk4_blend(k1, k2, k3, k4), dt, floating);
  if (floating) out.base_quat.normalize();
  if (!state_finite(out, floating)) {
    throw DivergenceError("non-finite state after physics step", 0.0);
  }
  return out;
}

Measurement measure(const RobotState& state, const NoiseModel& noise, double dt_inner,
                    uint64_t tick, MeasurementState& ms, bool floating) {
  if (noise.tau_f > 0.0) {
    const double a = std::exp(-dt_inner / noise.tau_f);
    ms.sdot_filtered = a * ms.sdot_filtered + (1.0 - a) * state.sdot;
    if (floating) ms.base_filtered = a * ms.base_filtered + (1.0 - a) * state.v_b;
  } else {
    ms.sdot_filtered = state.sdot;
    if (floating) ms.base_filtered = state.v_b;
  }

  Measurement m;
  m.s = state.s;
  m.sdot = ms.sdot_filtered;
  if (floating) m.base_vel = ms.base_filtered;

  if (noise.sigma_v > 0.0) {
    const CounterRng rng(noise.seed);
    const int n = static_cast<int>(state.sdot.size());
    const uint64_t nch = static_cast<uint64_t>(n + (floating ? 6 : 0));
    for (int i = 0; i < n; ++i) {
      m.sdot(i) += noise.sigma_v * rng.normal(tick * nch + static_cast<uint64_t>(i));
    }
    if (floating) {
      for (int k = 0; k < 6; ++k) {
        m.base_vel(k) += noise.sigma_v * rng.normal(tick * nch + static_cast<uint64_t>(n + k));
      }
    }
  }
  return m;
}

RunLog run_scenario(const ScenarioConfig& cfg) {
  const RobotModel model = load_model(cfg.model_path);
  const Actuation& act = model.actuation;
  const int n = model.n_joints();
  const int nc = model.n_contacts();
  const bool floating = cfg.mode == ModeKind::floating_base;

  const auto rate_ratio = [](double coarse, double fine, const char* what) {
    const double r = coarse / fine;
    const auto k = static_cast<long>(std::llround(r));
    if (k < 1 || std::abs(r - static_cast<double>(k)) > 1e-9 * r) {
      throw ModelError(std::string("scenario: ") + what + " must be an integer");
    }
    return k;
  };
  const long r_inner = rate_ratio(cfg.dt_inner, cfg.dt_physics, "dt_inner/dt_physics");
  const long r_outer = rate_ratio(cfg.dt_outer, cfg.dt_inner, "dt_outer/dt_inner");
  const long n_outer = std::llround(cfg.duration / cfg.dt_outer);

  RobotState state = RobotState::zero(model);
  const DynamicsQuantities dq0 = compute_dynamics(model, state);
  const Vec3 com0 = dq0.com;

  // Contacts stay welded to their initial poses.
  std::vector<ContactRef> refs;
  for (int k = 0; k < nc; ++k) {
    refs.push_back({dq0.contact_poses[k].p, dq0.contact_poses[k].R});
  }
  const std::vector<ContactRef>* refs_ptr = (floating && nc > 0) ? &refs : nullptr;

  JointReference postural;
  postural.s = state.s;
  postural.sdot = Vec::Zero(n);
  postural.sddot = Vec::Zero(n);

  RunLog log;
  log.columns.push_back("t");
  const auto push_group = [&](const char* stem, int count) {
    for (int i = 0; i < count; ++i) log.columns.push_back(std::string(stem) + std::to_string(i));
  };
  push_group("s_", n);
  push_group("sd_", n);
  push_group("sdot_", n);
  push_group("sdot_meas_", n);
  push_group("u_", n);
  push_group("tau_m_", n);
  if (floating) push_group("f_", 6 * nc);
  push_group("H_", 6);
  if (floating) {
    push_group("Hd_", 6);
    push_group("IH_", 6);
  }
  log.columns.insert(log.columns.end(), {"com_x", "com_y", "com_z"});
  if (floating) log.columns.insert(log.columns.end(), {"com_ref_x", "com_ref_y", "com_ref_z"});
  log.columns.push_back("err_s_norm");
  if (floating) {
    log.columns.push_back("err_hlin_norm");
    log.columns.push_back("constraint_residual");
    log.columns.push_back("cone_margin_min");
    log.columns.push_back("cone_margin_cmd_min");
  }
  log.columns.push_back("cond_ms");
  log.columns.push_back("cond_ms_bar");

  MeasurementState ms = MeasurementState::init(state);
  ControllerState cs;
  InnerLoopState il = InnerLoopState::zero(n);
  Vec u_star = Vec::Zero(n);
  Vec tau_m = Vec::Zero(n);

  Eigen::PartialPivLU<Mat> gamma_lu(act.gamma);

  for (long j = 0; j < n_outer * r_outer; ++j) {
    const double t = static_cast<double>(j) * cfg.dt_inner;
    Measurement meas = measure(state, cfg.noise, cfg.dt_inner, static_cast<uint64_t>(j), ms,
                               floating);

    const bool outer_tick = (j % r_outer) == 0;
    const bool need_dq = outer_tick || cfg.controller == ControllerKind::baseline;
    DynamicsQuantities dq;
    if (need_dq) dq = compute_dynamics(model, state);

    JointReference jref;
    MomentumReference mref;
    Vec3 com_ref = Vec3::Zero();
    Vec6 ih_used = cs.i_htilde;

    if (outer_tick) {
      if (!floating) {
        jref = joint_reference_at(cfg.reference, n, t);
        if (cfg.controller == ControllerKind::ef) {
          const FrictionQuantities fq = friction_quantities(act, meas.sdot);
          u_star = ef_fixed_control(dq, act, fq.kf_bar, jref, meas.s, meas.sdot, cfg.joint_gains);
        } else {
          u_star = baseline_fixed_control(dq, act, jref, meas.s, meas.sdot, cfg.baseline_joint_gains);
        }
      } else {
        jref = postural;
        com_reference_at(cfg.reference, dq.mass, com0, t, &com_ref, &mref);
        const ConeConstraints cones = friction_cone_constraints(model, dq.contact_poses);
        ControlOutput out;
        if (cfg.controller == ControllerKind::ef) {
          const FrictionQuantities fq = friction_quantities(act, meas.sdot);
          out = ef_momentum_controller(dq, act, fq.kf_bar, cfg.momentum_gains, mref, cs.i_htilde,
                                       jref, meas.s, meas.sdot, cones);
        } else {
          out = baseline_momentum_controller(dq, cfg.momentum_gains, mref, cs.i_htilde, jref,
                                             meas.s, meas.sdot, cones);
        }
        u_star = out.u;

        RobotState ref_state = state;
        ref_state.s = postural.s;
        const DynamicsQuantities dq_sd = compute_dynamics(model, ref_state);
        cs = momentum_integral_update(cs, dq, dq_sd, meas.sdot, postural.sdot, cfg.dt_outer,
                                      cfg.windup_momentum);
      }
    }

    // Inner motor loop at every tick, against the held outer command.
    if (cfg.controller == ControllerKind::ef) {
      const Vec u_meas = measure_u(act, tau_m);
      tau_m = ef_motor_torque(act, u_star, u_meas, il, cfg.ki_inner, cfg.dt_inner,
                              cfg.windup_inner);
    } else {
      const ForwardDynamicsResult fd =
          forward_dynamics_constrained(model, dq, state, measure_u(act, tau_m), refs_ptr);
      Vec tau_actual = dq.M_s * fd.nudot.tail(n) + dq.h_s;
      if (floating && nc > 0) tau_actual -= dq.J_s.transpose() * fd.f;
      const Vec thetadot = gamma_lu.solve(meas.sdot);
      tau_m = baseline_motor_torque(act, u_star, tau_actual, thetadot, il, cfg.ki_inner,
                                    cfg.dt_inner, cfg.windup_inner);
    }

    if (outer_tick) {
      const ForwardDynamicsResult fd_log =
          forward_dynamics_constrained(model, dq, state, measure_u(act, tau_m), refs_ptr);
      const Mat ms_bar = mbar_s(dq.M_s, act);

      std::vector<double> row;
      row.reserve(log.columns.size());
      row.push_back(t);
      for (int i = 0; i < n; ++i) row.push_back(state.s(i));
      for (int i = 0; i < n; ++i) row.push_back(jref.s(i));
      for (int i = 0; i < n; ++i) row.push_back(state.sdot(i));
      for (int i = 0; i < n; ++i) row.push_back(meas.sdot(i));
      for (int i = 0; i < n; ++i) row.push_back(u_star(i));
      for (int i = 0; i < n; ++i) row.push_back(tau_m(i));
      if (floating) {
        for (int i = 0; i < 6 * nc; ++i) row.push_back(fd_log.f(i));
      }
      for (int i = 0; i < 6; ++i) row.push_back(dq.H(i));
      if (floating) {
        for (int i = 0; i < 6; ++i) row.push_back(mref.H(i));
        for (int i = 0; i < 6; ++i) row.push_back(ih_used(i));
      }
      for (int i = 0; i < 3; ++i) row.push_back(dq.com(i));
      if (floating) {
        for (int i = 0; i < 3; ++i) row.push_back(com_ref(i));
      }
      row.push_back((state.s - jref.s).norm());
      if (floating) {
        row.push_back((dq.H.head<3>() - mref.H.head<3>()).norm());
        double drift = 0.0;
        for (int k = 0; k < nc; ++k) {
          drift = std::max(drift, (dq.contact_poses[k].p - refs[k].p).norm());
        }
        row.push_back(drift);
        double margin = 0.0;
        if (nc > 0) {
          const ConeConstraints cones = friction_cone_constraints(model, dq.contact_poses);
          margin = (cones.b - cones.a * fd_log.f).minCoeff();
        }
        row.push_back(margin);
      }
      row.push_back(condition_number(dq.M_s));
      row.push_back(condition_number(ms_bar));
      log.add_row(std::move(row));
    }

    // Physics substeps under the held motor torque.
    for (long p = 0; p < r_inner; ++p) {
      const double t_next = t + static_cast<double>(p + 1) * cfg.dt_physics;
      try {
        state = step_physics(model, state, tau_m, cfg.dt_physics, refs_ptr);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at t=" + fmt_time(t_next), t_next);
      }
      double vel_norm = state.sdot.norm();
      if (floating) vel_norm += state.v_b.norm();
      if (vel_norm > 1e3) {
        throw DivergenceError("divergence watchdog tripped (|nu| > 1e3) at t=" + fmt_time(t_next),
                              t_next);
      }
    }
  }
  return log;
}

}  // namespace frictorq
