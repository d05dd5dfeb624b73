#include "frictorq/dynamics.hpp"

#include <Eigen/Cholesky>

#include "frictorq/friction.hpp"
#include "frictorq/linalg.hpp"
#include "frictorq/spatial.hpp"

namespace frictorq {

namespace {

// 6-vectors are (linear, angular) throughout; twists live at the world
// origin, wrenches are (force, moment about the origin or stated point).

struct SpatialInertia {
  double m = 0.0;
  Vec3 c = Vec3::Zero();  // world CoM
  Mat3 rot = Mat3::Zero();  // about the CoM, world axes

  Mat6 at_origin() const {
    Mat6 i = Mat6::Zero();
    const Mat3 cx = skew(c);
    i.topLeftCorner<3, 3>() = m * Mat3::Identity();
    i.topRightCorner<3, 3>() = -m * cx;
    i.bottomLeftCorner<3, 3>() = m * cx;
    i.bottomRightCorner<3, 3>() = rot - m * cx * cx;
    return i;
  }
};

Vec6 cross_motion(const Vec6& a, const Vec6& b) {
  Vec6 out;
  out.head<3>() = a.tail<3>().cross(b.head<3>()) + a.head<3>().cross(b.tail<3>());
  out.tail<3>() = a.tail<3>().cross(b.tail<3>());
  return out;
}

Vec6 cross_force(const Vec6& v, const Vec6& f) {
  Vec6 out;
  out.head<3>() = v.tail<3>().cross(f.head<3>());
  out.tail<3>() = v.tail<3>().cross(f.tail<3>()) + v.head<3>().cross(f.head<3>());
  return out;
}

struct Workspace {
  std::vector<LinkPose> poses;
  std::vector<SpatialInertia> inertias;
  std::vector<Vec6> S;        // joint motion axes at the world origin
  std::vector<Vec6> V;        // link twists
  std::vector<Vec6> A_bias;   // link accelerations at nudot = 0
  std::vector<std::vector<int>> path;  // joints from root to each link
};

void build_kinematics(const RobotModel& model, const RobotState& state, Workspace& ws) {
  const size_t nl = model.links.size();
  ws.poses = forward_kinematics(model, state);
  ws.inertias.resize(nl);
  ws.path.assign(nl, {});
  ws.S.resize(model.joints.size());

  for (size_t l = 0; l < nl; ++l) {
    const Link& link = model.links[l];
    SpatialInertia& si = ws.inertias[l];
    si.m = link.mass;
    si.c = ws.poses[l].p + ws.poses[l].R * link.com;
    si.rot = ws.poses[l].R * link.inertia * ws.poses[l].R.transpose();
  }
  for (int j : model.joint_order) {
    const Joint& jnt = model.joints[j];
    const LinkPose& par = ws.poses[model.joint_parent_link[j]];
    const Vec3 p = par.p + par.R * jnt.origin.xyz;
    const Vec3 a = par.R * jnt.origin.rot * jnt.axis;
    ws.S[j].head<3>() = p.cross(a);
    ws.S[j].tail<3>() = a;
    const int child = model.joint_child_link[j];
    ws.path[child] = ws.path[model.joint_parent_link[j]];
    ws.path[child].push_back(j);
  }
}

// Twist of every link plus the zero-acceleration (bias) accelerations.
void build_velocities(const RobotModel& model, const RobotState& state, const Vec6& base_twist,
                      Workspace& ws) {
  const size_t nl = model.links.size();
  ws.V.assign(nl, Vec6::Zero());
  ws.A_bias.assign(nl, Vec6::Zero());
  if (model.floating_base) ws.V[model.root_link] = base_twist;
  for (int j : model.joint_order) {
    const int child = model.joint_child_link[j];
    const int par = model.joint_parent_link[j];
    ws.V[child] = ws.V[par] + ws.S[j] * state.sdot(j);
    ws.A_bias[child] = ws.A_bias[par] + cross_motion(ws.V[child], ws.S[j]) * state.sdot(j);
  }
}

// Dense link Jacobian in pre-transform coordinates (base block identity).
Mat link_jacobian(const RobotModel& model, const Workspace& ws, int link, int nv) {
  Mat j = Mat::Zero(6, nv);
  const int base_cols = model.floating_base ? 6 : 0;
  if (model.floating_base) j.leftCols<6>() = Mat6::Identity();
  for (int jj : ws.path[link]) j.col(base_cols + jj) = ws.S[jj];
  return j;
}

}  // namespace

Vec DynamicsQuantities::h_full(bool floating) const {
  if (!floating) return h_s;
  Vec h(6 + h_s.size());
  h << h_b, h_s;
  return h;
}

Mat DynamicsQuantities::J_full(bool floating) const {
  if (!floating) return J_s;
  Mat j(J_b.rows(), 6 + J_s.cols());
  j << J_b, J_s;
  return j;
}

Vec6 base_twist_from_state(const DynamicsQuantities& dq, const RobotState& state) {
  const Vec6 w = state.v_b - dq.Ts * state.sdot;
  Vec6 v0;
  v0.head<3>() = w.head<3>() + dq.com.cross(w.tail<3>());
  v0.tail<3>() = w.tail<3>();
  return v0;
}

DynamicsQuantities compute_dynamics(const RobotModel& model, const RobotState& state) {
  const int n = model.n_joints();
  const int nb = model.floating_base ? 6 : 0;
  const int nv = nb + n;
  const int nc = model.n_contacts();
  const bool floating = model.floating_base;

  Workspace ws;
  build_kinematics(model, state, ws);
  const size_t nl = model.links.size();

  DynamicsQuantities dq;
  dq.floating = floating;
  dq.link_poses = ws.poses;
  dq.mass = model.total_mass;
  dq.gravity_norm = model.gravity_norm;

  // Mass matrix in pre-transform coordinates and the CoM.
  Mat m0 = Mat::Zero(nv, nv);
  std::vector<Mat> jacs(nl);
  Vec3 weighted = Vec3::Zero();
  for (size_t l = 0; l < nl; ++l) {
    jacs[l] = link_jacobian(model, ws, static_cast<int>(l), nv);
    const Mat6 i6 = ws.inertias[l].at_origin();
    m0.noalias() += jacs[l].transpose() * i6 * jacs[l];
    weighted += ws.inertias[l].m * ws.inertias[l].c;
  }
  m0 = 0.5 * (m0 + m0.transpose());
  dq.com = weighted / dq.mass;
  const Mat3 pcx = skew(dq.com);

  // Locked inertia about the CoM; this is the base mass matrix.
  Mat3 i_rot = Mat3::Zero();
  for (size_t l = 0; l < nl; ++l) {
    const Vec3 d = ws.inertias[l].c - dq.com;
    i_rot += ws.inertias[l].rot + ws.inertias[l].m * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
  }
  dq.M_b.topLeftCorner<3, 3>() = dq.mass * Mat3::Identity();
  dq.M_b.bottomRightCorner<3, 3>() = i_rot;

  if (floating) {
    // Momentum map about the CoM: the top rows of m0 are the momentum
    // matrix at the origin, phi translates moments to the CoM.
    Mat a_g = m0.topRows<6>();
    a_g.bottomRows<3>() -= pcx * a_g.topRows<3>();
    dq.Ts = Mat::Zero(6, n);
    dq.Ts.topRows<3>() = a_g.topRightCorner(3, n) / dq.mass;
    dq.Ts.bottomRows<3>() = i_rot.llt().solve(a_g.bottomRightCorner(3, n));

    // Joint-space mass matrix: Schur complement of the base block.
    const Mat mbs = m0.topRightCorner(6, n);
    const Mat ms = m0.bottomRightCorner(n, n) -
                   mbs.transpose() * m0.topLeftCorner<6, 6>().llt().solve(mbs);
    dq.M_s = 0.5 * (ms + ms.transpose());
  } else {
    dq.Ts = Mat::Zero(6, n);
    dq.M_s = m0;
  }

  dq.base_twist = floating ? base_twist_from_state(dq, state) : Vec6::Zero();
  build_velocities(model, state, dq.base_twist, ws);

  // Bias forces, momentum and its zero-acceleration rate at the origin.
  const Vec3 g_vec(0.0, 0.0, -model.gravity_norm);
  Vec h0 = Vec::Zero(nv);
  Vec6 mom_o = Vec6::Zero();
  Vec6 mom_o_rate = Vec6::Zero();  // gravity-free, nudot = 0
  for (size_t l = 0; l < nl; ++l) {
    const Mat6 i6 = ws.inertias[l].at_origin();
    const Vec6 iv = i6 * ws.V[l];
    const Vec6 bias = i6 * ws.A_bias[l] + cross_force(ws.V[l], iv);
    Vec6 f_grav;
    f_grav.head<3>() = ws.inertias[l].m * g_vec;
    f_grav.tail<3>() = ws.inertias[l].c.cross(ws.inertias[l].m * g_vec);
    h0.noalias() += jacs[l].transpose() * (bias - f_grav);
    mom_o += iv;
    mom_o_rate += bias;
  }

  // Rate of the locked inertia (for the transform's velocity terms).
  const Vec3 com_vel = mom_o.head<3>() / dq.mass;
  dq.com_vel = com_vel;
  Mat3 i_rot_dot = Mat3::Zero();
  for (size_t l = 0; l < nl; ++l) {
    const Vec3 d = ws.inertias[l].c - dq.com;
    const Vec3 w = ws.V[l].tail<3>();
    const Vec3 cdot = ws.V[l].head<3>() + w.cross(ws.inertias[l].c);
    const Vec3 ddot = cdot - com_vel;
    const Mat3 wx = skew(w);
    i_rot_dot += wx * ws.inertias[l].rot - ws.inertias[l].rot * wx +
                 ws.inertias[l].m *
                     (2.0 * d.dot(ddot) * Mat3::Identity() - ddot * d.transpose() - d * ddot.transpose());
  }

  // Contact Jacobians and drift in pre-transform coordinates.
  Mat j0 = Mat::Zero(6 * nc, nv);
  Vec jdot_nu0 = Vec::Zero(6 * nc);
  dq.contact_poses.resize(nc);
  for (int k = 0; k < nc; ++k) {
    const ContactSpec& c = model.contacts[k];
    const int l = model.link_index(c.link);
    dq.contact_poses[k].R = ws.poses[l].R * c.origin.rot;
    dq.contact_poses[k].p = ws.poses[l].p + ws.poses[l].R * c.origin.xyz;
    const Vec3 pk = dq.contact_poses[k].p;
    Mat jl = jacs[l];
    jl.topRows<3>() -= skew(pk) * jl.bottomRows<3>();
    j0.middleRows(6 * k, 6) = jl;
    const Vec3 w = ws.V[l].tail<3>();
    const Vec3 pk_dot = ws.V[l].head<3>() + w.cross(pk);
    jdot_nu0.segment<3>(6 * k) =
        ws.A_bias[l].head<3>() - pk_dot.cross(w) - pk.cross(ws.A_bias[l].tail<3>());
    jdot_nu0.segment<3>(6 * k + 3) = ws.A_bias[l].tail<3>();
  }

  if (floating) {
    // Velocity terms of the coordinate change. tdot_b is the base-row part
    // of Tdot applied to the pre-transform velocity.
    Vec6 a_g_nu;  // momentum rate seen at the moving CoM, nudot = 0
    a_g_nu.head<3>() = mom_o_rate.head<3>();
    a_g_nu.tail<3>() = mom_o_rate.tail<3>() - pcx * mom_o_rate.head<3>() -
                       com_vel.cross(mom_o.head<3>());
    Vec6 tdot_b;
    tdot_b.head<3>() = a_g_nu.head<3>() / dq.mass;
    tdot_b.tail<3>() = i_rot.llt().solve(a_g_nu.tail<3>() - i_rot_dot * state.v_b.tail<3>());

    // Pull tdot_b back through T^-1; only the base rows are nonzero.
    Vec6 tb_inv_tdot;
    tb_inv_tdot.head<3>() = tdot_b.head<3>() + dq.com.cross(tdot_b.tail<3>());
    tb_inv_tdot.tail<3>() = tdot_b.tail<3>();

    Vec h_hat = h0;
    h_hat.noalias() -= m0.leftCols<6>() * tb_inv_tdot;

    Vec6 hb = h_hat.head<6>();
    hb.tail<3>() -= pcx * hb.head<3>();  // phi = Tb^-T
    dq.h_b = hb;
    dq.h_s = h_hat.tail(n) - dq.Ts.transpose() * hb;

    // Contact rows: J_cen = J0 T^-1, drift picks up the same velocity term.
    dq.J_b = Mat::Zero(6 * nc, 6);
    dq.J_s = Mat::Zero(6 * nc, n);
    for (int k = 0; k < nc; ++k) {
      Mat jb = j0.block(6 * k, 0, 6, 6);
      // Tb^-1 = [I, skew(com); 0, I]
      jb.rightCols<3>() += jb.leftCols<3>() * pcx;
      dq.J_b.middleRows(6 * k, 6) = jb;
    }
    dq.J_s = j0.rightCols(n) - dq.J_b * dq.Ts;
    dq.jdot_nu = jdot_nu0 - j0.leftCols<6>() * tb_inv_tdot;

    dq.H = dq.M_b * state.v_b;
    if (nc > 0) {
      if (svd_rank(dq.J_b) < 6)
        throw SolverError("compute_dynamics: contact Jacobian base block rank-deficient");
      dq.Jg = -dq.M_b * pinv(dq.J_b) * dq.J_s;
    } else {
      Mat a_g = m0.topRows<6>();
      a_g.bottomRows<3>() -= pcx * a_g.topRows<3>();
      dq.Jg = a_g.rightCols(n);
    }
  } else {
    dq.h_b = Vec6::Zero();
    dq.h_s = h0;
    dq.J_b = Mat::Zero(6 * nc, 6);
    dq.J_s = j0;
    dq.jdot_nu = jdot_nu0;
    // Momentum map of the chain about the CoM; the base never moves.
    Mat a_g = Mat::Zero(6, n);
    for (size_t l = 0; l < nl; ++l) a_g += ws.inertias[l].at_origin() * jacs[l];
    a_g.bottomRows<3>() -= pcx * a_g.topRows<3>();
    dq.Jg = a_g;
    dq.H = dq.Jg * state.sdot;
  }

  return dq;
}

Vec contact_constraint_residual(const DynamicsQuantities& dq, const Vec& nudot) {
  if (dq.J_b.rows() == 0) return Vec::Zero(0);
  return dq.J_full(dq.floating) * nudot + dq.jdot_nu;
}

ForwardDynamicsResult forward_dynamics_constrained(const RobotModel& model,
                                                   const DynamicsQuantities& dq,
                                                   const RobotState& state, const Vec& u,
                                                   const std::vector<ContactRef>* refs,
                                                   double alpha) {
  const int n = model.n_joints();
  const int nb = model.floating_base ? 6 : 0;
  const int nv = nb + n;
  const int nc = model.n_contacts();

  const FrictionQuantities fq = friction_quantities(model.actuation, state.sdot);
  const Mat ms_bar = mbar_s(dq.M_s, model.actuation);

  Vec rhs = Vec::Zero(nv);
  if (model.floating_base) rhs.head<6>() = -dq.h_b;
  rhs.tail(n) = u - dq.h_s - fq.kf_bar * state.sdot;

  // Block solve with Mbar = blockdiag(M_b, Ms_bar).
  Eigen::LLT<Mat> llt_s(ms_bar);
  if (llt_s.info() != Eigen::Success)
    throw SolverError("forward_dynamics: joint mass matrix not positive definite");
  Eigen::LLT<Mat3> llt_rot(Mat3(dq.M_b.bottomRightCorner<3, 3>()));
  auto mbar_inv = [&](const Vec& x) {
    Vec y(nv);
    if (model.floating_base) {
      y.head<3>() = x.head<3>() / dq.mass;
      y.segment<3>(3) = llt_rot.solve(x.segment<3>(3));
    }
    y.tail(n) = llt_s.solve(x.tail(n));
    return y;
  };

  ForwardDynamicsResult out;
  if (nc == 0) {
    out.nudot = mbar_inv(rhs);
    out.f = Vec::Zero(0);
    return out;
  }

  const Mat j = dq.J_full(model.floating_base);
  Vec nu(nv);
  if (model.floating_base) nu << state.v_b, state.sdot;
  else nu = state.sdot;

  Vec rhs_c = -dq.jdot_nu - 2.0 * alpha * (j * nu);
  if (refs) {
    for (int k = 0; k < nc; ++k) {
      const LinkPose& cur = dq.contact_poses[k];
      rhs_c.segment<3>(6 * k) -= alpha * alpha * (cur.p - (*refs)[k].p);
      rhs_c.segment<3>(6 * k + 3) -=
          alpha * alpha * rotation_log(cur.R * (*refs)[k].R.transpose());
    }
  }

  Mat minv_jt(nv, 6 * nc);
  for (int c = 0; c < 6 * nc; ++c) minv_jt.col(c) = mbar_inv(j.row(c).transpose());
  Mat gram = j * minv_jt;
  gram = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) <= es.eigenvalues()(6 * nc - 1) * 1e-12)
    throw SolverError("forward_dynamics: singular constraint Gram matrix");
  Eigen::LLT<Mat> llt_g(gram);
  out.f = llt_g.solve(rhs_c - j * mbar_inv(rhs));
  out.nudot = mbar_inv(rhs + j.transpose() * out.f);
  return out;
}

ForwardDynamicsResult forward_dynamics_constrained(const RobotModel& model, const RobotState& state,
                                                   const Vec& u, const std::vector<ContactRef>* refs,
                                                   double alpha) {
  return forward_dynamics_constrained(model, compute_dynamics(model, state), state, u, refs, alpha);
}

}  // namespace frictorq
