#include "frictorq/control_floating.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>

#include "frictorq/linalg.hpp"
#include "frictorq/qp.hpp"

namespace frictorq {

namespace {

// Pieces both momentum controllers assemble from the joint-space mass matrix
// they each use (plain for the baseline, motor-augmented for the EF law).
struct WrenchAlgebra {
  Mat lambda;       // J_s Ms^-1
  Mat lambda_pinv;  // right pseudoinverse
  Mat n_lambda;
  Mat jbt;          // J_b^T, 6 x 6nc
  Mat jbt_pinv;     // 6nc x 6
  Mat n_b;
  Mat z;            // orthonormal basis of null(J_b^T)
  Mat gram;         // J Mbar^-1 J^T
  Vec jminv_h;      // J Mbar^-1 h
  Eigen::LLT<Mat> gram_llt;
};

WrenchAlgebra build_wrench_algebra(const DynamicsQuantities& dq, const Mat& ms) {
  WrenchAlgebra w;
  const int n = static_cast<int>(ms.rows());
  const int nf = static_cast<int>(dq.J_b.rows());

  Eigen::LLT<Mat> ms_llt(ms);
  if (ms_llt.info() != Eigen::Success) {
    throw SolverError("momentum controller: joint mass matrix not positive definite");
  }
  w.lambda = ms_llt.solve(dq.J_s.transpose()).transpose();

  Eigen::LLT<Mat6> mb_llt(dq.M_b);
  const Mat mbinv_jbt = mb_llt.solve(dq.J_b.transpose());

  w.gram = dq.J_b * mbinv_jbt + w.lambda * dq.J_s.transpose();
  w.gram = 0.5 * (w.gram + w.gram.transpose()).eval();
  w.gram_llt.compute(w.gram);
  if (w.gram_llt.info() != Eigen::Success) {
    throw SolverError("momentum controller: singular contact Gram matrix");
  }

  w.jminv_h = dq.J_b * mb_llt.solve(dq.h_b) + w.lambda * dq.h_s;

  w.jbt = dq.J_b.transpose();
  Eigen::JacobiSVD<Mat> svd(w.jbt, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double cutoff = svd.singularValues().size() > 0
                            ? svd.singularValues()(0) * kPinvCutoff
                            : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > cutoff) ++rank;
  }
  if (rank < 6) throw SolverError("momentum controller: contact wrench map rank deficient");
  w.jbt_pinv = pinv(w.jbt);
  w.n_b = Mat::Identity(nf, nf) - w.jbt_pinv * w.jbt;
  w.n_b = 0.5 * (w.n_b + w.n_b.transpose()).eval();
  w.z = svd.matrixV().rightCols(nf - rank);

  w.lambda_pinv = pinv(w.lambda);
  w.n_lambda = Mat::Identity(n, n) - w.lambda_pinv * w.lambda;
  w.n_lambda = 0.5 * (w.n_lambda + w.n_lambda.transpose()).eval();
  return w;
}

Vec6 gravity_wrench(const DynamicsQuantities& dq, double g) {
  Vec6 grav = Vec6::Zero();
  grav(2) = dq.mass * g;
  return grav;
}

}  // namespace

ConeConstraints friction_cone_constraints(const RobotModel& model,
                                          const std::vector<LinkPose>& contact_poses) {
  const int nc = model.n_contacts();
  ConeConstraints cc;
  cc.a = Mat::Zero(11 * nc, 6 * nc);
  cc.b = Vec::Zero(11 * nc);
  cc.labels.reserve(11 * nc);

  for (int k = 0; k < nc; ++k) {
    const ContactSpec& spec = model.contacts[k];
    const double mu_t = spec.mu / std::sqrt(2.0);
    const double mu_z = spec.mu * 0.5 * (spec.half_x + spec.half_y);

    // Rows act on the local wrench (R^T F, R^T n); fold the rotation into
    // the world-frame coefficients.
    Mat local(11, 6);
    local.setZero();
    local(0, 0) = 1.0;  local(0, 2) = -mu_t;   // fx <= mu_t fz
    local(1, 0) = -1.0; local(1, 2) = -mu_t;
    local(2, 1) = 1.0;  local(2, 2) = -mu_t;
    local(3, 1) = -1.0; local(3, 2) = -mu_t;
    local(4, 2) = -1.0;                        // fz >= fz_min
    local(5, 4) = 1.0;  local(5, 2) = -spec.half_x;   // |ny| <= hx fz (CoP x)
    local(6, 4) = -1.0; local(6, 2) = -spec.half_x;
    local(7, 3) = 1.0;  local(7, 2) = -spec.half_y;   // |nx| <= hy fz (CoP y)
    local(8, 3) = -1.0; local(8, 2) = -spec.half_y;
    local(9, 5) = 1.0;  local(9, 2) = -mu_z;          // |nz| <= mu_z fz
    local(10, 5) = -1.0; local(10, 2) = -mu_z;

    Mat world_to_local = Mat::Zero(6, 6);
    world_to_local.block<3, 3>(0, 0) = contact_poses[k].R.transpose();
    world_to_local.block<3, 3>(3, 3) = contact_poses[k].R.transpose();

    cc.a.block(11 * k, 6 * k, 11, 6) = local * world_to_local;
    cc.b(11 * k + 4) = -spec.fz_min;

    const std::string& nm = spec.link;
    const char* tags[11] = {"fx+", "fx-", "fy+", "fy-", "fz_min",
                            "cop_x+", "cop_x-", "cop_y+", "cop_y-", "tz+", "tz-"};
    for (const char* t : tags) cc.labels.push_back(nm + ":" + t);
  }
  return cc;
}

Mat wrench_map_D(const DynamicsQuantities& dq, const Actuation& act) {
  const Mat ms_bar = mbar_s(dq.M_s, act);
  WrenchAlgebra w = build_wrench_algebra(dq, ms_bar);
  return w.gram_llt.solve(w.lambda);
}

Vec wrench_of_torque(const DynamicsQuantities& dq, const Actuation& act, const Vec& u) {
  const Mat ms_bar = mbar_s(dq.M_s, act);
  WrenchAlgebra w = build_wrench_algebra(dq, ms_bar);
  return w.gram_llt.solve(w.jminv_h - w.lambda * u - dq.jdot_nu);
}

Vec6 momentum_rate(const DynamicsQuantities& dq, const Vec& f, double gravity_norm) {
  Vec6 hdot = dq.J_b.transpose() * f;
  hdot(2) -= dq.mass * gravity_norm;
  return hdot;
}

ControllerState momentum_integral_update(const ControllerState& cs, const DynamicsQuantities& dq_s,
                                         const DynamicsQuantities& dq_sd, const Vec& sdot,
                                         const Vec& sdot_d, double dt, double clamp) {
  Vec6 rate;
  rate.head<3>() = dq_s.Jg.topRows<3>() * (sdot - sdot_d);
  rate.tail<3>() = dq_sd.Jg.bottomRows<3>() * (sdot - sdot_d);
  ControllerState out;
  out.i_htilde = cs.i_htilde + dt * rate;
  for (int i = 0; i < 6; ++i) {
    out.i_htilde(i) = std::min(clamp, std::max(-clamp, out.i_htilde(i)));
  }
  return out;
}

Vec solve_redundancy_qp(const Mat& cost_l, const Vec& cost_r, const Vec& cost_base,
                        const ConeConstraints& cones, const Vec& phys_base, const Mat& z,
                        int* iterations) {
  if (z.cols() == 0) {
    // No redundancy to resolve; the constraints must hold at the base point.
    if (cones.a.rows() > 0) {
      const Vec margin = cones.b - cones.a * phys_base;
      int worst = -1;
      double worst_v = -1e-10;
      for (int i = 0; i < margin.size(); ++i) {
        if (margin(i) < worst_v) {
          worst_v = margin(i);
          worst = i;
        }
      }
      if (worst >= 0) {
        throw InfeasibleError("qp infeasible: constraint '" + cones.labels[worst] +
                          "' cannot be satisfied");
      }
    }
    if (iterations) *iterations = 0;
    return Vec::Zero(phys_base.size());
  }

  QpProblem qp;
  const Mat lz = cost_l * z;
  qp.H = lz.transpose() * lz;
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
  qp.g = -lz.transpose() * (cost_r - cost_l * cost_base);
  qp.A = -cones.a * z;
  qp.b = cones.a * phys_base - cones.b;
  qp.labels = cones.labels;

  const QpResult res = solve_qp(qp);
  if (iterations) *iterations = res.iterations;
  return z * res.y;
}

ControlOutput baseline_momentum_controller(const DynamicsQuantities& dq,
                                           const MomentumGains& gains,
                                           const MomentumReference& ref, const Vec6& i_htilde,
                                           const JointReference& jref, const Vec& s,
                                           const Vec& sdot, const ConeConstraints& cones) {
  WrenchAlgebra w = build_wrench_algebra(dq, dq.M_s);

  ControlOutput out;
  out.n_b = w.n_b;
  out.lambda = w.lambda;
  out.n_lambda = w.n_lambda;

  const Vec6 htilde = dq.H - ref.H;
  out.hdot_star = ref.Hdot - gains.kp * htilde - gains.ki * i_htilde;

  const Vec6 grav = gravity_wrench(dq, dq.gravity_norm);
  out.f_m1 = w.jbt_pinv * (out.hdot_star + grav);

  out.u_0 = -gains.postural.kp * (w.n_lambda * (dq.M_s * (s - jref.s))) -
            gains.postural.kd * (w.n_lambda * (dq.M_s * (sdot - jref.sdot)));

  // tau*(f) = c - L f, folding the postural task's wrench dependence in.
  const Mat l = w.lambda_pinv * w.gram + w.n_lambda * dq.J_s.transpose();
  const Vec c = w.lambda_pinv * (w.jminv_h - dq.jdot_nu) + w.n_lambda * (dq.h_s + out.u_0);

  const Vec f0 = solve_redundancy_qp(l, c, out.f_m1, cones, out.f_m1, w.z, &out.qp_iterations);
  out.f = out.f_m1 + f0;
  out.f_m = out.f;
  out.u = c - l * out.f;
  out.u_null = dq.h_s - dq.J_s.transpose() * out.f + out.u_0;
  if (cones.a.rows() > 0) out.cone_margin = cones.b - cones.a * out.f;
  return out;
}

ControlOutput ef_momentum_controller(const DynamicsQuantities& dq, const Actuation& act,
                                     const Mat& kf_bar, const MomentumGains& gains,
                                     const MomentumReference& ref, const Vec6& i_htilde,
                                     const JointReference& jref, const Vec& s, const Vec& sdot,
                                     const ConeConstraints& cones) {
  const Mat ms_bar = mbar_s(dq.M_s, act);
  WrenchAlgebra w = build_wrench_algebra(dq, ms_bar);

  ControlOutput out;
  out.n_b = w.n_b;
  out.lambda = w.lambda;
  out.n_lambda = w.n_lambda;
  out.D = w.gram_llt.solve(w.lambda);

  Mat t = w.jbt * out.D * kf_bar * out.D.transpose() * dq.J_b;
  out.T = 0.5 * (t + t.transpose());

  const Vec6 htilde = dq.H - ref.H;
  out.hdot_star = ref.Hdot - gains.kp * htilde - gains.ki * i_htilde + out.T * ref.H;

  // Friction feedforward uses the velocity split sdot = -D^T J_b Jg sdot
  // + (I + D^T J_b Jg) sdot; only the second part is realized through f_m.
  const Vec split = sdot + out.D.transpose() * (dq.J_b * (dq.Jg * sdot));
  const Vec6 grav = gravity_wrench(dq, dq.gravity_norm);
  out.f_m1 = w.jbt_pinv * (out.hdot_star - w.jbt * (out.D * (kf_bar * split)) + grav);

  out.u_0 = -gains.postural.kp * (w.n_lambda * (ms_bar * (s - jref.s))) -
            gains.postural.kd * (w.n_lambda * (ms_bar * (sdot - jref.sdot)));

  const Vec friction_wrench = out.D * (kf_bar * sdot);
  const Mat l = w.lambda_pinv * w.gram + w.n_lambda * dq.J_s.transpose();
  const Vec c = w.lambda_pinv * (w.jminv_h - dq.jdot_nu) +
                w.n_lambda * (dq.h_s - dq.J_s.transpose() * friction_wrench +
                              kf_bar * jref.sdot + out.u_0);

  const Vec f0 = solve_redundancy_qp(l, c, out.f_m1, cones, out.f_m1 + friction_wrench, w.z,
                                     &out.qp_iterations);
  out.f_m = out.f_m1 + f0;
  out.f = out.f_m + friction_wrench;
  out.u = c - l * out.f_m;
  out.u_null = dq.h_s - dq.J_s.transpose() * out.f + kf_bar * jref.sdot + out.u_0;
  if (cones.a.rows() > 0) out.cone_margin = cones.b - cones.a * out.f;
  return out;
}

}  // namespace frictorq
