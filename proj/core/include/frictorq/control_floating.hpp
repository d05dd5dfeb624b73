#pragma once

#include <string>
#include <vector>

#include "frictorq/control_fixed.hpp"
#include "frictorq/dynamics.hpp"
#include "frictorq/friction.hpp"
#include "frictorq/types.hpp"

namespace frictorq {

/// Gains for the centroidal momentum loop plus the postural task.
struct MomentumGains {
  Mat6 kp = Mat6::Zero();
  Mat6 ki = Mat6::Zero();
  JointGains postural;
};

struct MomentumReference {
  Vec6 H = Vec6::Zero();
  Vec6 Hdot = Vec6::Zero();
};

/// Controller memory carried across outer-loop ticks.
struct ControllerState {
  Vec6 i_htilde = Vec6::Zero();
};

/// Stacked linear inequalities A f <= b on the physical contact wrenches,
/// one labeled row per facet.
struct ConeConstraints {
  Mat a;
  Vec b;
  std::vector<std::string> labels;
};

struct ControlOutput {
  Vec u;           ///< joint torque command (u* or tau*)
  Vec f;           ///< physical contact wrench stack
  Vec f_m;         ///< modified wrench the torque command realizes (= f for baseline)
  Vec f_m1;        ///< particular wrench before the null-space correction
  Mat D;           ///< torque-to-wrench sensitivity, empty for baseline
  Mat6 T = Mat6::Zero();
  Mat n_b;         ///< projector onto null(J_b^T)
  Mat lambda;      ///< J_s Ms^-1 (Ms_bar for the EF law)
  Mat n_lambda;    ///< projector onto null(lambda)
  Vec u_null;
  Vec u_0;
  Vec6 hdot_star = Vec6::Zero();
  Vec cone_margin;  ///< b - A f at the returned wrench, non-negative when satisfied
  int qp_iterations = 0;
};

/// Per-contact linearized friction pyramid, minimum normal force, center of
/// pressure rectangle, and torsional moment bound, assembled in the contact
/// frame and expressed on world-frame wrenches.
ConeConstraints friction_cone_constraints(const RobotModel& model,
                                          const std::vector<LinkPose>& contact_poses);

/// Wrench sensitivity of the constrained joint accelerations:
///   D = (J Mbar^-1 J^T)^-1 J Mbar^-1 B.
/// Returned together with the Gram matrix factor pieces the controllers reuse.
Mat wrench_map_D(const DynamicsQuantities& dq, const Actuation& act);

/// Modified wrench produced by a torque command u at the current state,
///   f_m(u) = (J Mbar^-1 J^T)^-1 (J Mbar^-1 (h - B u) - Jdot nu).
Vec wrench_of_torque(const DynamicsQuantities& dq, const Actuation& act, const Vec& u);

/// Momentum rate under contact wrenches f: Hdot = J_b^T f - m g e3.
Vec6 momentum_rate(const DynamicsQuantities& dq, const Vec& f, double gravity_norm);

/// Integral-error update. The linear rows of the momentum map are evaluated
/// at the measured configuration and the angular rows at the reference
/// configuration, which needs a second dynamics evaluation from the caller.
ControllerState momentum_integral_update(const ControllerState& cs, const DynamicsQuantities& dq_s,
                                         const DynamicsQuantities& dq_sd, const Vec& sdot,
                                         const Vec& sdot_d, double dt, double clamp);

/// Classical momentum controller: PI momentum loop, wrench QP minimizing
/// |tau*|^2 over the contact null space, postural task in the torque null
/// space. Friction is left to the motor-side inner loop.
ControlOutput baseline_momentum_controller(const DynamicsQuantities& dq,
                                           const MomentumGains& gains,
                                           const MomentumReference& ref, const Vec6& i_htilde,
                                           const JointReference& jref, const Vec& s,
                                           const Vec& sdot, const ConeConstraints& cones);

/// Friction-exploiting momentum controller. The gearbox friction enters the
/// momentum loop as the damping term T = J_b^T D Kf_bar D^T J_b, and the
/// torque command is built from the modified wrench f_m so that the physical
/// wrench f = f_m + D Kf_bar sdot stays inside the cones.
ControlOutput ef_momentum_controller(const DynamicsQuantities& dq, const Actuation& act,
                                     const Mat& kf_bar, const MomentumGains& gains,
                                     const MomentumReference& ref, const Vec6& i_htilde,
                                     const JointReference& jref, const Vec& s, const Vec& sdot,
                                     const ConeConstraints& cones);

/// Shared redundancy resolution: minimize |cost_r - cost_l (cost_base + w)|^2
/// over w in null(J_b^T) spanned by the orthonormal columns of z, subject to
/// cone rows evaluated on phys_base + w. Returns w.
Vec solve_redundancy_qp(const Mat& cost_l, const Vec& cost_r, const Vec& cost_base,
                        const ConeConstraints& cones, const Vec& phys_base, const Mat& z,
                        int* iterations);

}  // namespace frictorq
