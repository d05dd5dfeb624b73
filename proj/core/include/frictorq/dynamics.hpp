#pragma once

#include <vector>

#include "frictorq/model.hpp"
#include "frictorq/state.hpp"
#include "frictorq/types.hpp"

namespace frictorq {

struct LinkPose {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
};

/// World pose of every link, indexed like model.links.
std::vector<LinkPose> forward_kinematics(const RobotModel& model, const RobotState& state);

/// World poses of the contact frames, indexed like model.contacts.
std::vector<LinkPose> contact_poses(const RobotModel& model, const RobotState& state);

/// Everything the controllers and the simulator need at one state, expressed
/// in coordinates where the mass matrix is blockdiag(M_b, M_s):
///   M_b pairs with v_b = (com velocity, locked angular velocity), so the
///   centroidal momentum is H = M_b v_b and the top-left 3x3 of M_b is m*I.
///   M_s is the joint-space mass matrix with the base coupling eliminated.
/// Contact Jacobian rows are (point velocity, angular velocity) per contact,
/// split into base columns J_b and joint columns J_s. All 6-vectors are
/// (linear, angular).
struct DynamicsQuantities {
  Mat6 M_b = Mat6::Zero();
  Mat M_s;
  Vec6 h_b = Vec6::Zero();
  Vec h_s;
  Mat J_b;      ///< 6 n_c x 6
  Mat J_s;      ///< 6 n_c x n
  Vec jdot_nu;  ///< 6 n_c, contact-frame acceleration at zero nudot
  Mat Jg;       ///< 6 x n, momentum map: H = Jg * sdot when contacts pin the base
  Vec6 H = Vec6::Zero();

  bool floating = false;
  double mass = 0.0;
  double gravity_norm = 9.81;
  Vec3 com = Vec3::Zero();
  Vec3 com_vel = Vec3::Zero();
  Mat Ts;                 ///< 6 x n block coupling sdot into the base velocity
  Vec6 base_twist = Vec6::Zero();  ///< base spatial twist at the world origin
  std::vector<LinkPose> link_poses;
  std::vector<LinkPose> contact_poses;

  /// Stacked bias (h_b; h_s) for floating base, h_s alone otherwise.
  Vec h_full(bool floating) const;
  /// Stacked contact Jacobian [J_b J_s] (floating) or J_s (fixed).
  Mat J_full(bool floating) const;
};

DynamicsQuantities compute_dynamics(const RobotModel& model, const RobotState& state);

/// J * nudot + jdot_nu: the contact-frame acceleration produced by nudot.
Vec contact_constraint_residual(const DynamicsQuantities& dq, const Vec& nudot);

/// Reference pose a contact is welded to (for constraint stabilization).
struct ContactRef {
  Vec3 p = Vec3::Zero();
  Mat3 R = Mat3::Identity();
};

struct ForwardDynamicsResult {
  Vec nudot;  ///< (vdot_b; sddot) for floating base, sddot otherwise
  Vec f;      ///< stacked contact wrenches, 6 per contact
};

/// Constrained forward dynamics of the friction-loaded plant:
///   Mbar nudot + h = J^T f + B u - B Kf_bar(sdot) sdot
/// with Mbar including the reflected motor inertia. Contact accelerations are
/// driven to -2 alpha (J nu) - alpha^2 e instead of zero, where e is the pose
/// drift relative to `refs` (current poses when refs is null, making e = 0).
ForwardDynamicsResult forward_dynamics_constrained(
    const RobotModel& model, const RobotState& state, const Vec& u,
    const std::vector<ContactRef>* refs = nullptr, double baumgarte_alpha = 10.0);

/// Same, reusing an already computed dq for this state.
ForwardDynamicsResult forward_dynamics_constrained(
    const RobotModel& model, const DynamicsQuantities& dq, const RobotState& state, const Vec& u,
    const std::vector<ContactRef>* refs = nullptr, double baumgarte_alpha = 10.0);

/// Base twist at the world origin recovered from the centroidal state
/// velocities; needed to integrate the base pose.
Vec6 base_twist_from_state(const DynamicsQuantities& dq, const RobotState& state);

}  // namespace frictorq
