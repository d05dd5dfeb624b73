#pragma once

#include <string>
#include <vector>

#include "frictorq/types.hpp"

namespace frictorq {

/// Fixed transform between two frames (translation + rotation).
struct Transform {
  Vec3 xyz = Vec3::Zero();
  Mat3 rot = Mat3::Identity();
};

/// One rigid body. Inertia is the 3x3 rotational inertia about the link
/// CoM, expressed in the link frame. Units: kg, m, kg m^2.
struct Link {
  std::string name;
  double mass = 0.0;
  Vec3 com = Vec3::Zero();      ///< CoM position in the link frame
  Mat3 inertia = Mat3::Zero();  ///< about the CoM, link frame axes
};

/// Revolute joint. `origin` maps the parent link frame to the joint frame;
/// the child link frame coincides with the joint frame at q = 0 and rotates
/// about `axis` (unit vector, joint frame).
struct Joint {
  std::string name;
  std::string parent;
  std::string child;
  Vec3 axis = Vec3::UnitZ();
  Transform origin;
};

/// Rigid 6D contact. The contact frame is `origin` relative to the link
/// frame; its z axis is the surface normal. `half_extents` are the support
/// rectangle half-sides (x, y) used for the CoP bounds.
struct ContactSpec {
  std::string link;
  Transform origin;
  double half_x = 0.0;  ///< m
  double half_y = 0.0;  ///< m
  double mu = 0.0;      ///< tangential friction coefficient
  double fz_min = 0.0;  ///< minimum normal force, N
};

/// Motor/transmission parameters. Joint positions s relate to motor
/// positions theta through s = gamma * theta. im, kv, kc are diagonal
/// motor-side inertia / viscous / Coulomb matrices; epsilon regularizes
/// the Coulomb sign.
struct Actuation {
  Mat gamma;
  Mat im;
  Mat kv;
  Mat kc;
  double epsilon = 1e-4;
};

struct RobotModel {
  bool floating_base = false;
  double gravity_norm = 9.81;
  std::vector<Link> links;
  std::vector<Joint> joints;
  std::vector<ContactSpec> contacts;
  Actuation actuation;

  // Derived by finalize(); joint and link order follow the file.
  int root_link = -1;
  std::vector<int> joint_parent_link;
  std::vector<int> joint_child_link;
  std::vector<int> link_parent_joint;  ///< -1 for the root
  std::vector<int> joint_order;        ///< parents before children
  double total_mass = 0.0;

  int n_joints() const { return static_cast<int>(joints.size()); }
  int n_contacts() const { return static_cast<int>(contacts.size()); }
  /// Generalized velocity dimension: 6 + n for floating base, n otherwise.
  int n_vel() const { return (floating_base ? 6 : 0) + n_joints(); }

  int link_index(const std::string& name) const;

  /// Rebuild the derived tree data. Throws ModelError on a malformed tree.
  void finalize();
};

/// Parse, finalize and validate a model file. Throws ModelError with the
/// first validation failure if the model is invalid.
RobotModel load_model(const std::string& path);

/// Write the model back out as JSON (lossless round trip).
void save_model(const RobotModel& model, const std::string& path);

/// All invariant violations, empty when the model is well formed.
/// Assumes finalize() succeeded.
std::vector<std::string> validate(const RobotModel& model);

/// rpy -> rotation matrix, R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rpy_to_rot(const Vec3& rpy);

}  // namespace frictorq
