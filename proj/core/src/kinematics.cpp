#include <cmath>

#include "frictorq/dynamics.hpp"
#include "frictorq/spatial.hpp"

namespace frictorq {

Vec3 rotation_log(const Mat3& r) {
  const double tr = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double angle = std::acos(tr);
  if (angle < 1e-12) return Vec3::Zero();
  Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = axis.norm();
  if (s < 1e-12) {
    // Near pi: fall back to the dominant diagonal column.
    Mat3 a = 0.5 * (r + Mat3::Identity());
    int k;
    a.diagonal().maxCoeff(&k);
    Vec3 v = a.col(k) / std::sqrt(a(k, k));
    return angle * v.normalized();
  }
  return (angle / s) * axis;
}

Quat quat_exp(const Vec3& w) {
  const double a = w.norm();
  if (a < 1e-16) return Quat(1.0, 0.5 * w(0), 0.5 * w(1), 0.5 * w(2));
  const double c = std::cos(0.5 * a), s = std::sin(0.5 * a) / a;
  return Quat(c, s * w(0), s * w(1), s * w(2));
}

Quat quat_derivative(const Quat& q, const Vec3& omega_world) {
  const Quat w(0.0, omega_world(0), omega_world(1), omega_world(2));
  Quat d = w * q;
  return Quat(0.5 * d.w(), 0.5 * d.x(), 0.5 * d.y(), 0.5 * d.z());
}

std::vector<LinkPose> forward_kinematics(const RobotModel& model, const RobotState& state) {
  std::vector<LinkPose> poses(model.links.size());
  LinkPose& root = poses[model.root_link];
  if (model.floating_base) {
    root.R = state.base_quat.toRotationMatrix();
    root.p = state.base_pos;
  }
  for (int j : model.joint_order) {
    const Joint& jnt = model.joints[j];
    const LinkPose& par = poses[model.joint_parent_link[j]];
    LinkPose& child = poses[model.joint_child_link[j]];
    const Mat3 r_joint = par.R * jnt.origin.rot;
    child.p = par.p + par.R * jnt.origin.xyz;
    child.R = r_joint * Eigen::AngleAxisd(state.s(j), jnt.axis).toRotationMatrix();
  }
  return poses;
}

std::vector<LinkPose> contact_poses(const RobotModel& model, const RobotState& state) {
  const auto poses = forward_kinematics(model, state);
  std::vector<LinkPose> out(model.contacts.size());
  for (size_t k = 0; k < model.contacts.size(); ++k) {
    const ContactSpec& c = model.contacts[k];
    const LinkPose& lp = poses[model.link_index(c.link)];
    out[k].R = lp.R * c.origin.rot;
    out[k].p = lp.p + lp.R * c.origin.xyz;
  }
  return out;
}

}  // namespace frictorq
