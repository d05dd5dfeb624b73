#pragma once

#include "frictorq/model.hpp"
#include "frictorq/types.hpp"

namespace frictorq {

/// Full robot state. For a floating-base model the base velocity is
/// v_b = (com velocity, locked angular velocity); together with sdot it
/// pairs with the block-diagonal mass matrix of DynamicsQuantities.
/// Fixed-base models keep the base fields at identity / zero.
struct RobotState {
  Vec3 base_pos = Vec3::Zero();
  Quat base_quat = Quat::Identity();
  Vec s;
  Vec6 v_b = Vec6::Zero();
  Vec sdot;

  static RobotState zero(const RobotModel& model) {
    RobotState st;
    st.s = Vec::Zero(model.n_joints());
    st.sdot = Vec::Zero(model.n_joints());
    return st;
  }
};

}  // namespace frictorq
