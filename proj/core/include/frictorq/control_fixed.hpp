#pragma once

#include "frictorq/dynamics.hpp"
#include "frictorq/friction.hpp"
#include "frictorq/types.hpp"

namespace frictorq {

/// Symmetric positive definite joint-space gain pair.
struct JointGains {
  Mat kp;
  Mat kd;
};

/// Joint-space reference trajectory sample.
struct JointReference {
  Vec s;
  Vec sdot;
  Vec sddot;
};

/// Friction-exploiting tracking law for fixed-base models:
///   u = h_s + Ms_bar sddot_d - Kp (s - s_d) - Kd (sdot - sdot_d) + Kf_bar sdot_d.
/// kf_bar is evaluated at the measured velocity by the caller but multiplies
/// the reference velocity, so measurement noise does not enter this term.
Vec ef_fixed_control(const DynamicsQuantities& dq, const Actuation& act, const Mat& kf_bar,
                     const JointReference& ref, const Vec& s, const Vec& sdot,
                     const JointGains& gains);

/// Classical computed-torque law; friction is left to the motor-side loop.
///   tau = h_s + Ms_bar sddot_d - Kp (s - s_d) - Kd (sdot - sdot_d).
Vec baseline_fixed_control(const DynamicsQuantities& dq, const Actuation& act,
                           const JointReference& ref, const Vec& s, const Vec& sdot,
                           const JointGains& gains);

/// One member of the stabilizing family parameterized by the velocity gain K:
///   u = h_s + Ms_bar sddot_d - Kp (s - s_d) - K (sdot - sdot_d) + Kf_bar sdot.
Vec family_control(const DynamicsQuantities& dq, const Actuation& act, const Mat& kf_bar,
                   const JointReference& ref, const Vec& s, const Vec& sdot, const Mat& kp,
                   const Mat& k);

/// Squared Frobenius norm of the velocity sensitivity of the family law's
/// friction-dependent part: |Kf_bar - K|_F^2. Zero exactly at K = Kf_bar.
double sensitivity_norm(const Mat& k, const Mat& kf_bar);

}  // namespace frictorq
