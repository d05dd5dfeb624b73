#include "frictorq/control_fixed.hpp"

namespace frictorq {

Vec ef_fixed_control(const DynamicsQuantities& dq, const Actuation& act, const Mat& kf_bar,
                     const JointReference& ref, const Vec& s, const Vec& sdot,
                     const JointGains& gains) {
  const Mat ms_bar = mbar_s(dq.M_s, act);
  return dq.h_s + ms_bar * ref.sddot - gains.kp * (s - ref.s) - gains.kd * (sdot - ref.sdot) +
         kf_bar * ref.sdot;
}

Vec baseline_fixed_control(const DynamicsQuantities& dq, const Actuation& act,
                           const JointReference& ref, const Vec& s, const Vec& sdot,
                           const JointGains& gains) {
  const Mat ms_bar = mbar_s(dq.M_s, act);
  return dq.h_s + ms_bar * ref.sddot - gains.kp * (s - ref.s) - gains.kd * (sdot - ref.sdot);
}

Vec family_control(const DynamicsQuantities& dq, const Actuation& act, const Mat& kf_bar,
                   const JointReference& ref, const Vec& s, const Vec& sdot, const Mat& kp,
                   const Mat& k) {
  const Mat ms_bar = mbar_s(dq.M_s, act);
  return dq.h_s + ms_bar * ref.sddot - kp * (s - ref.s) - k * (sdot - ref.sdot) + kf_bar * sdot;
}

double sensitivity_norm(const Mat& k, const Mat& kf_bar) {
  return (kf_bar - k).squaredNorm();
}

}  // namespace frictorq
