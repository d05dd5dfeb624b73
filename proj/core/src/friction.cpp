#include "frictorq/friction.hpp"

namespace frictorq {

namespace {
Mat gamma_inverse(const Actuation& act) {
  Eigen::PartialPivLU<Mat> lu(act.gamma);
  return lu.inverse();
}
}  // namespace

Mat friction_matrix(const Actuation& act, const Vec& sdot) {
  const int n = static_cast<int>(act.gamma.rows());
  const Vec theta_dot = gamma_inverse(act) * sdot;
  Mat kf = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    kf(i, i) = act.kv(i, i) + act.kc(i, i) / (std::abs(theta_dot(i)) + act.epsilon);
  return kf;
}

Mat coupled_friction(const Actuation& act, const Mat& kf) {
  const Mat gi = gamma_inverse(act);
  const Mat m = gi.transpose() * kf * gi;
  return 0.5 * (m + m.transpose());
}

Mat reflected_inertia(const Actuation& act) {
  const Mat gi = gamma_inverse(act);
  const Mat m = gi.transpose() * act.im * gi;
  return 0.5 * (m + m.transpose());
}

Mat mbar_s(const Mat& m_s, const Actuation& act) {
  return m_s + reflected_inertia(act);
}

FrictionQuantities friction_quantities(const Actuation& act, const Vec& sdot) {
  FrictionQuantities fq;
  fq.kf = friction_matrix(act, sdot);
  fq.kf_bar = coupled_friction(act, fq.kf);
  return fq;
}

}  // namespace frictorq
