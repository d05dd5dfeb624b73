#include "frictorq/linalg.hpp"

#include <Eigen/SVD>

namespace frictorq {

Mat pinv(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return Mat::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double tol = sv.size() > 0 ? sv(0) * kPinvCutoff : 0.0;
  Vec inv = Vec::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Mat nullspace_projector(const Mat& a) {
  const Mat n = Mat::Identity(a.cols(), a.cols()) - pinv(a) * a;
  // Symmetrize: pinv(a)*a is symmetric in exact arithmetic.
  return 0.5 * (n + n.transpose());
}

double condition_number(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("condition_number: matrix must be square and non-empty");
  if (!m.isApprox(m.transpose(), 1e-10))
    throw std::invalid_argument("condition_number: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  if (ev(0) <= 0.0)
    throw std::invalid_argument("condition_number: matrix not positive definite");
  return ev(ev.size() - 1) / ev(0);
}

int svd_rank(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  const double tol = sv(0) * kPinvCutoff;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++r;
  return r;
}

}  // namespace frictorq
