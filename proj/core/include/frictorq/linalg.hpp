#pragma once

#include "frictorq/types.hpp"

namespace frictorq {

/// Relative singular value cutoff shared by every pseudoinverse in the library.
inline constexpr double kPinvCutoff = 1e-8;

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// sigma_max * kPinvCutoff are treated as zero.
Mat pinv(const Mat& a);

/// Projector onto the null space of a: N = I - pinv(a) * a.
/// N is symmetric and idempotent; a * N vanishes.
Mat nullspace_projector(const Mat& a);

/// Ratio of largest to smallest singular value of a symmetric
/// positive definite matrix. Throws std::invalid_argument otherwise.
double condition_number(const Mat& m);

/// Numerical rank with the same relative cutoff as pinv().
int svd_rank(const Mat& a);

}  // namespace frictorq
