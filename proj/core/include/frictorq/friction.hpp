#pragma once

#include "frictorq/linalg.hpp"
#include "frictorq/model.hpp"
#include "frictorq/types.hpp"

namespace frictorq {

/// Diagonal motor-side friction matrix evaluated at joint velocity sdot:
///   kf_i = kv_i + kc_i / (|theta_dot_i| + epsilon),  theta_dot = gamma^-1 sdot.
/// Multiplying kf_i by theta_dot_i reproduces viscous plus regularized
/// Coulomb friction exactly.
Mat friction_matrix(const Actuation& act, const Vec& sdot);

/// Joint-side image of a motor-side matrix: gamma^-T Kf gamma^-1 (symmetrized).
Mat coupled_friction(const Actuation& act, const Mat& kf);

/// Motor inertia seen from the joint side: gamma^-T Im gamma^-1.
Mat reflected_inertia(const Actuation& act);

/// Joint-space mass matrix with the reflected motor inertia folded in.
Mat mbar_s(const Mat& m_s, const Actuation& act);

/// Friction quantities most callers want together.
struct FrictionQuantities {
  Mat kf;      ///< motor side, diagonal
  Mat kf_bar;  ///< joint side, symmetric
};

FrictionQuantities friction_quantities(const Actuation& act, const Vec& sdot);

}  // namespace frictorq
