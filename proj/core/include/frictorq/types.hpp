#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace frictorq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

// 6-vector layout used everywhere: linear components first, angular second.
// Twists are (v, w), wrenches are (force, moment), momenta are (H_lin, H_ang).

/// Model file could not be parsed or violates a structural invariant.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A linear solve hit a rank or conditioning failure.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The wrench QP constraints admit no solution.
struct InfeasibleError : SolverError {
  using SolverError::SolverError;
};

/// Simulation state exceeded the divergence watchdog.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time = 0.0;
};

}  // namespace frictorq
