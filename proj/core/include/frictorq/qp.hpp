#pragma once

#include <string>
#include <vector>

#include "frictorq/types.hpp"

namespace frictorq {

/// Strictly convex inequality-constrained QP:
///   minimize 0.5 y'H y + g'y   subject to  A y >= b.
/// H must be symmetric positive definite. Row labels are used in
/// diagnostics when the constraints admit no solution.
struct QpProblem {
  Mat H;
  Vec g;
  Mat A;
  Vec b;
  std::vector<std::string> labels;
};

struct QpResult {
  Vec y;
  Vec lambda;                // multipliers, one per constraint row, zero if inactive
  std::vector<int> active;   // indices of rows active at the solution
  int iterations = 0;
};

/// Dual active-set solver. Starts from the unconstrained minimizer, so a
/// problem whose constraints are all satisfied there returns that point
/// exactly after zero iterations. Constraint selection is most-violated
/// first with ties broken by lowest row index, which makes the iteration
/// path deterministic. Throws SolverError on an infeasible constraint set
/// (naming the most violated row) or when the iteration cap is reached.
QpResult solve_qp(const QpProblem& problem);

}  // namespace frictorq
