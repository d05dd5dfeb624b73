#include "frictorq/qp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace frictorq {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kViolationTol = 1e-10;

std::string row_label(const QpProblem& p, int row) {
  if (row >= 0 && row < static_cast<int>(p.labels.size())) return p.labels[row];
  return "row " + std::to_string(row);
}

void erase_entry(Vec& v, int idx) {
  Vec tmp(v.size() - 1);
  int w = 0;
  for (int j = 0; j < v.size(); ++j) {
    if (j != idx) tmp(w++) = v(j);
  }
  v = tmp;
}

}  // namespace

QpResult solve_qp(const QpProblem& problem) {
  const int n = static_cast<int>(problem.H.rows());
  const int m = static_cast<int>(problem.A.rows());

  Eigen::LLT<Mat> hllt(problem.H);
  if (hllt.info() != Eigen::Success) throw SolverError("qp: Hessian not positive definite");

  QpResult res;
  res.y = hllt.solve(-problem.g);
  res.lambda = Vec::Zero(m);
  if (m == 0) return res;

  // Columns of ainvh hold H^-1 a_i for each constraint row.
  const Mat ainvh = hllt.solve(problem.A.transpose());

  std::vector<int> active;
  Vec lam_active(0);

  auto violation = [&](int i) { return problem.b(i) - problem.A.row(i).dot(res.y); };

  int iter = 0;
  while (true) {
    int pick = -1;
    double worst = kViolationTol;
    for (int i = 0; i < m; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double v = violation(i);
      if (v > worst) {
        worst = v;
        pick = i;
      }
    }
    if (pick < 0) break;

    double lam_pick = 0.0;
    // Resolve the chosen constraint, dropping blocking active rows as needed.
    while (true) {
      if (++iter > kMaxIterations) throw SolverError("qp: iteration limit reached");

      const int k = static_cast<int>(active.size());
      const Vec ha = ainvh.col(pick);
      Vec r(k);
      Vec z;
      if (k == 0) {
        z = ha;
      } else {
        Mat aw(k, n);
        Mat haw(n, k);
        for (int j = 0; j < k; ++j) {
          aw.row(j) = problem.A.row(active[j]);
          haw.col(j) = ainvh.col(active[j]);
        }
        Mat gram = aw * haw;
        gram = 0.5 * (gram + gram.transpose()).eval();
        r = Eigen::LDLT<Mat>(gram).solve(aw * ha);
        z = ha - haw * r;
      }

      const double denom = problem.A.row(pick).dot(z);
      const double scale = std::max(1.0, problem.A.row(pick).dot(ha));

      // Step bound from active multipliers that the dual step drives down.
      double t1 = std::numeric_limits<double>::infinity();
      int drop = -1;
      for (int j = 0; j < k; ++j) {
        if (r(j) > 1e-14) {
          const double t = lam_active(j) / r(j);
          if (t < t1 - 1e-15) {
            t1 = t;
            drop = j;
          }
        }
      }

      if (denom <= 1e-12 * scale) {
        // New row lies in the span of the active rows. Without a droppable
        // blocker the dual is unbounded and the primal has no feasible point.
        if (drop < 0) {
          throw InfeasibleError("qp infeasible: constraint '" + row_label(problem, pick) +
                            "' cannot be satisfied");
        }
        lam_active -= t1 * r;
        lam_pick += t1;
        erase_entry(lam_active, drop);
        active.erase(active.begin() + drop);
        continue;
      }

      const double t2 = violation(pick) / denom;
      const double t = std::min(t1, t2);
      res.y += t * z;
      if (k > 0) lam_active -= t * r;
      lam_pick += t;

      if (t2 <= t1) {
        active.push_back(pick);
        Vec tmp(lam_active.size() + 1);
        tmp.head(lam_active.size()) = lam_active;
        tmp(lam_active.size()) = lam_pick;
        lam_active = tmp;
        break;
      }

      erase_entry(lam_active, drop);
      active.erase(active.begin() + drop);
    }
  }

  for (int j = 0; j < static_cast<int>(active.size()); ++j) {
    res.lambda(active[j]) = lam_active(j);
  }
  res.active = active;
  std::sort(res.active.begin(), res.active.end());
  res.iterations = iter;
  return res;
}

}  // namespace frictorq
