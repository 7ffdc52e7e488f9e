#ifndef GNR_LINPROG_HPP_
#define GNR_LINPROG_HPP_

#include "gnr/common.hpp"

namespace gnr {

// Dense LP in minimization canonical form:
//   minimize objective . x   subject to   ineq * x <= rhs,  lower <= x <= upper.
// lower/upper may be empty (no bounds) or contain +-inf entries.
struct LpProblem {
  Vec objective;  // m
  Mat ineq;       // k x m
  Vec rhs;        // k
  Vec lower;      // m or empty
  Vec upper;      // m or empty

  Index n_vars() const { return objective.size(); }
  Index n_rows() const { return ineq.rows(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOutcome {
  LpStatus status = LpStatus::Optimal;
  double value = 0.0;   // objective at witness (meaningful when Optimal)
  Vec witness;          // Optimal: optimizer; Infeasible: least-infeasible point
  double max_residual = 0.0;  // max constraint/bound violation at witness
  int iterations = 0;
};

// Two-phase bounded-variable simplex. Dantzig pricing with a switch to
// Bland's rule after 5*(k+m) iterations. Deterministic for fixed inputs.
LpOutcome lp_solve(const LpProblem& p);

// Convenience: minimize c.x subject to A x <= b and optional bounds.
LpOutcome lp_minimize(const Vec& c, const Mat& A, const Vec& b,
                      const Vec& lb = Vec(), const Vec& ub = Vec());

}  // namespace gnr

#endif  // GNR_LINPROG_HPP_
