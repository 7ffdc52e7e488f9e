#include "gnr/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace gnr {

namespace {

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

// Bounded-variable simplex over the system [A | I] x = b with per-variable
// bounds. Structural variables come first, then one slack per row, then any
// phase-1 artificials (column -e_i). The basis inverse is kept explicitly and
// refreshed by LU factorization every kRefactorEvery pivots.
class Simplex {
 public:
  Simplex(const Mat& A, const Vec& b, const Vec& lb, const Vec& ub)
      : k_(A.rows()), m_(A.cols()) {
    n_ = m_ + k_;
    cols_.resize(k_, n_);
    cols_.leftCols(m_) = A;
    cols_.rightCols(k_) = Mat::Identity(k_, k_);
    lo_ = Vec::Constant(n_, -kInf);
    hi_ = Vec::Constant(n_, kInf);
    lo_.head(m_) = lb;
    hi_.head(m_) = ub;
    lo_.tail(k_).setZero();  // slacks in [0, inf)
    state_.assign(static_cast<size_t>(n_), VarState::AtLower);
    xval_ = Vec::Zero(n_);
    rhs_ = b;

    // Nonbasic structural variables start at a finite bound (or 0 if free).
    for (Index j = 0; j < m_; ++j) {
      if (std::isfinite(lo_[j])) {
        state_[j] = VarState::AtLower;
        xval_[j] = lo_[j];
      } else if (std::isfinite(hi_[j])) {
        state_[j] = VarState::AtUpper;
        xval_[j] = hi_[j];
      } else {
        state_[j] = VarState::FreeZero;
        xval_[j] = 0.0;
      }
    }

    Vec residual = b - cols_.leftCols(m_) * xval_.head(m_);
    basis_.resize(static_cast<size_t>(k_));
    std::vector<Index> art_rows;
    for (Index i = 0; i < k_; ++i) {
      if (residual[i] >= 0.0) {
        basis_[static_cast<size_t>(i)] = m_ + i;
        state_[static_cast<size_t>(m_ + i)] = VarState::Basic;
        xval_[m_ + i] = residual[i];
      } else {
        art_rows.push_back(i);
      }
    }
    if (!art_rows.empty()) {
      Index na = static_cast<Index>(art_rows.size());
      Mat wide(k_, n_ + na);
      wide.leftCols(n_) = cols_;
      wide.rightCols(na).setZero();
      lo_.conservativeResize(n_ + na);
      hi_.conservativeResize(n_ + na);
      xval_.conservativeResize(n_ + na);
      for (Index a = 0; a < na; ++a) {
        Index row = art_rows[static_cast<size_t>(a)];
        wide(row, n_ + a) = -1.0;
        lo_[n_ + a] = 0.0;
        hi_[n_ + a] = kInf;
        xval_[n_ + a] = -residual[row];
        state_.push_back(VarState::Basic);
        basis_[static_cast<size_t>(row)] = n_ + a;
        // The displaced slack stays nonbasic at zero.
        state_[static_cast<size_t>(m_ + row)] = VarState::AtLower;
        xval_[m_ + row] = 0.0;
      }
      cols_ = std::move(wide);
      first_artificial_ = n_;
      n_ += na;
    }
    binv_ = basis_matrix_inverse();
  }

  bool has_artificials() const { return first_artificial_ >= 0; }

  // Freeze artificials at zero before phase 2.
  void freeze_artificials() {
    if (first_artificial_ < 0) return;
    for (Index j = first_artificial_; j < n_; ++j) {
      hi_[j] = 0.0;
      if (state_[static_cast<size_t>(j)] != VarState::Basic) {
        state_[static_cast<size_t>(j)] = VarState::AtLower;
        xval_[j] = 0.0;
      }
    }
  }

  struct RunResult {
    bool unbounded = false;
    int iterations = 0;
  };

  // Minimize cost over the current basis; cost has one entry per column.
  RunResult run(const Vec& cost) {
    const Index total = n_;
    const long bland_after = 5 * (k_ + m_);
    const long iter_limit = 200 * (k_ + m_) + 10000;
    RunResult res;
    int since_refactor = 0;

    for (long iter = 0; iter < iter_limit; ++iter) {
      const bool bland = iter >= bland_after;
      Vec cb(k_);
      for (Index i = 0; i < k_; ++i) cb[i] = cost[basis_[static_cast<size_t>(i)]];
      Vec y = binv_.transpose() * cb;

      Index enter = -1;
      int dir = 0;
      double best_score = kLpPivotTol * 10.0;
      for (Index j = 0; j < total; ++j) {
        VarState st = state_[static_cast<size_t>(j)];
        if (st == VarState::Basic) continue;
        if (lo_[j] == hi_[j]) continue;  // frozen
        double rc = cost[j] - y.dot(cols_.col(j));
        int d = 0;
        if (st == VarState::AtLower && rc < -kLpFeasTol) d = 1;
        else if (st == VarState::AtUpper && rc > kLpFeasTol) d = -1;
        else if (st == VarState::FreeZero && std::abs(rc) > kLpFeasTol)
          d = rc < 0 ? 1 : -1;
        if (d == 0) continue;
        if (bland) {
          enter = j;
          dir = d;
          break;
        }
        if (std::abs(rc) > best_score) {
          best_score = std::abs(rc);
          enter = j;
          dir = d;
        }
      }
      if (enter < 0) {
        res.iterations = static_cast<int>(iter);
        refresh_values();
        return res;  // optimal for this cost
      }

      Vec d_col = binv_ * cols_.col(enter);

      // Ratio test. t is the nonnegative displacement of the entering
      // variable along dir; basic variable i moves by -dir * d_col[i] * t.
      double t_best = kInf;
      Index leave_row = -1;
      bool leave_at_upper = false;
      double self_range = hi_[enter] - lo_[enter];  // may be inf
      bool self_blocks = std::isfinite(self_range);
      if (self_blocks) t_best = self_range;

      double best_pivot_mag = 0.0;
      for (Index i = 0; i < k_; ++i) {
        double delta = dir * d_col[i];
        Index bv = basis_[static_cast<size_t>(i)];
        double t_i;
        bool at_upper;
        if (delta > kLpPivotTol) {
          if (!std::isfinite(lo_[bv])) continue;
          t_i = (xval_[bv] - lo_[bv]) / delta;
          at_upper = false;
        } else if (delta < -kLpPivotTol) {
          if (!std::isfinite(hi_[bv])) continue;
          t_i = (xval_[bv] - hi_[bv]) / delta;
          at_upper = true;
        } else {
          continue;
        }
        if (t_i < 0.0) t_i = 0.0;
        bool take;
        if (t_i < t_best - 1e-12) {
          take = true;
        } else if (t_i <= t_best + 1e-12 && leave_row >= 0) {
          if (bland) {
            take = basis_[static_cast<size_t>(i)] <
                   basis_[static_cast<size_t>(leave_row)];
          } else {
            take = std::abs(delta) > best_pivot_mag;
          }
        } else {
          take = false;
        }
        if (take) {
          t_best = std::min(t_best, t_i);
          leave_row = i;
          leave_at_upper = at_upper;
          best_pivot_mag = std::abs(delta);
        }
      }

      if (!std::isfinite(t_best)) {
        res.unbounded = true;
        res.iterations = static_cast<int>(iter);
        refresh_values();
        return res;
      }

      if (leave_row < 0) {
        // Bound flip: the entering variable runs to its opposite bound.
        for (Index i = 0; i < k_; ++i) {
          Index bv = basis_[static_cast<size_t>(i)];
          xval_[bv] -= dir * d_col[i] * t_best;
        }
        xval_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
        state_[static_cast<size_t>(enter)] =
            dir > 0 ? VarState::AtUpper : VarState::AtLower;
      } else {
        double piv = d_col[leave_row];
        if (std::abs(piv) < kLpPivotTol) {
          throw SolverError("lp_solve: numerically degenerate pivot");
        }
        for (Index i = 0; i < k_; ++i) {
          Index bv = basis_[static_cast<size_t>(i)];
          xval_[bv] -= dir * d_col[i] * t_best;
        }
        Index leaving = basis_[static_cast<size_t>(leave_row)];
        xval_[leaving] = leave_at_upper ? hi_[leaving] : lo_[leaving];
        state_[static_cast<size_t>(leaving)] =
            leave_at_upper ? VarState::AtUpper : VarState::AtLower;
        xval_[enter] = xval_[enter] + dir * t_best;
        state_[static_cast<size_t>(enter)] = VarState::Basic;
        basis_[static_cast<size_t>(leave_row)] = enter;

        binv_.row(leave_row) /= piv;
        for (Index i = 0; i < k_; ++i) {
          if (i == leave_row) continue;
          binv_.row(i) -= d_col[i] * binv_.row(leave_row);
        }
        if (++since_refactor >= kRefactorEvery) {
          binv_ = basis_matrix_inverse();
          refresh_values();
          since_refactor = 0;
        }
      }
    }
    throw SolverError("lp_solve: iteration limit exceeded (degenerate problem)");
  }

  Vec structural() const { return xval_.head(m_); }

  double value_of(const Vec& cost) const {
    double v = 0;
    for (Index j = 0; j < n_; ++j) v += cost[j] * xval_[j];
    return v;
  }

  Index total_vars() const { return n_; }
  Index first_artificial() const { return first_artificial_; }

 private:
  Mat basis_matrix_inverse() const {
    if (k_ == 0) return Mat(0, 0);
    Mat B(k_, k_);
    for (Index i = 0; i < k_; ++i)
      B.col(i) = cols_.col(basis_[static_cast<size_t>(i)]);
    Eigen::FullPivLU<Mat> lu(B);
    if (!lu.isInvertible()) {
      throw SolverError("lp_solve: singular basis matrix");
    }
    return lu.inverse();
  }

  // Recompute basic values from nonbasic ones to kill accumulated drift.
  void refresh_values() {
    Vec r = rhs_;
    for (Index j = 0; j < n_; ++j) {
      if (state_[static_cast<size_t>(j)] == VarState::Basic) continue;
      if (xval_[j] != 0.0) r -= cols_.col(j) * xval_[j];
    }
    Vec xb = binv_ * r;
    for (Index i = 0; i < k_; ++i) xval_[basis_[static_cast<size_t>(i)]] = xb[i];
  }

  static constexpr int kRefactorEvery = 64;

  Index k_;  // rows
  Index m_;  // structural variables
  Index n_;  // total columns
  Index first_artificial_ = -1;
  Mat cols_;
  Vec lo_, hi_, xval_, rhs_;
  std::vector<VarState> state_;
  std::vector<Index> basis_;
  Mat binv_;
};

double residual_at(const LpProblem& p, const Vec& x) {
  double r = 0.0;
  if (p.n_rows() > 0) {
    Vec s = p.ineq * x - p.rhs;
    r = std::max(r, s.maxCoeff());
  }
  for (Index j = 0; j < p.n_vars(); ++j) {
    if (p.lower.size() > 0 && std::isfinite(p.lower[j]))
      r = std::max(r, p.lower[j] - x[j]);
    if (p.upper.size() > 0 && std::isfinite(p.upper[j]))
      r = std::max(r, x[j] - p.upper[j]);
  }
  return std::max(r, 0.0);
}

}  // namespace

LpOutcome lp_solve(const LpProblem& p) {
  const Index m = p.n_vars();
  const Index k = p.n_rows();
  if (m < 1) throw DimensionError("lp_solve: at least one variable required");
  if (p.ineq.cols() != m && k > 0)
    throw DimensionError("lp_solve: constraint matrix width mismatch");
  if (p.rhs.size() != k)
    throw DimensionError("lp_solve: rhs length mismatch");
  check_finite(p.objective, "lp_solve objective");
  if (k > 0) {
    check_finite(p.ineq, "lp_solve constraints");
    check_finite(p.rhs, "lp_solve rhs");
  }
  Vec lb = p.lower.size() > 0 ? p.lower : Vec::Constant(m, -kInf);
  Vec ub = p.upper.size() > 0 ? p.upper : Vec::Constant(m, kInf);
  if (lb.size() != m || ub.size() != m)
    throw DimensionError("lp_solve: bound length mismatch");
  for (Index j = 0; j < m; ++j) {
    if (lb[j] > ub[j])
      throw DimensionError("lp_solve: lower bound exceeds upper bound");
  }

  Simplex sx(k > 0 ? p.ineq : Mat(0, m), p.rhs, lb, ub);

  LpOutcome out;
  if (sx.has_artificials()) {
    Vec cost1 = Vec::Zero(sx.total_vars());
    for (Index j = sx.first_artificial(); j < sx.total_vars(); ++j) cost1[j] = 1.0;
    auto r1 = sx.run(cost1);
    out.iterations += r1.iterations;
    double infeas = sx.value_of(cost1);
    if (infeas > kLpFeasTol) {
      out.status = LpStatus::Infeasible;
      out.witness = sx.structural();
      out.value = p.objective.dot(out.witness);
      out.max_residual = residual_at(p, out.witness);
      return out;
    }
    sx.freeze_artificials();
  }

  Vec cost2 = Vec::Zero(sx.total_vars());
  cost2.head(m) = p.objective;
  auto r2 = sx.run(cost2);
  out.iterations += r2.iterations;
  out.witness = sx.structural();
  out.max_residual = residual_at(p, out.witness);
  if (r2.unbounded) {
    out.status = LpStatus::Unbounded;
    return out;
  }
  out.status = LpStatus::Optimal;
  out.value = p.objective.dot(out.witness);
  return out;
}

LpOutcome lp_minimize(const Vec& c, const Mat& A, const Vec& b,
                      const Vec& lb, const Vec& ub) {
  LpProblem p;
  p.objective = c;
  p.ineq = A;
  p.rhs = b;
  p.lower = lb;
  p.upper = ub;
  return lp_solve(p);
}

}  // namespace gnr
