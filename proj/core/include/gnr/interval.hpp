#ifndef GNR_INTERVAL_HPP_
#define GNR_INTERVAL_HPP_

#include <algorithm>
#include <cmath>

#include "gnr/common.hpp"

namespace gnr {

// Entrywise interval matrix [lo, hi]. Just the operations the Lagrange
// remainder bound needs; not a general interval library.
struct IntervalMat {
  Mat lo;
  Mat hi;

  IntervalMat() = default;
  IntervalMat(Mat l, Mat h) : lo(std::move(l)), hi(std::move(h)) {
    check_dims(lo.rows() == hi.rows() && lo.cols() == hi.cols(),
               "IntervalMat: shape mismatch");
  }
  static IntervalMat exact(const Mat& m) { return IntervalMat(m, m); }

  Index rows() const { return lo.rows(); }
  Index cols() const { return lo.cols(); }

  bool contains(const Mat& m, double tol = 0.0) const {
    return ((m - lo).array() >= -tol).all() && ((hi - m).array() >= -tol).all();
  }
};

struct IntervalVec {
  Vec lo;
  Vec hi;

  IntervalVec() = default;
  IntervalVec(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
    check_dims(lo.size() == hi.size(), "IntervalVec: length mismatch");
  }
  static IntervalVec exact(const Vec& v) { return IntervalVec(v, v); }

  Index size() const { return lo.size(); }
  Vec mid() const { return 0.5 * (lo + hi); }
  Vec rad() const { return 0.5 * (hi - lo); }
};

inline IntervalVec operator+(const IntervalVec& a, const IntervalVec& b) {
  return IntervalVec(a.lo + b.lo, a.hi + b.hi);
}

inline IntervalVec operator+(const IntervalVec& a, const Vec& b) {
  return IntervalVec(a.lo + b, a.hi + b);
}

inline IntervalVec operator-(const IntervalVec& a, const Vec& b) {
  return IntervalVec(a.lo - b, a.hi - b);
}

// Point matrix times interval vector.
inline IntervalVec mat_ivec(const Mat& W, const IntervalVec& v) {
  Mat wp = W.cwiseMax(0.0), wn = W.cwiseMin(0.0);
  return IntervalVec(wp * v.lo + wn * v.hi, wp * v.hi + wn * v.lo);
}

inline IntervalMat operator-(const IntervalMat& a, const Mat& b) {
  return IntervalMat(a.lo - b, a.hi - b);
}

// Interval matrix product, entrywise min/max over the four products.
inline IntervalMat imat_mul(const IntervalMat& a, const IntervalMat& b) {
  check_dims(a.cols() == b.rows(), "imat_mul: inner dimension mismatch");
  Mat lo = Mat::Zero(a.rows(), b.cols());
  Mat hi = Mat::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double accl = 0, acch = 0;
      for (Index t = 0; t < a.cols(); ++t) {
        double p1 = a.lo(i, t) * b.lo(t, j);
        double p2 = a.lo(i, t) * b.hi(t, j);
        double p3 = a.hi(i, t) * b.lo(t, j);
        double p4 = a.hi(i, t) * b.hi(t, j);
        accl += std::min(std::min(p1, p2), std::min(p3, p4));
        acch += std::max(std::max(p1, p2), std::max(p3, p4));
      }
      lo(i, j) = accl;
      hi(i, j) = acch;
    }
  }
  return IntervalMat(std::move(lo), std::move(hi));
}

// diag(d) * m for an interval diagonal.
inline IntervalMat idiag_mul(const IntervalVec& d, const IntervalMat& m) {
  check_dims(d.size() == m.rows(), "idiag_mul: dimension mismatch");
  Mat lo(m.rows(), m.cols()), hi(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      double p1 = d.lo[i] * m.lo(i, j);
      double p2 = d.lo[i] * m.hi(i, j);
      double p3 = d.hi[i] * m.lo(i, j);
      double p4 = d.hi[i] * m.hi(i, j);
      lo(i, j) = std::min(std::min(p1, p2), std::min(p3, p4));
      hi(i, j) = std::max(std::max(p1, p2), std::max(p3, p4));
    }
  }
  return IntervalMat(std::move(lo), std::move(hi));
}

// Interval matrix times interval vector.
inline IntervalVec imat_ivec(const IntervalMat& m, const IntervalVec& v) {
  check_dims(m.cols() == v.size(), "imat_ivec: dimension mismatch");
  Vec lo = Vec::Zero(m.rows()), hi = Vec::Zero(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index t = 0; t < m.cols(); ++t) {
      double p1 = m.lo(i, t) * v.lo[t];
      double p2 = m.lo(i, t) * v.hi[t];
      double p3 = m.hi(i, t) * v.lo[t];
      double p4 = m.hi(i, t) * v.hi[t];
      lo[i] += std::min(std::min(p1, p2), std::min(p3, p4));
      hi[i] += std::max(std::max(p1, p2), std::max(p3, p4));
    }
  }
  return IntervalVec(std::move(lo), std::move(hi));
}

}  // namespace gnr

#endif  // GNR_INTERVAL_HPP_
