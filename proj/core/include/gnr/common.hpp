#ifndef GNR_COMMON_HPP_
#define GNR_COMMON_HPP_

#include <Eigen/Dense>

#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace gnr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Membership tolerance on LP constraint residuals (tau_mem).
inline constexpr double kMembershipTol = 1e-8;
// LP feasibility tolerance (tau_lp) and pivot tolerance.
inline constexpr double kLpFeasTol = 1e-9;
inline constexpr double kLpPivotTol = 1e-10;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptySetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnboundedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Degenerate or stalled LP; never a silently wrong answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BranchLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nonlinear step enclosure could not be validated; advise a smaller step.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document; carries a JSON-pointer-style location.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& msg, std::string location)
      : std::runtime_error(msg + " (at " + location + ")"),
        location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

inline void check_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

inline void check_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

inline void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

}  // namespace gnr

#endif  // GNR_COMMON_HPP_
