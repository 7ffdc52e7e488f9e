#ifndef GNR_NODE_HPP_
#define GNR_NODE_HPP_

#include <variant>
#include <vector>

#include "gnr/interval.hpp"
#include "gnr/layers.hpp"

namespace gnr {

// Continuous block z' = g(z) with g a stack of fully-connected layers.
// g must be square (autonomous ODE) and built from continuously
// differentiable activations: linear, tanh, sigmoid.
struct NodeDynamics {
  std::vector<FcLayer> layers;

  NodeDynamics() = default;
  explicit NodeDynamics(std::vector<FcLayer> ls);

  Index dim() const;
  bool is_linear() const;  // every activation linear
  Vec eval(const Vec& z) const;

  // Activations admissible inside dynamics (differentiability requirement).
  void validate() const;
};

enum class OutputMode { FinalSet, FlowpipeMode };

struct TimeConfig {
  double t_f = 1.0;
  double step = 0.01;
  OutputMode mode = OutputMode::FinalSet;
};

// z' = A z + c, the collapsed form of an all-linear NODE.
struct LinearOdeForm {
  Mat A;
  Vec c;
};

using ReachSet = std::variant<StarSet, Zonotope>;

Index reach_set_dim(const ReachSet& s);
StarSet reach_set_as_star(const ReachSet& s);
bool reach_set_contains(const ReachSet& s, const Vec& x,
                        double tol = kMembershipTol);

struct FlowpipeStep {
  double t_lo = 0.0;
  double t_hi = 0.0;
  ReachSet set;
  bool enclosure_verified = true;
};

// Time-indexed reach sets of one NODE layer. In FlowpipeMode the steps tile
// [0, t_f]; in FinalSet mode there is a single degenerate step at t_f.
// `final_point` is the point-in-time set R(t_f) in both modes.
struct Flowpipe {
  OutputMode mode = OutputMode::FinalSet;
  std::vector<FlowpipeStep> steps;
  ReachSet final_point;

  const ReachSet& final_set() const { return final_point; }
};

struct NonlinearOptions {
  double max_order = 20.0;
  int max_refinements = 10;
  double enlargement = 1.5;
  double enlargement_floor = 1e-8;
};

// Collapse an all-linear NODE into (A, c):
//   A = W_m ... W_1,  c = sum_i (W_m ... W_{i+1}) b_i + b_m.
LinearOdeForm collapse_linear(const NodeDynamics& dyn);

// Scaling-and-squaring Pade approximant of exp(A t).
Mat matrix_exponential(const Mat& A, double t);

// "Direct" star-set reach of a linear NODE: exact point-in-time affine steps
// e^{Ah}, with time-interval sets bloated by the first-order interpolation
// correction so the whole of [0, t_f] is enclosed.
Flowpipe linear_reach(const LinearOdeForm& form, const StarSet& s0,
                      const TimeConfig& tc);

// Fixed-step conservative linearization with zonotopes: linearize at the set
// center, bound the Lagrange remainder by interval arithmetic over a
// verified candidate enclosure, add the error box by Minkowski sum.
Flowpipe nonlinear_reach(const NodeDynamics& dyn, const Zonotope& z0,
                         const TimeConfig& tc,
                         const NonlinearOptions& opts = {});

// Exact chain-rule Jacobian at a point.
Mat network_jacobian(const NodeDynamics& dyn, const Vec& z);

// Entrywise interval enclosure of the Jacobian over a box.
IntervalMat interval_jacobian(const NodeDynamics& dyn, const Box& box);

// Interval evaluation of g over a box (forward interval pass).
IntervalVec interval_eval(const NodeDynamics& dyn, const Box& box);

}  // namespace gnr

#endif  // GNR_NODE_HPP_
