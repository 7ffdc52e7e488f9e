#ifndef GNR_GNODE_HPP_
#define GNR_GNODE_HPP_

#include <string>
#include <variant>
#include <vector>

#include "gnr/node.hpp"

namespace gnr {

struct NodeLayer {
  NodeDynamics dynamics;
  TimeConfig time;
};

using Layer = std::variant<FcLayer, NodeLayer>;

Index layer_in_dim(const Layer& l);
Index layer_out_dim(const Layer& l);
bool layer_is_node(const Layer& l);

// Ordered sequence of FC and NODE layers; at least one NODE.
struct GnodeModel {
  std::string name;
  std::vector<Layer> layers;

  Index input_dim() const;
  Index output_dim() const;
  Index n_layers() const { return static_cast<Index>(layers.size()); }
  Index n_node_layers() const;
  Index n_fc_layers() const { return n_layers() - n_node_layers(); }

  // Dimension chain and NODE-count conditions; throws with the layer index.
  void validate() const;
};

// One reach branch, tagged with the time interval it covers once a
// flowpipe-mode NODE has been crossed.
struct TimedStar {
  StarSet star;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct LayerReach {
  std::vector<TimedStar> sets;
  std::string method;
  double wall_ms = 0.0;
};

struct BranchFlowpipe {
  Index layer = 0;
  Index branch = 0;
  Flowpipe pipe;
};

struct ReachResult {
  StarSet input;
  std::vector<LayerReach> layers;       // one entry per model layer
  std::vector<BranchFlowpipe> flowpipes;

  const std::vector<TimedStar>& final_sets() const { return layers.back().sets; }
  bool final_contains(const Vec& x, double tol = kMembershipTol) const;
};

struct ReachOptions {
  Index max_branches = 10000;
  NonlinearOptions nonlinear;
  // Compute time-interval flowpipes even for final-set NODEs so safety specs
  // can be checked over the whole horizon; propagation still follows the
  // layer's output mode.
  bool record_interval_flowpipes = true;
};

// Algorithm: propagate the input star layer by layer; FC layers via star
// methods, NODE layers via the direct linear method or fixed-step zonotope
// linearization after classification. Exact-star branches are propagated
// independently.
ReachResult reach(const GnodeModel& model, const StarSet& r0, ReachMode mode,
                  const ReachOptions& opts = {});

struct NodeTrace {
  Index layer = 0;
  std::vector<std::pair<double, Vec>> samples;
};

struct SimResult {
  Vec output;
  std::vector<NodeTrace> traces;
};

struct SimOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  bool record_trajectories = false;
  // Trajectory sample spacing as a fraction of each NODE's step.
  double sample_refine = 2.0;
};

// Exact FC evaluation and adaptive RK45 integration of NODE layers.
SimResult simulate(const GnodeModel& model, const Vec& x0,
                   const SimOptions& opts = {});

// Closed-loop system: FC controller + plant NODE in feedback, run for
// `control_steps` periods. The plant is given over the augmented state
// [plant state; held inputs]; controller outputs are written into
// `control_slots` at the start of every period and held constant.
struct NncsSpec {
  GnodeModel controller;              // pure FC layers
  NodeDynamics plant;                 // square on the augmented state
  TimeConfig period;                  // one control period
  std::vector<Index> feedback;        // aug-state indices fed to the controller
  std::vector<Index> control_slots;   // aug-state indices receiving outputs
  int control_steps = 1;
};

// Observation: unrolling the loop `cp` times yields an ordinary GNODE whose
// reach equals step-by-step closed-loop reach. Controller layers are lifted
// with a passthrough block that carries the plant state unchanged.
GnodeModel unroll_nncs(const NncsSpec& spec);

}  // namespace gnr

#endif  // GNR_GNODE_HPP_
