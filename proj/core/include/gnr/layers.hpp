#ifndef GNR_LAYERS_HPP_
#define GNR_LAYERS_HPP_

#include <vector>

#include "gnr/geometry.hpp"

namespace gnr {

enum class Activation {
  Linear,
  Relu,
  LeakyRelu,
  Tanh,
  Sigmoid,
  Satlin,
  Softmax,  // final classification layer; propagated as logits
};

const char* activation_name(Activation a);
bool activation_is_piecewise_linear(Activation a);
bool activation_is_smooth(Activation a);

// Fully-connected layer y = sigma(W x + b). The first `passthrough` output
// coordinates skip the activation (identity after the affine map); this is
// what lets an unrolled control loop carry plant state past controller
// layers without distortion.
struct FcLayer {
  Mat W;
  Vec b;
  Activation act = Activation::Linear;
  double leaky_slope = 0.01;  // in (0, 1)
  Index passthrough = 0;

  FcLayer() = default;
  FcLayer(Mat weights, Vec bias, Activation a = Activation::Linear,
          double slope = 0.01, Index pass = 0);

  Index in_dim() const { return W.cols(); }
  Index out_dim() const { return W.rows(); }

  Vec eval(const Vec& x) const;
};

enum class ReachMode { ApproxStar, ExactStar };

struct LayerReachOptions {
  Index max_branches = 10000;
};

// Reach set of one FC layer. Approx mode returns a single over-approximating
// star; exact mode (piecewise-linear activations only) returns branches whose
// union is the exact image. Empty input gives an empty list.
std::vector<StarSet> fc_reach(const FcLayer& layer, const StarSet& input,
                              ReachMode mode,
                              const LayerReachOptions& opts = {});

std::vector<StarSet> fc_reach_multi(const FcLayer& layer,
                                    const std::vector<StarSet>& inputs,
                                    ReachMode mode,
                                    const LayerReachOptions& opts = {});

// Triangle over-approximation of relu on coordinate i given exact bounds.
StarSet relu_step_approx(const StarSet& s, Index i, double lo, double hi);

// Secant/tangent envelope for a monotone smooth activation on coordinate i.
// When [lo, hi] crosses the inflection point the envelope falls back to the
// looser of the two endpoint tangent slopes so it stays sound.
StarSet smooth_step_approx(const StarSet& s, Index i, Activation act,
                           double lo, double hi);

}  // namespace gnr

#endif  // GNR_LAYERS_HPP_
