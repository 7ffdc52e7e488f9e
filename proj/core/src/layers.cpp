#include "gnr/layers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace gnr {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Satlin: return "satlin";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

bool activation_is_piecewise_linear(Activation a) {
  return a == Activation::Linear || a == Activation::Relu ||
         a == Activation::LeakyRelu || a == Activation::Satlin ||
         a == Activation::Softmax;
}

bool activation_is_smooth(Activation a) {
  return a == Activation::Tanh || a == Activation::Sigmoid;
}

FcLayer::FcLayer(Mat weights, Vec bias, Activation a, double slope, Index pass)
    : W(std::move(weights)), b(std::move(bias)), act(a), leaky_slope(slope),
      passthrough(pass) {
  check_dims(W.rows() == b.size(), "FcLayer: W rows must match bias length");
  if (a == Activation::LeakyRelu && !(slope > 0.0 && slope < 1.0))
    throw DimensionError("FcLayer: leaky slope must lie in (0, 1)");
  check_dims(passthrough >= 0 && passthrough <= W.rows(),
             "FcLayer: passthrough exceeds output width");
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double act_scalar(Activation a, double x, double slope) {
  switch (a) {
    case Activation::Linear:
    case Activation::Softmax:
      return x;
    case Activation::Relu: return x > 0 ? x : 0.0;
    case Activation::LeakyRelu: return x > 0 ? x : slope * x;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Satlin: return std::clamp(x, 0.0, 1.0);
  }
  return x;
}

}  // namespace

Vec FcLayer::eval(const Vec& x) const {
  check_dims(x.size() == in_dim(), "FcLayer::eval: input dimension mismatch");
  Vec y = W * x + b;
  for (Index i = passthrough; i < y.size(); ++i)
    y[i] = act_scalar(act, y[i], leaky_slope);
  return y;
}

namespace {

// One linear inequality relating the rewritten output y of coordinate i to
// its pre-activation x_i: y <= slope x + intercept (upper) or >= (lower).
struct EnvelopeLine {
  double slope;
  double intercept;
  bool upper;
};

StarSet pin_dim(const StarSet& s, Index i, double value) {
  StarSet r = s;
  r.basis.row(i).setZero();
  r.center[i] = value;
  return r;
}

// Introduce a fresh predicate variable for coordinate i, bounded by the given
// envelope lines (in terms of the old x_i) and the interval [y_lo, y_hi].
StarSet rewrite_dim(const StarSet& s, Index i,
                    const std::vector<EnvelopeLine>& lines, double y_lo,
                    double y_hi) {
  const Index m = s.pred_dim();
  const Index n = s.dim();
  Mat V(n, m + 1);
  V.leftCols(m) = s.basis;
  V.col(m).setZero();
  V.row(i).head(m).setZero();
  V(i, m) = 1.0;
  Vec c = s.center;
  c[i] = 0.0;

  const Index k = s.n_constraints();
  const Index extra = static_cast<Index>(lines.size());
  Mat P(k + extra, m + 1);
  Vec d(k + extra);
  if (k > 0) {
    P.topLeftCorner(k, m) = s.P;
    P.col(m).head(k).setZero();
    d.head(k) = s.d;
  }
  const Vec vrow = s.basis.row(i).transpose();
  const double ci = s.center[i];
  for (Index r = 0; r < extra; ++r) {
    const auto& ln = lines[static_cast<size_t>(r)];
    if (ln.upper) {
      // y <= a x + beta  ->  alpha_new - a (V_i alpha) <= beta + a c_i
      P.row(k + r).head(m) = (-ln.slope * vrow).transpose();
      P(k + r, m) = 1.0;
      d[k + r] = ln.intercept + ln.slope * ci;
    } else {
      // y >= a x + beta  ->  a (V_i alpha) - alpha_new <= -(beta + a c_i)
      P.row(k + r).head(m) = (ln.slope * vrow).transpose();
      P(k + r, m) = -1.0;
      d[k + r] = -(ln.intercept + ln.slope * ci);
    }
  }

  Vec lb(m + 1), ub(m + 1);
  lb.head(m) = s.pred_lb ? *s.pred_lb : Vec::Constant(m, -kInf);
  ub.head(m) = s.pred_ub ? *s.pred_ub : Vec::Constant(m, kInf);
  lb[m] = y_lo;
  ub[m] = y_hi;
  return StarSet(std::move(c), std::move(V), std::move(P), std::move(d),
                 std::move(lb), std::move(ub));
}

// Shared triangle relaxation for relu (slope 0) and leaky relu.
StarSet piecewise_mixed_step(const StarSet& s, Index i, double lo, double hi,
                             double neg_slope) {
  std::vector<EnvelopeLine> lines;
  lines.push_back({1.0, 0.0, false});  // y >= x
  if (neg_slope > 0.0) lines.push_back({neg_slope, 0.0, false});
  const double chord = (hi - neg_slope * lo) / (hi - lo);
  lines.push_back({chord, neg_slope * lo - chord * lo, true});
  return rewrite_dim(s, i, lines, std::min(neg_slope * lo, 0.0), hi);
}

double dim_cheap_lo(const StarSet& s, Index i) {
  double lo = s.center[i];
  const Vec lb = s.pred_lb ? *s.pred_lb : Vec();
  const Vec ub = s.pred_ub ? *s.pred_ub : Vec();
  for (Index j = 0; j < s.pred_dim(); ++j) {
    double a = lb.size() ? s.basis(i, j) * lb[j] : -kInf;
    double b = ub.size() ? s.basis(i, j) * ub[j] : kInf;
    lo += std::min(a, b);
  }
  return lo;
}

double dim_cheap_hi(const StarSet& s, Index i) {
  double hi = s.center[i];
  const Vec lb = s.pred_lb ? *s.pred_lb : Vec();
  const Vec ub = s.pred_ub ? *s.pred_ub : Vec();
  for (Index j = 0; j < s.pred_dim(); ++j) {
    double a = lb.size() ? s.basis(i, j) * lb[j] : kInf;
    double b = ub.size() ? s.basis(i, j) * ub[j] : -kInf;
    hi += std::max(a, b);
  }
  return hi;
}

StarSet scale_dim(const StarSet& s, Index i, double factor) {
  StarSet r = s;
  r.basis.row(i) *= factor;
  r.center[i] *= factor;
  return r;
}

HalfspaceSpec dim_at_most(Index n, Index i, double v) {
  Vec a = Vec::Zero(n);
  a[i] = 1.0;
  return HalfspaceSpec(a, v);
}

HalfspaceSpec dim_at_least(Index n, Index i, double v) {
  Vec a = Vec::Zero(n);
  a[i] = -1.0;
  return HalfspaceSpec(a, -v);
}

// Exact branch expansion of one piecewise-linear neuron.
void exact_step(std::deque<StarSet>& out, const StarSet& s, Index i,
                Activation act, double neg_slope) {
  const Index n = s.dim();
  double clo = dim_cheap_lo(s, i);
  double chi = dim_cheap_hi(s, i);

  auto push_nonneg_branch = [&](const StarSet& base) {
    if (clo >= 0.0) {
      out.push_back(base);
      return;
    }
    auto pos = star_intersect_halfspace(base, dim_at_least(n, i, 0.0));
    if (pos) out.push_back(std::move(*pos));
  };
  auto neg_piece = [&](const StarSet& base) -> std::optional<StarSet> {
    if (chi <= 0.0) return base;
    return star_intersect_halfspace(base, dim_at_most(n, i, 0.0));
  };

  switch (act) {
    case Activation::Relu: {
      if (clo >= 0.0) {
        out.push_back(s);
        return;
      }
      if (chi <= 0.0) {
        out.push_back(pin_dim(s, i, 0.0));
        return;
      }
      push_nonneg_branch(s);
      if (auto neg = neg_piece(s)) out.push_back(pin_dim(*neg, i, 0.0));
      return;
    }
    case Activation::LeakyRelu: {
      if (clo >= 0.0) {
        out.push_back(s);
        return;
      }
      if (chi <= 0.0) {
        out.push_back(scale_dim(s, i, neg_slope));
        return;
      }
      push_nonneg_branch(s);
      if (auto neg = neg_piece(s)) out.push_back(scale_dim(*neg, i, neg_slope));
      return;
    }
    case Activation::Satlin: {
      if (chi <= 0.0) {
        out.push_back(pin_dim(s, i, 0.0));
        return;
      }
      if (clo >= 1.0) {
        out.push_back(pin_dim(s, i, 1.0));
        return;
      }
      if (clo >= 0.0 && chi <= 1.0) {
        out.push_back(s);
        return;
      }
      if (auto low = neg_piece(s)) out.push_back(pin_dim(*low, i, 0.0));
      {
        std::optional<StarSet> mid = s;
        if (clo < 0.0) mid = star_intersect_halfspace(*mid, dim_at_least(n, i, 0.0));
        if (mid && chi > 1.0)
          mid = star_intersect_halfspace(*mid, dim_at_most(n, i, 1.0));
        if (mid) out.push_back(std::move(*mid));
      }
      if (chi > 1.0) {
        auto hipart = star_intersect_halfspace(s, dim_at_least(n, i, 1.0));
        if (hipart) out.push_back(pin_dim(*hipart, i, 1.0));
      }
      return;
    }
    default:
      throw UnsupportedError("exact-star requires a piecewise-linear activation");
  }
}

StarSet satlin_step_approx(const StarSet& s, Index i, double lo, double hi) {
  if (hi <= 0.0) return pin_dim(s, i, 0.0);
  if (lo >= 1.0) return pin_dim(s, i, 1.0);
  if (lo >= 0.0 && hi <= 1.0) return s;
  std::vector<EnvelopeLine> lines;
  if (lo < 0.0 && hi <= 1.0) {
    // relu-like kink at 0
    lines.push_back({1.0, 0.0, false});
    double chord = hi / (hi - lo);
    lines.push_back({chord, -chord * lo, true});
    return rewrite_dim(s, i, lines, 0.0, hi);
  }
  if (lo >= 0.0 && hi > 1.0) {
    // saturation kink at 1 (concave piece)
    lines.push_back({1.0, 0.0, true});  // y <= x
    double chord = (1.0 - lo) / (hi - lo);
    lines.push_back({chord, lo - chord * lo, false});
    return rewrite_dim(s, i, lines, lo, 1.0);
  }
  // spans both kinks: hull of (lo,0), (0,0), (1,1), (hi,1)
  lines.push_back({1.0 / hi, 0.0, false});                    // y >= x/hi
  lines.push_back({1.0 / (1.0 - lo), -lo / (1.0 - lo), true});  // y <= (x-lo)/(1-lo)
  return rewrite_dim(s, i, lines, 0.0, 1.0);
}

}  // namespace

StarSet relu_step_approx(const StarSet& s, Index i, double lo, double hi) {
  check_dims(i >= 0 && i < s.dim(), "relu_step_approx: dim out of range");
  if (lo > hi) throw DimensionError("relu_step_approx: lo exceeds hi");
  if (lo >= 0.0) return s;
  if (hi <= 0.0) return pin_dim(s, i, 0.0);
  return piecewise_mixed_step(s, i, lo, hi, 0.0);
}

StarSet smooth_step_approx(const StarSet& s, Index i, Activation act,
                           double lo, double hi) {
  check_dims(i >= 0 && i < s.dim(), "smooth_step_approx: dim out of range");
  if (lo > hi) throw DimensionError("smooth_step_approx: lo exceeds hi");
  if (!activation_is_smooth(act))
    throw UnsupportedError("smooth_step_approx: activation is not smooth");

  auto f = [&](double x) {
    return act == Activation::Tanh ? std::tanh(x) : sigmoid(x);
  };
  auto fp = [&](double x) {
    if (act == Activation::Tanh) {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    double sv = sigmoid(x);
    return sv * (1.0 - sv);
  };

  const double flo = f(lo), fhi = f(hi);
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo)))
    return pin_dim(s, i, f(0.5 * (lo + hi)));

  std::vector<EnvelopeLine> lines;
  const double secant = (fhi - flo) / (hi - lo);
  if (lo >= 0.0) {
    // concave side: secant below, endpoint tangents above
    lines.push_back({secant, flo - secant * lo, false});
    lines.push_back({fp(lo), flo - fp(lo) * lo, true});
    lines.push_back({fp(hi), fhi - fp(hi) * hi, true});
  } else if (hi <= 0.0) {
    // convex side: secant above, endpoint tangents below
    lines.push_back({secant, flo - secant * lo, true});
    lines.push_back({fp(lo), flo - fp(lo) * lo, false});
    lines.push_back({fp(hi), fhi - fp(hi) * hi, false});
  } else {
    // crosses the inflection point: parallel lines through the endpoints at
    // the looser tangent slope remain sound on both sides
    const double lam = std::min(fp(lo), fp(hi));
    lines.push_back({lam, flo - lam * lo, false});
    lines.push_back({lam, fhi - lam * hi, true});
  }
  return rewrite_dim(s, i, lines, flo, fhi);
}

std::vector<StarSet> fc_reach(const FcLayer& layer, const StarSet& input,
                              ReachMode mode, const LayerReachOptions& opts) {
  check_dims(layer.in_dim() == input.dim(), "fc_reach: input dimension mismatch");
  if (mode == ReachMode::ExactStar && activation_is_smooth(layer.act))
    throw UnsupportedError(
        "fc_reach: exact-star is only defined for piecewise-linear activations");

  StarSet mapped = star_affine_map(input, layer.W, layer.b);
  if (layer.act == Activation::Linear || layer.act == Activation::Softmax)
    return {std::move(mapped)};

  const Index p = layer.out_dim();
  if (mode == ReachMode::ApproxStar) {
    StarSet cur = std::move(mapped);
    for (Index i = layer.passthrough; i < p; ++i) {
      auto [lo, hi] = star_bounds(cur, i);
      switch (layer.act) {
        case Activation::Relu:
          cur = relu_step_approx(cur, i, lo, hi);
          break;
        case Activation::LeakyRelu:
          if (lo >= 0.0) break;
          if (hi <= 0.0) {
            cur = scale_dim(cur, i, layer.leaky_slope);
            break;
          }
          cur = piecewise_mixed_step(cur, i, lo, hi, layer.leaky_slope);
          break;
        case Activation::Satlin:
          cur = satlin_step_approx(cur, i, lo, hi);
          break;
        case Activation::Tanh:
        case Activation::Sigmoid:
          cur = smooth_step_approx(cur, i, layer.act, lo, hi);
          break;
        default:
          break;
      }
    }
    return {std::move(cur)};
  }

  std::deque<StarSet> work{std::move(mapped)};
  for (Index i = layer.passthrough; i < p; ++i) {
    std::deque<StarSet> next;
    for (auto& s : work) {
      exact_step(next, s, i, layer.act, layer.leaky_slope);
      if (static_cast<Index>(next.size()) > opts.max_branches)
        throw BranchLimitError("fc_reach: exact-star branch cap exceeded");
    }
    work = std::move(next);
  }
  return {work.begin(), work.end()};
}

std::vector<StarSet> fc_reach_multi(const FcLayer& layer,
                                    const std::vector<StarSet>& inputs,
                                    ReachMode mode,
                                    const LayerReachOptions& opts) {
  std::vector<StarSet> out;
  for (const auto& s : inputs) {
    auto r = fc_reach(layer, s, mode, opts);
    out.insert(out.end(), std::make_move_iterator(r.begin()),
               std::make_move_iterator(r.end()));
    if (static_cast<Index>(out.size()) > opts.max_branches)
      throw BranchLimitError("fc_reach: exact-star branch cap exceeded");
  }
  return out;
}

}  // namespace gnr
