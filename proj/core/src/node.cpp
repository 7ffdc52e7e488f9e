#include "gnr/node.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace gnr {

namespace {

bool dynamics_activation_ok(Activation a) {
  return a == Activation::Linear || a == Activation::Tanh ||
         a == Activation::Sigmoid;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double act_deriv(Activation a, double x) {
  switch (a) {
    case Activation::Linear: return 1.0;
    case Activation::Tanh: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Sigmoid: {
      double s = sigmoid(x);
      return s * (1.0 - s);
    }
    default:
      throw UnsupportedError("act_deriv: non-differentiable activation");
  }
}

// sigma'(x) over [lo, hi]; both tanh' and sigmoid' peak at 0 and decay
// monotonically with |x|.
std::pair<double, double> act_deriv_range(Activation a, double lo, double hi) {
  if (a == Activation::Linear) return {1.0, 1.0};
  double nearest = (lo <= 0.0 && hi >= 0.0) ? 0.0
                   : (std::abs(lo) < std::abs(hi) ? lo : hi);
  double farthest = std::abs(lo) > std::abs(hi) ? lo : hi;
  return {act_deriv(a, farthest), act_deriv(a, nearest)};
}

double mat_inf_norm(const Mat& a) {
  if (a.rows() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

double box_inf_norm(const Box& b) {
  return std::max(b.lower.lpNorm<Eigen::Infinity>(),
                  b.upper.lpNorm<Eigen::Infinity>());
}

// Normalized step count so the grid tiles [0, t_f] exactly.
std::pair<Index, double> step_grid(const TimeConfig& tc) {
  if (!(tc.t_f > 0.0)) throw DimensionError("TimeConfig: t_f must be positive");
  if (!(tc.step > 0.0)) throw DimensionError("TimeConfig: step must be positive");
  Index k = static_cast<Index>(std::llround(tc.t_f / tc.step));
  if (k < 1) k = 1;
  return {k, tc.t_f / static_cast<double>(k)};
}

// exp of the augmented matrix [[A, c],[0, 0]] * h; returns the discrete map
// Phi and the constant-input response psi.
std::pair<Mat, Vec> discrete_affine_step(const Mat& A, const Vec& c, double h) {
  const Index n = A.rows();
  Mat aug = Mat::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = A;
  aug.topRightCorner(n, 1) = c;
  Mat e = matrix_exponential(aug, h);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, 1).col(0)};
}

double expm1_minus_x(double x) {
  // e^x - 1 - x, accurate near zero.
  if (std::abs(x) < 1e-4) return 0.5 * x * x * (1.0 + x / 3.0 + x * x / 12.0);
  return std::expm1(x) - x;
}

}  // namespace

NodeDynamics::NodeDynamics(std::vector<FcLayer> ls) : layers(std::move(ls)) {
  validate();
}

void NodeDynamics::validate() const {
  if (layers.empty()) throw DimensionError("NodeDynamics: no layers");
  for (size_t i = 0; i + 1 < layers.size(); ++i) {
    if (layers[i].out_dim() != layers[i + 1].in_dim())
      throw DimensionError("NodeDynamics: layer dimension chain break");
  }
  if (layers.front().in_dim() != layers.back().out_dim())
    throw DimensionError("NodeDynamics: dynamics must be square (autonomous)");
  for (const auto& l : layers) {
    if (l.passthrough == l.out_dim()) continue;
    if (!dynamics_activation_ok(l.act))
      throw UnsupportedError(
          "NodeDynamics: activations must be continuously differentiable "
          "(linear, tanh, sigmoid)");
  }
}

Index NodeDynamics::dim() const { return layers.front().in_dim(); }

bool NodeDynamics::is_linear() const {
  for (const auto& l : layers)
    if (l.act != Activation::Linear && l.passthrough != l.out_dim())
      return false;
  return true;
}

Vec NodeDynamics::eval(const Vec& z) const {
  Vec v = z;
  for (const auto& l : layers) v = l.eval(v);
  return v;
}

Index reach_set_dim(const ReachSet& s) {
  return std::visit([](const auto& v) { return v.dim(); }, s);
}

StarSet reach_set_as_star(const ReachSet& s) {
  if (std::holds_alternative<StarSet>(s)) return std::get<StarSet>(s);
  return zonotope_to_star(std::get<Zonotope>(s));
}

bool reach_set_contains(const ReachSet& s, const Vec& x, double tol) {
  if (std::holds_alternative<StarSet>(s))
    return star_contains_point(std::get<StarSet>(s), x, tol);
  return zono_contains_point(std::get<Zonotope>(s), x, tol);
}

LinearOdeForm collapse_linear(const NodeDynamics& dyn) {
  if (!dyn.is_linear())
    throw UnsupportedError("collapse_linear: dynamics are not linear");
  Mat A = dyn.layers.front().W;
  Vec c = dyn.layers.front().b;
  for (size_t k = 1; k < dyn.layers.size(); ++k) {
    A = dyn.layers[k].W * A;
    c = dyn.layers[k].W * c + dyn.layers[k].b;
  }
  return {std::move(A), std::move(c)};
}

Mat matrix_exponential(const Mat& A, double t) {
  check_dims(A.rows() == A.cols(), "matrix_exponential: matrix must be square");
  check_finite(A, "matrix_exponential");
  if (!std::isfinite(t)) throw NumericError("matrix_exponential: non-finite t");
  return Mat(A * t).exp();
}

Flowpipe linear_reach(const LinearOdeForm& form, const StarSet& s0,
                      const TimeConfig& tc) {
  check_dims(form.A.rows() == form.A.cols(), "linear_reach: A must be square");
  check_dims(form.A.rows() == s0.dim(), "linear_reach: dimension mismatch");
  check_dims(form.c.size() == s0.dim(), "linear_reach: drift length mismatch");
  check_finite(form.A, "linear_reach A");
  check_finite(form.c, "linear_reach c");

  const Index n = s0.dim();
  auto [steps_n, h] = step_grid(tc);
  auto [phi, psi] = discrete_affine_step(form.A, form.c, h);

  const double eta = mat_inf_norm(form.A);
  const double a_coef = expm1_minus_x(eta * h);
  const double a_over_eta = eta > 1e-12 ? a_coef / eta : 0.5 * eta * h * h;
  const double c_norm = form.c.lpNorm<Eigen::Infinity>();

  // Predicate hull, shared by every step (affine maps keep the predicate).
  auto [plo, phi_bounds] = star_pred_hull(s0);
  const Vec pred_mid = 0.5 * (plo + phi_bounds);
  const Vec pred_rad = 0.5 * (phi_bounds - plo);
  const Vec pred_absmax = plo.cwiseAbs().cwiseMax(phi_bounds.cwiseAbs());

  auto state_inf_norm = [&](const StarSet& s) {
    Vec shifted = s.center + s.basis * pred_mid;
    Vec rad = s.basis.cwiseAbs() * pred_rad;
    return (shifted.cwiseAbs() + rad).maxCoeff();
  };

  Flowpipe fp;
  fp.mode = tc.mode;
  StarSet cur = s0;
  for (Index k = 0; k < steps_n; ++k) {
    StarSet next = star_affine_map(cur, phi, psi);
    if (tc.mode == OutputMode::FlowpipeMode) {
      const Index m = cur.pred_dim();
      const Vec dc = next.center - cur.center;
      const Mat dv = next.basis - cur.basis;
      const Vec bilinear = dv.cwiseAbs() * pred_absmax;
      const double norm_max = std::max(state_inf_norm(cur), state_inf_norm(next));
      const double r_bloat = a_coef * norm_max + a_over_eta * c_norm;
      Vec box_rad = bilinear + Vec::Constant(n, r_bloat);

      std::vector<Index> nz;
      for (Index i = 0; i < n; ++i)
        if (box_rad[i] > 0.0) nz.push_back(i);
      const Index extra = 1 + static_cast<Index>(nz.size());

      Mat V(n, m + extra);
      V.leftCols(m) = cur.basis;
      V.col(m) = 0.5 * dc;
      V.rightCols(static_cast<Index>(nz.size())).setZero();
      for (size_t j = 0; j < nz.size(); ++j)
        V(nz[j], m + 1 + static_cast<Index>(j)) = box_rad[nz[j]];

      Mat P(cur.P.rows(), m + extra);
      if (cur.P.rows() > 0) {
        P.leftCols(m) = cur.P;
        P.rightCols(extra).setZero();
      }
      Vec lb(m + extra), ub(m + extra);
      lb.head(m) = plo;
      ub.head(m) = phi_bounds;
      lb.tail(extra).setConstant(-1.0);
      ub.tail(extra).setConstant(1.0);

      StarSet omega(cur.center + 0.5 * dc, std::move(V), std::move(P), cur.d,
                    std::move(lb), std::move(ub));
      fp.steps.push_back({static_cast<double>(k) * h,
                          static_cast<double>(k + 1) * h, std::move(omega),
                          true});
    }
    cur = std::move(next);
  }
  if (tc.mode == OutputMode::FinalSet)
    fp.steps.push_back({tc.t_f, tc.t_f, cur, true});
  fp.final_point = std::move(cur);
  return fp;
}

Mat network_jacobian(const NodeDynamics& dyn, const Vec& z) {
  check_dims(z.size() == dyn.dim(), "network_jacobian: dimension mismatch");
  Mat J;
  Vec v = z;
  bool first = true;
  for (const auto& l : dyn.layers) {
    Vec pre = l.W * v + l.b;
    Vec dscale(pre.size());
    for (Index i = 0; i < pre.size(); ++i)
      dscale[i] = i < l.passthrough ? 1.0 : act_deriv(l.act, pre[i]);
    Mat lj = dscale.asDiagonal() * l.W;
    J = first ? lj : Mat(lj * J);
    first = false;
    v = l.eval(v);
  }
  return J;
}

IntervalVec interval_eval(const NodeDynamics& dyn, const Box& box) {
  check_dims(box.dim() == dyn.dim(), "interval_eval: dimension mismatch");
  IntervalVec v(box.lower, box.upper);
  for (const auto& l : dyn.layers) {
    IntervalVec pre = mat_ivec(l.W, v) + l.b;
    Vec lo = pre.lo, hi = pre.hi;
    for (Index i = l.passthrough; i < lo.size(); ++i) {
      switch (l.act) {
        case Activation::Linear: break;
        case Activation::Tanh:
          lo[i] = std::tanh(lo[i]);
          hi[i] = std::tanh(hi[i]);
          break;
        case Activation::Sigmoid:
          lo[i] = sigmoid(lo[i]);
          hi[i] = sigmoid(hi[i]);
          break;
        default:
          throw UnsupportedError("interval_eval: unsupported activation");
      }
    }
    v = IntervalVec(std::move(lo), std::move(hi));
  }
  return v;
}

IntervalMat interval_jacobian(const NodeDynamics& dyn, const Box& box) {
  check_dims(box.dim() == dyn.dim(), "interval_jacobian: dimension mismatch");
  IntervalVec v(box.lower, box.upper);
  IntervalMat J;
  bool first = true;
  for (const auto& l : dyn.layers) {
    IntervalVec pre = mat_ivec(l.W, v) + l.b;
    Vec dlo(pre.size()), dhi(pre.size());
    for (Index i = 0; i < pre.size(); ++i) {
      if (i < l.passthrough) {
        dlo[i] = dhi[i] = 1.0;
      } else {
        auto [a, b] = act_deriv_range(l.act, pre.lo[i], pre.hi[i]);
        dlo[i] = a;
        dhi[i] = b;
      }
    }
    IntervalMat lj = idiag_mul(IntervalVec(dlo, dhi), IntervalMat::exact(l.W));
    J = first ? lj : imat_mul(lj, J);
    first = false;
    // forward activation bounds for the next layer
    Vec lo = pre.lo, hi = pre.hi;
    for (Index i = l.passthrough; i < lo.size(); ++i) {
      if (l.act == Activation::Tanh) {
        lo[i] = std::tanh(lo[i]);
        hi[i] = std::tanh(hi[i]);
      } else if (l.act == Activation::Sigmoid) {
        lo[i] = sigmoid(lo[i]);
        hi[i] = sigmoid(hi[i]);
      }
    }
    v = IntervalVec(std::move(lo), std::move(hi));
  }
  return J;
}

Flowpipe nonlinear_reach(const NodeDynamics& dyn, const Zonotope& z0,
                         const TimeConfig& tc, const NonlinearOptions& opts) {
  dyn.validate();
  check_dims(z0.dim() == dyn.dim(), "nonlinear_reach: dimension mismatch");
  check_finite(z0.center, "nonlinear_reach initial center");
  check_finite(z0.generators, "nonlinear_reach initial generators");

  const Index n = z0.dim();
  auto [steps_n, h] = step_grid(tc);

  Flowpipe fp;
  fp.mode = tc.mode;
  Zonotope z = zono_order_reduce(z0, opts.max_order);

  for (Index k = 0; k < steps_n; ++k) {
    const Vec z_star = z.center;
    const Vec f_star = dyn.eval(z_star);
    const Mat J = network_jacobian(dyn, z_star);
    const Vec w = f_star - J * z_star;
    if (!f_star.allFinite() || !J.allFinite())
      throw NumericError("nonlinear_reach: non-finite dynamics evaluation");

    auto [phi, psi] = discrete_affine_step(J, w, h);
    Zonotope z_lin(phi * z.center + psi, phi * z.generators);

    const double eta = mat_inf_norm(J);
    const double efac = eta > 1e-12 ? std::expm1(eta * h) / eta : h;
    const double a_coef = expm1_minus_x(eta * h);
    const double a_over_eta = eta > 1e-12 ? a_coef / eta : 0.5 * eta * h * h;
    const double w_norm = w.lpNorm<Eigen::Infinity>();

    // Candidate enclosure seed: current hull widened by one Euler step.
    Box ih = zono_interval_hull(z);
    IntervalVec f_range = interval_eval(dyn, ih);
    Box cand(ih.lower + (h * f_range.lo).cwiseMin(0.0),
             ih.upper + (h * f_range.hi).cwiseMax(0.0));
    cand = cand.inflate(1.1, opts.enlargement_floor);

    bool verified = false;
    Zonotope z_next = z_lin;
    Zonotope omega = z_lin;
    for (int attempt = 0; attempt <= opts.max_refinements; ++attempt) {
      IntervalMat ji = interval_jacobian(dyn, cand);
      IntervalVec dev(cand.lower - z_star, cand.upper - z_star);
      IntervalVec rho = imat_ivec(ji - J, dev);
      Vec rho_rad = rho.lo.cwiseAbs().cwiseMax(rho.hi.cwiseAbs());
      Vec err_rad = efac * rho_rad;

      z_next = zono_minkowski_box(z_lin, err_rad);
      const double norm_max =
          std::max(box_inf_norm(zono_interval_hull(z)),
                   box_inf_norm(zono_interval_hull(z_next)));
      const double r_lin = a_coef * norm_max + a_over_eta * w_norm;
      omega = zono_minkowski_box(zono_enclose_step(z, z_lin),
                                 err_rad + Vec::Constant(n, r_lin));

      Box omega_hull = zono_interval_hull(omega);
      if (((omega_hull.lower - cand.lower).array() >= 0.0).all() &&
          ((cand.upper - omega_hull.upper).array() >= 0.0).all()) {
        verified = true;
        break;
      }
      cand = cand.hull(omega_hull)
                 .inflate(opts.enlargement, opts.enlargement_floor);
    }
    if (!verified)
      throw StepSizeError(
          "nonlinear_reach: enclosure refinement failed; reduce the step size");

    if (tc.mode == OutputMode::FlowpipeMode) {
      fp.steps.push_back({static_cast<double>(k) * h,
                          static_cast<double>(k + 1) * h,
                          zono_order_reduce(omega, opts.max_order), true});
    }
    z = zono_order_reduce(z_next, opts.max_order);
  }
  if (tc.mode == OutputMode::FinalSet) fp.steps.push_back({tc.t_f, tc.t_f, z, true});
  fp.final_point = std::move(z);
  return fp;
}

}  // namespace gnr
