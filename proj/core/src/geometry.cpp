#include "gnr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gnr/linprog.hpp"

namespace gnr {

Box::Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  check_dims(lower.size() == upper.size() && lower.size() >= 1,
             "Box: lower/upper length mismatch");
  for (Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i]))
      throw DimensionError("Box: lower exceeds upper");
  }
}

bool Box::contains(const Vec& x, double tol) const {
  if (x.size() != dim()) return false;
  return ((x - lower).array() >= -tol).all() &&
         ((upper - x).array() >= -tol).all();
}

Box Box::hull(const Box& other) const {
  check_dims(dim() == other.dim(), "Box::hull: dimension mismatch");
  return Box(lower.cwiseMin(other.lower), upper.cwiseMax(other.upper));
}

Box Box::inflate(double factor, double abs_floor) const {
  Vec c = center();
  Vec r = radius() * factor + Vec::Constant(dim(), abs_floor);
  return Box(c - r, c + r);
}

Vec Box::sample(Rng& rng) const {
  Vec x(dim());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index i = 0; i < dim(); ++i)
    x[i] = lower[i] + (upper[i] - lower[i]) * u(rng);
  return x;
}

Zonotope::Zonotope(Vec c, Mat G) : center(std::move(c)), generators(std::move(G)) {
  check_dims(generators.rows() == center.size(),
             "Zonotope: generator row count mismatch");
}

Vec Zonotope::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec beta(n_generators());
  for (Index i = 0; i < beta.size(); ++i) beta[i] = u(rng);
  return point_at(beta);
}

StarSet::StarSet(Vec c, Mat V, Mat P_, Vec d_, std::optional<Vec> lb,
                 std::optional<Vec> ub)
    : center(std::move(c)),
      basis(std::move(V)),
      P(std::move(P_)),
      d(std::move(d_)),
      pred_lb(std::move(lb)),
      pred_ub(std::move(ub)) {
  check_dims(basis.rows() == center.size(), "StarSet: basis row count mismatch");
  check_dims(P.cols() == basis.cols() || P.rows() == 0,
             "StarSet: predicate width mismatch");
  check_dims(P.rows() == d.size(), "StarSet: constraint count mismatch");
  if (pred_lb) check_dims(pred_lb->size() == basis.cols(), "StarSet: pred_lb size");
  if (pred_ub) check_dims(pred_ub->size() == basis.cols(), "StarSet: pred_ub size");
}

StarSet StarSet::from_box(const Box& box) {
  const Index n = box.dim();
  std::vector<Index> wide;
  for (Index i = 0; i < n; ++i)
    if (box.upper[i] > box.lower[i]) wide.push_back(i);
  const Index m = static_cast<Index>(wide.size());
  Vec c = box.center();
  Mat V = Mat::Zero(n, m);
  Vec lb(m), ub(m);
  for (Index j = 0; j < m; ++j) {
    Index i = wide[static_cast<size_t>(j)];
    V(i, j) = 0.5 * (box.upper[i] - box.lower[i]);
    lb[j] = -1.0;
    ub[j] = 1.0;
  }
  return StarSet(std::move(c), std::move(V), Mat(0, m), Vec(0), lb, ub);
}

StarSet StarSet::point(const Vec& x) {
  return StarSet(x, Mat(x.size(), 0), Mat(0, 0), Vec(0), Vec(0), Vec(0));
}

HalfspaceSpec::HalfspaceSpec(Vec a, double b) : normal(std::move(a)), offset(b) {
  check_dims(normal.size() >= 1, "HalfspaceSpec: empty normal");
  if (normal.lpNorm<Eigen::Infinity>() == 0.0)
    throw DimensionError("HalfspaceSpec: zero normal");
}

namespace {

Vec lb_or_inf(const StarSet& s) {
  return s.pred_lb ? *s.pred_lb : Vec::Constant(s.pred_dim(), -kInf);
}

Vec ub_or_inf(const StarSet& s) {
  return s.pred_ub ? *s.pred_ub : Vec::Constant(s.pred_dim(), kInf);
}

bool is_box_predicate(const StarSet& s) {
  return s.n_constraints() == 0 && s.pred_lb && s.pred_ub;
}

// min over the predicate of obj . alpha (exact, LP-backed).
double pred_minimize(const StarSet& s, const Vec& obj, Vec* witness = nullptr) {
  auto out = lp_minimize(obj, s.P, s.d, lb_or_inf(s), ub_or_inf(s));
  if (out.status == LpStatus::Infeasible)
    throw EmptySetError("star predicate is empty");
  if (out.status == LpStatus::Unbounded)
    throw UnboundedError("star predicate is unbounded");
  if (witness) *witness = out.witness;
  return out.value;
}

}  // namespace

StarSet star_affine_map(const StarSet& s, const Mat& W, const Vec& b) {
  check_dims(W.cols() == s.dim(), "star_affine_map: W column count mismatch");
  check_dims(W.rows() == b.size(), "star_affine_map: bias length mismatch");
  return StarSet(W * s.center + b, W * s.basis, s.P, s.d, s.pred_lb, s.pred_ub);
}

std::optional<StarSet> star_intersect_halfspace(const StarSet& s,
                                                const HalfspaceSpec& h) {
  check_dims(h.normal.size() == s.dim(),
             "star_intersect_halfspace: dimension mismatch");
  Vec row = s.basis.transpose() * h.normal;            // (a^T V)^T
  double rhs = h.offset - h.normal.dot(s.center);      // b - a^T c
  Mat P2(s.P.rows() + 1, s.pred_dim());
  Vec d2(s.d.size() + 1);
  if (s.P.rows() > 0) P2.topRows(s.P.rows()) = s.P;
  P2.row(s.P.rows()) = row.transpose();
  if (s.d.size() > 0) d2.head(s.d.size()) = s.d;
  d2[s.d.size()] = rhs;
  StarSet result(s.center, s.basis, std::move(P2), std::move(d2), s.pred_lb,
                 s.pred_ub);
  if (star_is_empty(result)) return std::nullopt;
  return result;
}

std::pair<double, double> star_bounds(const StarSet& s, Index dim) {
  check_dims(dim >= 0 && dim < s.dim(), "star_bounds: dimension out of range");
  Vec row = s.basis.row(dim).transpose();
  if (s.pred_dim() == 0 || row.lpNorm<Eigen::Infinity>() == 0.0) {
    if (s.pred_dim() > 0 && star_is_empty(s))
      throw EmptySetError("star_bounds: empty star");
    return {s.center[dim], s.center[dim]};
  }
  if (is_box_predicate(s)) {
    double lo = s.center[dim], hi = s.center[dim];
    for (Index j = 0; j < s.pred_dim(); ++j) {
      double a = row[j] * (*s.pred_lb)[j];
      double b = row[j] * (*s.pred_ub)[j];
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    return {lo, hi};
  }
  double lo = s.center[dim] + pred_minimize(s, row);
  double hi = s.center[dim] - pred_minimize(s, Vec(-row));
  return {lo, hi};
}

Box star_box_hull(const StarSet& s) {
  Vec lo(s.dim()), hi(s.dim());
  for (Index i = 0; i < s.dim(); ++i) {
    auto [l, h] = star_bounds(s, i);
    lo[i] = l;
    hi[i] = h;
  }
  return Box(lo, hi);
}

std::pair<Vec, Vec> star_pred_hull(const StarSet& s) {
  const Index m = s.pred_dim();
  if (is_box_predicate(s)) return {*s.pred_lb, *s.pred_ub};
  Vec lo(m), hi(m);
  for (Index j = 0; j < m; ++j) {
    Vec e = Vec::Zero(m);
    e[j] = 1.0;
    lo[j] = pred_minimize(s, e);
    hi[j] = -pred_minimize(s, Vec(-e));
  }
  return {lo, hi};
}

Box star_box_cheap(const StarSet& s) {
  Vec plo, phi;
  if (s.pred_lb && s.pred_ub) {
    plo = *s.pred_lb;
    phi = *s.pred_ub;
  } else {
    std::tie(plo, phi) = star_pred_hull(s);
  }
  Vec lo = s.center, hi = s.center;
  for (Index i = 0; i < s.dim(); ++i) {
    for (Index j = 0; j < s.pred_dim(); ++j) {
      double a = s.basis(i, j) * plo[j];
      double b = s.basis(i, j) * phi[j];
      lo[i] += std::min(a, b);
      hi[i] += std::max(a, b);
    }
  }
  return Box(lo, hi);
}

Zonotope star_to_zonotope(const StarSet& s) {
  auto [plo, phi] = star_pred_hull(s);  // throws on empty/unbounded
  Vec mid = 0.5 * (plo + phi);
  Vec rad = 0.5 * (phi - plo);
  Vec c = s.center + s.basis * mid;
  Mat G = s.basis * rad.asDiagonal();
  return Zonotope(std::move(c), std::move(G));
}

StarSet zonotope_to_star(const Zonotope& z) {
  const Index g = z.n_generators();
  return StarSet(z.center, z.generators, Mat(0, g), Vec(0),
                 Vec::Constant(g, -1.0), Vec::Constant(g, 1.0));
}

bool star_contains_point(const StarSet& s, const Vec& x, double tol) {
  check_dims(x.size() == s.dim(), "star_contains_point: dimension mismatch");
  const Index m = s.pred_dim();
  const Index n = s.dim();
  if (m == 0) return (x - s.center).lpNorm<Eigen::Infinity>() <= tol;
  // Feasibility of {V alpha = x - c, P alpha <= d} with the equality encoded
  // as paired inequalities.
  Mat A(s.P.rows() + 2 * n, m);
  Vec b(s.d.size() + 2 * n);
  if (s.P.rows() > 0) {
    A.topRows(s.P.rows()) = s.P;
    b.head(s.d.size()) = s.d;
  }
  Vec delta = x - s.center;
  A.middleRows(s.P.rows(), n) = s.basis;
  b.segment(s.d.size(), n) = delta;
  A.bottomRows(n) = -s.basis;
  b.tail(n) = -delta;
  auto out = lp_minimize(Vec::Zero(m), A, b, lb_or_inf(s), ub_or_inf(s));
  if (out.status == LpStatus::Optimal) return true;
  return out.max_residual <= tol;
}

bool star_is_empty(const StarSet& s) {
  if (s.pred_dim() == 0) {
    // Width-zero predicate: rows reduce to 0 <= d_i.
    return s.n_constraints() > 0 && (s.d.array() < 0.0).any();
  }
  if (s.n_constraints() == 0) {
    if (s.pred_lb && s.pred_ub)
      return ((*s.pred_ub - *s.pred_lb).array() < 0.0).any();
    return false;
  }
  auto out = lp_minimize(Vec::Zero(s.pred_dim()), s.P, s.d, lb_or_inf(s),
                         ub_or_inf(s));
  return out.status == LpStatus::Infeasible;
}

Vec star_sample_alpha(const StarSet& s, Rng& rng) {
  const Index m = s.pred_dim();
  if (m == 0) return Vec(0);
  Vec plo, phi;
  if (s.pred_lb && s.pred_ub && s.pred_lb->allFinite() && s.pred_ub->allFinite()) {
    plo = *s.pred_lb;
    phi = *s.pred_ub;
  } else {
    std::tie(plo, phi) = star_pred_hull(s);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vec alpha(m);
    for (Index j = 0; j < m; ++j)
      alpha[j] = plo[j] + (phi[j] - plo[j]) * u(rng);
    if (s.n_constraints() == 0 || ((s.P * alpha - s.d).array() <= 0.0).all())
      return alpha;
  }
  throw SolverError("star_sample: rejection sampling failed (thin predicate)");
}

Vec star_sample(const StarSet& s, Rng& rng) {
  return s.point_at(star_sample_alpha(s, rng));
}

std::pair<double, double> star_support_point_2d(const StarSet& s, Index dim_x,
                                                Index dim_y, double dx,
                                                double dy) {
  check_dims(dim_x < s.dim() && dim_y < s.dim(),
             "star_support_point_2d: projection dims out of range");
  Vec obj = -(dx * s.basis.row(dim_x) + dy * s.basis.row(dim_y)).transpose();
  if (s.pred_dim() == 0) return {s.center[dim_x], s.center[dim_y]};
  Vec alpha;
  pred_minimize(s, obj, &alpha);
  Vec p = s.point_at(alpha);
  return {p[dim_x], p[dim_y]};
}

Zonotope zono_affine_map(const Zonotope& z, const Mat& W, const Vec& b) {
  check_dims(W.cols() == z.dim(), "zono_affine_map: W column count mismatch");
  check_dims(W.rows() == b.size(), "zono_affine_map: bias length mismatch");
  return Zonotope(W * z.center + b, W * z.generators);
}

Zonotope zono_minkowski_box(const Zonotope& z, const Vec& radius) {
  check_dims(radius.size() == z.dim(), "zono_minkowski_box: radius mismatch");
  std::vector<Index> nz;
  for (Index i = 0; i < radius.size(); ++i)
    if (radius[i] != 0.0) nz.push_back(i);
  Mat G(z.dim(), z.n_generators() + static_cast<Index>(nz.size()));
  G.leftCols(z.n_generators()) = z.generators;
  G.rightCols(static_cast<Index>(nz.size())).setZero();
  for (size_t j = 0; j < nz.size(); ++j)
    G(nz[j], z.n_generators() + static_cast<Index>(j)) = radius[nz[j]];
  return Zonotope(z.center, std::move(G));
}

Box zono_interval_hull(const Zonotope& z) {
  Vec r = z.generators.cwiseAbs().rowwise().sum();
  return Box(z.center - r, z.center + r);
}

Zonotope zono_order_reduce(const Zonotope& z, double max_order) {
  if (max_order < 1.0)
    throw DimensionError("zono_order_reduce: max_order must be >= 1");
  const Index n = z.dim();
  const Index g = z.n_generators();
  const Index target = static_cast<Index>(std::floor(max_order * n));
  if (g <= target) return z;

  const Index keep = target - n;  // box the rest into n axis generators
  std::vector<Index> idx(static_cast<size_t>(g));
  std::iota(idx.begin(), idx.end(), Index{0});
  Vec norms(g);
  for (Index j = 0; j < g; ++j) norms[j] = z.generators.col(j).norm();
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    if (norms[a] != norms[b]) return norms[a] > norms[b];
    return a < b;
  });

  Mat G(n, keep + n);
  Vec boxr = Vec::Zero(n);
  for (Index j = 0; j < keep; ++j)
    G.col(j) = z.generators.col(idx[static_cast<size_t>(j)]);
  for (Index j = keep; j < g; ++j)
    boxr += z.generators.col(idx[static_cast<size_t>(j)]).cwiseAbs();
  G.rightCols(n) = boxr.asDiagonal();
  return Zonotope(z.center, std::move(G));
}

Zonotope zono_enclose_step(const Zonotope& z1, const Zonotope& z2) {
  check_dims(z1.dim() == z2.dim(), "zono_enclose_step: dimension mismatch");
  check_dims(z2.n_generators() >= z1.n_generators(),
             "zono_enclose_step: successor must carry matched generators");
  const Index n = z1.dim();
  const Index g1 = z1.n_generators();
  const Index extra = z2.n_generators() - g1;
  Mat G2a = z2.generators.leftCols(g1);
  Mat G(n, g1 + 1 + g1 + extra);
  G.leftCols(g1) = 0.5 * (z1.generators + G2a);
  G.col(g1) = 0.5 * (z1.center - z2.center);
  G.middleCols(g1 + 1, g1) = 0.5 * (z1.generators - G2a);
  if (extra > 0) G.rightCols(extra) = z2.generators.rightCols(extra);
  return Zonotope(0.5 * (z1.center + z2.center), std::move(G));
}

bool zono_contains_point(const Zonotope& z, const Vec& x, double tol) {
  return star_contains_point(zonotope_to_star(z), x, tol);
}

}  // namespace gnr
