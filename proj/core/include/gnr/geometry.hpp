#ifndef GNR_GEOMETRY_HPP_
#define GNR_GEOMETRY_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "gnr/common.hpp"

namespace gnr {

// Axis-aligned box, lower[i] <= upper[i].
struct Box {
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lo, Vec hi);

  Index dim() const { return lower.size(); }
  Vec center() const { return 0.5 * (lower + upper); }
  Vec radius() const { return 0.5 * (upper - lower); }
  bool contains(const Vec& x, double tol = 0.0) const;
  // Componentwise hull of this box and another.
  Box hull(const Box& other) const;
  Box inflate(double factor, double abs_floor) const;
  Vec sample(Rng& rng) const;
};

// Zonotope {c + G beta | beta in [-1,1]^g}.
struct Zonotope {
  Vec center;
  Mat generators;  // n x g

  Zonotope() = default;
  Zonotope(Vec c, Mat G);

  Index dim() const { return center.size(); }
  Index n_generators() const { return generators.cols(); }
  double order() const {
    return dim() == 0 ? 0.0
                      : static_cast<double>(n_generators()) / static_cast<double>(dim());
  }
  Vec point_at(const Vec& beta) const { return center + generators * beta; }
  Vec sample(Rng& rng) const;
};

// Star set {c + V alpha | P alpha <= d, pred_lb <= alpha <= pred_ub}.
// The predicate bounds are optional; when the predicate is exactly a box
// (no P rows) they make bound queries LP-free.
struct StarSet {
  Vec center;   // n
  Mat basis;    // n x m
  Mat P;        // k x m
  Vec d;        // k
  std::optional<Vec> pred_lb;  // m
  std::optional<Vec> pred_ub;  // m

  StarSet() = default;
  StarSet(Vec c, Mat V, Mat P_, Vec d_,
          std::optional<Vec> lb = std::nullopt,
          std::optional<Vec> ub = std::nullopt);

  Index dim() const { return center.size(); }
  Index pred_dim() const { return basis.cols(); }
  Index n_constraints() const { return P.rows(); }

  Vec point_at(const Vec& alpha) const { return center + basis * alpha; }

  // Star over the given box: degenerate coordinates (lower == upper) are
  // folded into the center so they never widen the predicate.
  static StarSet from_box(const Box& box);
  static StarSet point(const Vec& x);
};

// Halfspace {x | normal . x <= offset}; used for unsafe/target regions.
struct HalfspaceSpec {
  Vec normal;
  double offset = 0.0;

  HalfspaceSpec() = default;
  HalfspaceSpec(Vec a, double b);
};

// --- star operations -------------------------------------------------------

// Exact affine image {W c + b, W V, P, d}.
StarSet star_affine_map(const StarSet& s, const Mat& W, const Vec& b);

// Appends (a^T V) alpha <= b - a^T c to the predicate. Returns nullopt when
// the intersection is empty (LP-infeasible predicate).
std::optional<StarSet> star_intersect_halfspace(const StarSet& s,
                                                const HalfspaceSpec& h);

// Exact interval of coordinate `dim` over the star, computed by LP (or
// analytically when the predicate is a pure box).
std::pair<double, double> star_bounds(const StarSet& s, Index dim);

// Exact bounds of every coordinate.
Box star_box_hull(const StarSet& s);

// Sound but cheap coordinate bounds from the predicate interval hull; no LP.
// Requires predicate bounds (or computes them once via star_pred_hull).
Box star_box_cheap(const StarSet& s);

// Interval hull of each predicate variable (LP per variable unless the
// bounds are already explicit and there are no P rows).
std::pair<Vec, Vec> star_pred_hull(const StarSet& s);

// Enclosing zonotope: interval hull of the predicate, basis rescaled.
Zonotope star_to_zonotope(const StarSet& s);

// Exact conversion; the predicate becomes the unit box.
StarSet zonotope_to_star(const Zonotope& z);

// LP membership test at tolerance tau_mem on constraint residuals.
bool star_contains_point(const StarSet& s, const Vec& x,
                         double tol = kMembershipTol);

bool star_is_empty(const StarSet& s);

// Uniform-ish sample from the star: predicate box sampling with rejection
// against P alpha <= d. Throws if the acceptance rate collapses.
Vec star_sample(const StarSet& s, Rng& rng);
Vec star_sample_alpha(const StarSet& s, Rng& rng);

// Support point of the star projected onto coordinates (dim_x, dim_y),
// maximizing direction (dx, dy). Used for polygon export.
std::pair<double, double> star_support_point_2d(const StarSet& s, Index dim_x,
                                                Index dim_y, double dx,
                                                double dy);

// --- zonotope operations ----------------------------------------------------

Zonotope zono_affine_map(const Zonotope& z, const Mat& W, const Vec& b);
Zonotope zono_minkowski_box(const Zonotope& z, const Vec& radius);
Box zono_interval_hull(const Zonotope& z);

// Girard reduction: keep the largest generators (Euclidean norm), box the
// rest. Result has at most dim * max_order generators and encloses z.
Zonotope zono_order_reduce(const Zonotope& z, double max_order);

// Enclosure of the convex hull of z1 and its affine successor z2, where z2
// carries the images of z1's generators in its leading columns. Covers every
// segment between generator-matched points.
Zonotope zono_enclose_step(const Zonotope& z1, const Zonotope& z2);

bool zono_contains_point(const Zonotope& z, const Vec& x,
                         double tol = kMembershipTol);

}  // namespace gnr

#endif  // GNR_GEOMETRY_HPP_
