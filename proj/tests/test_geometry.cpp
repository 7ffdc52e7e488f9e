#include "gnr/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"

using namespace gnr;

namespace {

Box unit_box(Index n) {
  return Box(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0));
}

// {alpha1 + alpha2 <= 1, alpha >= 0} with identity basis.
StarSet triangle_star() {
  Mat P(3, 2);
  P << 1, 1, -1, 0, 0, -1;
  Vec d(3);
  d << 1, 0, 0;
  return StarSet(Vec::Zero(2), Mat::Identity(2, 2), P, d);
}

TEST(StarAffineMap, IdentityLeavesStarUnchanged) {
  StarSet s = StarSet::from_box(unit_box(2));
  StarSet t = star_affine_map(s, Mat::Identity(2, 2), Vec::Zero(2));
  EXPECT_EQ(t.center, s.center);
  EXPECT_EQ(t.basis, s.basis);
}

TEST(StarAffineMap, RotatedBoxBoundsMatchVertexEnumeration) {
  StarSet s = StarSet::from_box(unit_box(2));
  Mat W(2, 2);
  W << 1, 1, 1, -1;
  StarSet t = star_affine_map(s, W, Vec::Zero(2));
  // Oracle: map the four box vertices, take min/max per coordinate.
  double lo0 = kInf, hi0 = -kInf, lo1 = kInf, hi1 = -kInf;
  for (double a : {-1.0, 1.0})
    for (double b : {-1.0, 1.0}) {
      Vec v = W * (Vec(2) << a, b).finished();
      lo0 = std::min(lo0, v[0]);
      hi0 = std::max(hi0, v[0]);
      lo1 = std::min(lo1, v[1]);
      hi1 = std::max(hi1, v[1]);
    }
  auto [l0, h0] = star_bounds(t, 0);
  auto [l1, h1] = star_bounds(t, 1);
  EXPECT_NEAR(l0, lo0, 1e-12);
  EXPECT_NEAR(h0, hi0, 1e-12);
  EXPECT_NEAR(l1, lo1, 1e-12);
  EXPECT_NEAR(h1, hi1, 1e-12);
}

TEST(StarAffineMap, PointStarPropagates) {
  StarSet s = StarSet::point((Vec(2) << 1, 2).finished());
  Mat W(2, 2);
  W << 2, 0, 0, 3;
  StarSet t = star_affine_map(s, W, Vec::Ones(2));
  EXPECT_NEAR(t.center[0], 3.0, 0.0);
  EXPECT_NEAR(t.center[1], 7.0, 0.0);
  auto [lo, hi] = star_bounds(t, 1);
  EXPECT_EQ(lo, 7.0);
  EXPECT_EQ(hi, 7.0);
}

TEST(StarAffineMap, DimensionMismatchThrows) {
  StarSet s = StarSet::from_box(unit_box(2));
  EXPECT_THROW(star_affine_map(s, Mat::Identity(3, 3), Vec::Zero(3)),
               DimensionError);
}

TEST(StarAffineMap, ExactnessOnRandomPredicatePoints) {
  Rng rng(11);
  StarSet s = StarSet::from_box(unit_box(3));
  Mat W = gnr::testing::random_mat(rng, 4, 3);
  Vec b = gnr::testing::random_vec(rng, 4, -1, 1);
  StarSet t = star_affine_map(s, W, b);
  for (int i = 0; i < 1000; ++i) {
    Vec alpha = star_sample_alpha(s, rng);
    Vec direct = W * s.point_at(alpha) + b;
    Vec mapped = t.point_at(alpha);
    EXPECT_LE((direct - mapped).norm(), 1e-12 * (1.0 + direct.norm()));
  }
}

TEST(StarIntersectHalfspace, UnitIntervalClipped) {
  StarSet s = StarSet::from_box(unit_box(1));
  auto r = star_intersect_halfspace(s, HalfspaceSpec(Vec::Ones(1), 0.0));
  ASSERT_TRUE(r.has_value());
  auto [lo, hi] = star_bounds(*r, 0);
  EXPECT_NEAR(lo, -1.0, 1e-9);
  EXPECT_NEAR(hi, 0.0, 1e-9);
}

TEST(StarIntersectHalfspace, DisjointGivesEmpty) {
  StarSet s = StarSet::from_box(unit_box(1));
  auto r = star_intersect_halfspace(s, HalfspaceSpec(Vec::Ones(1), -2.0));
  EXPECT_FALSE(r.has_value());
}

TEST(StarIntersectHalfspace, DiagonalCutSampledOracle) {
  Rng rng(5);
  StarSet s = StarSet::from_box(unit_box(2));
  Vec a(2);
  a << 1, 1;
  auto r = star_intersect_halfspace(s, HalfspaceSpec(a, 0.0));
  ASSERT_TRUE(r.has_value());
  // Rejection-sample the box; every accepted point must be a member, every
  // rejected one a non-member.
  int accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    Vec x = unit_box(2).sample(rng);
    bool in_half = x[0] + x[1] <= 0.0;
    if (in_half) {
      ++accepted;
      EXPECT_TRUE(star_contains_point(*r, x));
    }
  }
  EXPECT_GT(accepted, 4000);
  auto [l0, h0] = star_bounds(*r, 0);
  auto [l1, h1] = star_bounds(*r, 1);
  EXPECT_NEAR(l0, -1.0, 1e-9);
  EXPECT_NEAR(h0, 1.0, 1e-9);
  EXPECT_NEAR(l1, -1.0, 1e-9);
  EXPECT_NEAR(h1, 1.0, 1e-9);
}

TEST(StarBounds, UnitBoxAllDims) {
  StarSet s = StarSet::from_box(unit_box(3));
  for (Index i = 0; i < 3; ++i) {
    auto [lo, hi] = star_bounds(s, i);
    EXPECT_NEAR(lo, -1.0, 0.0);
    EXPECT_NEAR(hi, 1.0, 0.0);
  }
}

TEST(StarBounds, MatchesPredicateVertexEnumeration) {
  // Random stars with small constrained predicates (<= 12 vertices).
  Rng rng(123);
  for (int t = 0; t < 25; ++t) {
    Index m = 2 + (t % 2);
    Index k = 3;
    Mat P = gnr::testing::random_mat(rng, k, m);
    Vec lb = Vec::Constant(m, -1.0), ub = Vec::Constant(m, 1.0);
    Vec d(k);
    for (Index i = 0; i < k; ++i) d[i] = 0.5;  // contains alpha = 0
    Mat V = gnr::testing::random_mat(rng, 3, m);
    Vec c = gnr::testing::random_vec(rng, 3, -1, 1);
    StarSet s(c, V, P, d, lb, ub);
    auto verts = gnr::testing::polytope_vertices(P, d, lb, ub);
    ASSERT_FALSE(verts.empty());
    for (Index dim = 0; dim < 3; ++dim) {
      double lo = kInf, hi = -kInf;
      for (const auto& alpha : verts) {
        double val = c[dim] + V.row(dim).dot(alpha);
        lo = std::min(lo, val);
        hi = std::max(hi, val);
      }
      auto [l, h] = star_bounds(s, dim);
      EXPECT_NEAR(l, lo, 1e-9);
      EXPECT_NEAR(h, hi, 1e-9);
    }
  }
}

TEST(StarToZonotope, BoxPredicateIsExact) {
  StarSet s = StarSet::from_box(Box((Vec(2) << -1, 0).finished(),
                                    (Vec(2) << 1, 4).finished()));
  Zonotope z = star_to_zonotope(s);
  EXPECT_NEAR((z.center - s.center).norm(), 0.0, 1e-15);
  EXPECT_NEAR((z.generators - s.basis).norm(), 0.0, 1e-15);
}

TEST(StarToZonotope, TriangleEnclosedBySampling) {
  Rng rng(42);
  StarSet s = triangle_star();
  Zonotope z = star_to_zonotope(s);
  for (int i = 0; i < 10000; ++i) {
    Vec x = star_sample(s, rng);
    EXPECT_TRUE(zono_contains_point(z, x)) << x.transpose();
  }
}

TEST(StarToZonotope, EmptyStarThrows) {
  StarSet s = StarSet::from_box(unit_box(1));
  Mat P(2, 1);
  P << 1, -1;
  Vec d(2);
  d << -2, 1;  // alpha <= -2 and alpha >= -1: empty
  StarSet bad(s.center, s.basis, P, d, s.pred_lb, s.pred_ub);
  EXPECT_THROW(star_to_zonotope(bad), EmptySetError);
}

TEST(ZonotopeToStar, UnitBoxRoundTrip) {
  Zonotope z(Vec::Zero(2), Mat::Identity(2, 2));
  StarSet s = zonotope_to_star(z);
  EXPECT_EQ(s.n_constraints(), 0);
  auto [lo, hi] = star_bounds(s, 0);
  EXPECT_EQ(lo, -1.0);
  EXPECT_EQ(hi, 1.0);
}

TEST(ZonotopeToStar, PointSetExactBySampling) {
  Rng rng(77);
  Mat G(2, 2);
  G << 1, 0.5, 0, 0.5;
  Zonotope z((Vec(2) << 1, 1).finished(), G);
  StarSet s = zonotope_to_star(z);
  for (int i = 0; i < 10000; ++i) {
    Vec x = z.sample(rng);
    EXPECT_TRUE(star_contains_point(s, x));
  }
  for (int i = 0; i < 1000; ++i) {
    Vec x = star_sample(s, rng);
    EXPECT_TRUE(zono_contains_point(z, x));
  }
}

TEST(ZonotopeToStar, ZeroGeneratorsGivePointStar) {
  Zonotope z((Vec(2) << 3, -1).finished(), Mat(2, 0));
  StarSet s = zonotope_to_star(z);
  EXPECT_EQ(s.pred_dim(), 0);
  EXPECT_TRUE(star_contains_point(s, z.center));
  EXPECT_FALSE(star_contains_point(s, Vec::Zero(2)));
}

TEST(StarContainsPoint, UnitBoxCases) {
  StarSet s = StarSet::from_box(unit_box(2));
  EXPECT_TRUE(star_contains_point(s, Vec::Zero(2)));
  EXPECT_FALSE(star_contains_point(s, (Vec(2) << 2, 0).finished()));
}

TEST(StarContainsPoint, RotatedBoxInteriorPoint) {
  StarSet s = StarSet::from_box(unit_box(2));
  Mat W(2, 2);
  W << 1, 1, 1, -1;
  StarSet t = star_affine_map(s, W, Vec::Zero(2));
  // alpha = W^-1 x = ((x0+x1)/2, (x0-x1)/2); for x = (1.9, 0.1): (1.0, 0.9).
  EXPECT_TRUE(star_contains_point(t, (Vec(2) << 1.9, 0.1).finished()));
  EXPECT_FALSE(star_contains_point(t, (Vec(2) << 2.5, 0.0).finished()));
}

TEST(ZonoIntervalHull, UnitBoxAndRotated) {
  Zonotope z1(Vec::Zero(2), Mat::Identity(2, 2));
  Box b1 = zono_interval_hull(z1);
  EXPECT_EQ(b1.lower[0], -1.0);
  EXPECT_EQ(b1.upper[1], 1.0);

  Mat G(2, 2);
  G << 1, 1, 1, -1;
  Box b2 = zono_interval_hull(Zonotope(Vec::Zero(2), G));
  EXPECT_EQ(b2.lower[0], -2.0);
  EXPECT_EQ(b2.upper[0], 2.0);
  EXPECT_EQ(b2.lower[1], -2.0);
  EXPECT_EQ(b2.upper[1], 2.0);

  Box b3 = zono_interval_hull(Zonotope((Vec(2) << 5, 6).finished(), Mat(2, 0)));
  EXPECT_EQ(b3.lower[0], 5.0);
  EXPECT_EQ(b3.upper[0], 5.0);
}

TEST(ZonoOrderReduce, AlreadyWithinOrderUnchanged) {
  Zonotope z(Vec::Zero(2), Mat::Identity(2, 2));
  Zonotope r = zono_order_reduce(z, 2.0);
  EXPECT_EQ(r.n_generators(), 2);
  EXPECT_EQ(r.generators, z.generators);
}

TEST(ZonoOrderReduce, SixGeneratorsToOrderTwo) {
  Rng rng(3);
  Mat G = gnr::testing::random_mat(rng, 2, 6);
  Zonotope z(Vec::Zero(2), G);
  Zonotope r = zono_order_reduce(z, 2.0);
  EXPECT_EQ(r.n_generators(), 4);
  for (int i = 0; i < 10000; ++i) {
    Vec x = z.sample(rng);
    EXPECT_TRUE(zono_contains_point(r, x));
  }
}

TEST(ZonoOrderReduce, OrderOneIsIntervalHull) {
  Rng rng(9);
  Mat G = gnr::testing::random_mat(rng, 2, 5);
  Zonotope z((Vec(2) << 0.3, -0.2).finished(), G);
  Zonotope r = zono_order_reduce(z, 1.0);
  EXPECT_EQ(r.n_generators(), 2);
  Box hull = zono_interval_hull(z);
  Box rhull = zono_interval_hull(r);
  EXPECT_NEAR((hull.lower - rhull.lower).norm(), 0.0, 1e-12);
  EXPECT_NEAR((hull.upper - rhull.upper).norm(), 0.0, 1e-12);
}

TEST(ZonoEncloseStep, CoversBothEndsAndSegments) {
  Rng rng(8);
  Mat G = gnr::testing::random_mat(rng, 2, 3);
  Zonotope z1(Vec::Zero(2), G);
  Mat W(2, 2);
  W << 0.9, 0.1, -0.1, 0.9;
  Zonotope z2 = zono_affine_map(z1, W, (Vec(2) << 0.2, 0).finished());
  Zonotope e = zono_enclose_step(z1, z2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    Vec beta(3);
    for (Index j = 0; j < 3; ++j) beta[j] = u(rng);
    Vec a = z1.point_at(beta);
    Vec b = z2.point_at(beta);
    double s = 0.5 * (u(rng) + 1.0);
    Vec mid = (1 - s) * a + s * b;
    EXPECT_TRUE(zono_contains_point(e, a));
    EXPECT_TRUE(zono_contains_point(e, b));
    EXPECT_TRUE(zono_contains_point(e, mid));
  }
}

TEST(Conversions, StarZonoStarSoundness) {
  Rng rng(21);
  StarSet s = triangle_star();
  Zonotope z = star_to_zonotope(s);
  StarSet back = zonotope_to_star(z);
  for (int i = 0; i < 2000; ++i) {
    Vec x = star_sample(s, rng);
    EXPECT_TRUE(star_contains_point(back, x));
  }
}

TEST(BoxStar, DegenerateCoordinatesFoldIntoCenter) {
  Box b((Vec(3) << 0, -1, 2).finished(), (Vec(3) << 0, 1, 2).finished());
  StarSet s = StarSet::from_box(b);
  EXPECT_EQ(s.pred_dim(), 1);
  EXPECT_TRUE(star_contains_point(s, (Vec(3) << 0, 0.5, 2).finished()));
  EXPECT_FALSE(star_contains_point(s, (Vec(3) << 0.1, 0.5, 2).finished()));
}

}  // namespace
