#include <benchmark/benchmark.h>

#include <random>

#include "gnr/gnode.hpp"
#include "gnr/linprog.hpp"
#include "gnr/model_io.hpp"

namespace {

using namespace gnr;

LpProblem random_lp(Index m, Index k, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  LpProblem p;
  p.objective = Vec::NullaryExpr(m, [&](Index) { return g(rng); });
  p.ineq = Mat::NullaryExpr(k, m, [&](Index, Index) { return g(rng); });
  Vec x0 = Vec::Zero(m);
  p.rhs = p.ineq * x0 + Vec::Constant(k, 0.5);
  p.lower = Vec::Constant(m, -2.0);
  p.upper = Vec::Constant(m, 2.0);
  return p;
}

void BM_LpSolveSmall(benchmark::State& state) {
  LpProblem p = random_lp(state.range(0), 2 * state.range(0), 7);
  for (auto _ : state) {
    auto out = lp_solve(p);
    benchmark::DoNotOptimize(out.value);
  }
}
BENCHMARK(BM_LpSolveSmall)->Arg(8)->Arg(32)->Arg(96);

void BM_ReluLayerReach(benchmark::State& state) {
  Rng rng(11);
  const Index n = state.range(0);
  std::normal_distribution<double> g(0.0, 0.5);
  Mat w = Mat::NullaryExpr(n, n, [&](Index, Index) { return g(rng); });
  FcLayer layer(w, Vec::Zero(n), Activation::Relu);
  StarSet s = StarSet::from_box(Box(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)));
  for (auto _ : state) {
    auto out = fc_reach(layer, s, ReachMode::ApproxStar);
    benchmark::DoNotOptimize(out.front().center);
  }
}
BENCHMARK(BM_ReluLayerReach)->Arg(4)->Arg(8)->Arg(16);

void BM_MatrixExponential(benchmark::State& state) {
  Rng rng(13);
  const Index n = state.range(0);
  std::normal_distribution<double> g(0.0, 0.3);
  Mat a = Mat::NullaryExpr(n, n, [&](Index, Index) { return g(rng); });
  for (auto _ : state) {
    Mat e = matrix_exponential(a, 0.01);
    benchmark::DoNotOptimize(e(0, 0));
  }
}
BENCHMARK(BM_MatrixExponential)->Arg(4)->Arg(8)->Arg(16);

void BM_NonlinearReachStep(benchmark::State& state) {
  FixtureRecipe r;
  r.name = "spiral_nonlinear";
  GnodeModel m = generate_fixture(r);
  const auto& dyn = std::get<NodeLayer>(m.layers[0]).dynamics;
  Zonotope z0 = star_to_zonotope(
      StarSet::from_box(fixture_default_input_box("spiral_nonlinear", 0.01)));
  TimeConfig tc{0.1, 0.01, OutputMode::FinalSet};
  for (auto _ : state) {
    Flowpipe fp = nonlinear_reach(dyn, z0, tc);
    benchmark::DoNotOptimize(fp.final_point);
  }
}
BENCHMARK(BM_NonlinearReachStep);

void BM_SpiralReachEndToEnd(benchmark::State& state) {
  FixtureRecipe r;
  r.name = "spiral_nonlinear";
  GnodeModel m = generate_fixture(r);
  for (auto& l : m.layers)
    if (layer_is_node(l)) std::get<NodeLayer>(l).time.t_f = 1.0;
  StarSet r0 = StarSet::from_box(fixture_default_input_box("spiral_nonlinear", 0.01));
  for (auto _ : state) {
    auto res = reach(m, r0, ReachMode::ApproxStar);
    benchmark::DoNotOptimize(res.final_sets().front().star.center);
  }
}
BENCHMARK(BM_SpiralReachEndToEnd);

}  // namespace

BENCHMARK_MAIN();
