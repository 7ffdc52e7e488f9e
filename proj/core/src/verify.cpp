#include "gnr/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace gnr {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

int argmax_class(const Vec& scores) {
  Index best = 0;
  scores.maxCoeff(&best);
  return static_cast<int>(best);
}

Box robustness_input_box(const RobustnessQuery& q, Index input_dim) {
  check_dims(q.nominal.size() == input_dim,
             "robustness: nominal input dimension mismatch");
  if (q.epsilon < 0.0) throw DimensionError("robustness: epsilon must be >= 0");
  std::vector<bool> perturbed(static_cast<size_t>(input_dim), true);
  if (q.mask) {
    perturbed.assign(static_cast<size_t>(input_dim), false);
    for (Index idx : *q.mask) {
      if (idx < 0 || idx >= input_dim)
        throw DimensionError("robustness: mask index out of range");
      perturbed[static_cast<size_t>(idx)] = true;
    }
  }
  Vec lo = q.nominal, hi = q.nominal;
  for (Index i = 0; i < input_dim; ++i) {
    if (!perturbed[static_cast<size_t>(i)]) continue;
    lo[i] -= q.epsilon;
    hi[i] += q.epsilon;
    if (q.clamp) {
      lo[i] = std::clamp(lo[i], q.clamp->first, q.clamp->second);
      hi[i] = std::clamp(hi[i], q.clamp->first, q.clamp->second);
      if (lo[i] > hi[i]) lo[i] = hi[i];
    }
  }
  return Box(std::move(lo), std::move(hi));
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

// Boundary-biased star sampling: half the draws project a random subset of
// predicate variables onto their bounds.
Vec biased_star_sample(const StarSet& s, Rng& rng) {
  Vec alpha = star_sample_alpha(s, rng);
  std::bernoulli_distribution flip(0.5);
  if (s.pred_lb && s.pred_ub && flip(rng)) {
    std::bernoulli_distribution pick(0.4);
    std::bernoulli_distribution side(0.5);
    for (Index j = 0; j < alpha.size(); ++j) {
      if (!pick(rng)) continue;
      double b = side(rng) ? (*s.pred_ub)[j] : (*s.pred_lb)[j];
      if (std::isfinite(b)) alpha[j] = b;
    }
    if (s.n_constraints() > 0 && !((s.P * alpha - s.d).array() <= 0.0).all())
      return s.point_at(star_sample_alpha(s, rng));
  }
  return s.point_at(alpha);
}

}  // namespace

SpecResult check_robustness(const GnodeModel& model, const RobustnessQuery& q,
                            ReachMode mode, const VerifyOptions& opts) {
  const Index n = model.input_dim();
  const Index classes = model.output_dim();
  if (classes < 2)
    throw DimensionError("check_robustness: model must output >= 2 classes");

  SpecResult res;
  Vec nominal_scores = simulate(model, q.nominal).output;
  const int own_class = argmax_class(nominal_scores);
  const int label = q.label.value_or(own_class);
  if (own_class != label) {
    res.verdict = Verdict::Unknown;
    res.nominal_misclassified = true;
    return res;
  }

  auto t0 = std::chrono::steady_clock::now();
  Box zp = robustness_input_box(q, n);
  StarSet r0 = StarSet::from_box(zp);
  ReachResult rr = reach(model, r0, mode, opts.reach);
  res.reach_ms = elapsed_ms(t0);

  auto t1 = std::chrono::steady_clock::now();
  res.class_bounds.assign(static_cast<size_t>(classes), ClassBounds{kInf, -kInf});
  bool separated = true;
  for (const auto& ts : rr.final_sets()) {
    std::vector<ClassBounds> branch(static_cast<size_t>(classes));
    for (Index c = 0; c < classes; ++c) {
      auto [lo, hi] = star_bounds(ts.star, c);
      branch[static_cast<size_t>(c)] = {lo, hi};
      auto& joined = res.class_bounds[static_cast<size_t>(c)];
      joined.lo = std::min(joined.lo, lo);
      joined.hi = std::max(joined.hi, hi);
    }
    const double label_lo = branch[static_cast<size_t>(label)].lo;
    for (Index c = 0; c < classes && separated; ++c) {
      if (c == label) continue;
      if (branch[static_cast<size_t>(c)].hi >= label_lo) separated = false;
    }
    if (!separated) break;
  }
  res.check_ms = elapsed_ms(t1);

  if (separated) {
    res.verdict = Verdict::Holds;
    return res;
  }

  FalsifySpec fs;
  fs.robust_label = label;
  if (auto w = falsify(model, r0, fs, opts.falsify_budget, opts.seed)) {
    res.verdict = Verdict::Violated;
    res.witness = std::move(w);
  } else {
    res.verdict = Verdict::Unknown;
  }
  return res;
}

SpecResult check_safety(const ReachResult& result, const HalfspaceSpec& unsafe,
                        SafetyScope scope) {
  SpecResult res;
  auto t0 = std::chrono::steady_clock::now();

  auto probe = [&](const StarSet& s, double t_lo, double t_hi) {
    check_dims(unsafe.normal.size() == s.dim(),
               "check_safety: dimension mismatch");
    if (star_intersect_halfspace(s, unsafe)) {
      if (!res.violating_time) res.violating_time = {t_lo, t_hi};
      return false;
    }
    return true;
  };

  bool all_clear = true;
  if (scope == SafetyScope::FlowpipeScope) {
    // Interior NODE flowpipes are checked only when their state space matches
    // the spec; downstream images are covered by the final sets.
    for (const auto& bf : result.flowpipes) {
      for (const auto& st : bf.pipe.steps) {
        if (reach_set_dim(st.set) != unsafe.normal.size()) break;
        all_clear &= probe(reach_set_as_star(st.set), st.t_lo, st.t_hi);
      }
    }
  }
  for (const auto& ts : result.final_sets())
    all_clear &= probe(ts.star, ts.t_lo, ts.t_hi);

  res.check_ms = elapsed_ms(t0);
  res.verdict = all_clear ? Verdict::Holds : Verdict::Unknown;
  return res;
}

SpecResult verify_safety(const GnodeModel& model, const StarSet& r0,
                         const HalfspaceSpec& unsafe, SafetyScope scope,
                         ReachMode mode, const VerifyOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  ReachResult rr = reach(model, r0, mode, opts.reach);
  double reach_ms = elapsed_ms(t0);
  SpecResult res = check_safety(rr, unsafe, scope);
  res.reach_ms = reach_ms;
  if (res.verdict == Verdict::Holds) return res;

  FalsifySpec fs;
  fs.unsafe = unsafe;
  fs.scope = scope;
  if (auto w = falsify(model, r0, fs, opts.falsify_budget, opts.seed)) {
    res.verdict = Verdict::Violated;
    res.witness = std::move(w);
  }
  return res;
}

std::optional<Vec> falsify(const GnodeModel& model, const StarSet& r0,
                           const FalsifySpec& spec, Index budget,
                           std::uint64_t seed) {
  if (budget < 1) throw DimensionError("falsify: budget must be >= 1");
  Rng rng(seed);
  SimOptions sim_opts;
  const bool trajectory_spec =
      spec.unsafe && spec.scope == SafetyScope::FlowpipeScope;
  sim_opts.record_trajectories = trajectory_spec;

  for (Index i = 0; i < budget; ++i) {
    Vec x0 = biased_star_sample(r0, rng);
    SimResult sim = simulate(model, x0, sim_opts);
    if (spec.robust_label) {
      if (argmax_class(sim.output) != *spec.robust_label) return x0;
      continue;
    }
    if (!spec.unsafe) continue;
    auto in_unsafe = [&](const Vec& x) {
      return spec.unsafe->normal.dot(x) <= spec.unsafe->offset;
    };
    if (in_unsafe(sim.output)) return x0;
    if (trajectory_spec) {
      bool hit = false;
      for (const auto& tr : sim.traces)
        for (const auto& [t, x] : tr.samples)
          if (in_unsafe(x)) {
            hit = true;
            break;
          }
      if (hit) return x0;
    }
  }
  return std::nullopt;
}

}  // namespace gnr
