#ifndef GNR_VERIFY_HPP_
#define GNR_VERIFY_HPP_

#include <optional>
#include <utility>

#include "gnr/gnode.hpp"

namespace gnr {

// L-infinity robustness query. Perturbations are applied in raw input units
// (pixel convention: pre-normalization values in [0, 255], clamped when
// building the perturbation box). `mask` restricts the perturbed coordinates.
struct RobustnessQuery {
  Vec nominal;
  double epsilon = 0.0;
  std::optional<std::vector<Index>> mask;
  std::optional<int> label;  // defaults to the model's own argmax
  std::optional<std::pair<double, double>> clamp = std::pair{0.0, 255.0};
};

enum class Verdict { Holds, Violated, Unknown };

const char* verdict_name(Verdict v);

struct ClassBounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct SpecResult {
  Verdict verdict = Verdict::Unknown;
  std::optional<Vec> witness;
  std::vector<ClassBounds> class_bounds;           // robustness queries
  bool nominal_misclassified = false;
  std::optional<std::pair<double, double>> violating_time;
  double reach_ms = 0.0;
  double check_ms = 0.0;
};

enum class SafetyScope { Final, FlowpipeScope };

struct VerifyOptions {
  Index falsify_budget = 1000;
  std::uint64_t seed = 0;
  ReachOptions reach;
};

// Definition-9 check: the model is robust at `nominal` if every input in the
// perturbation box classifies to the nominal label. Sound: `holds` is proved
// by the over-approximate reach set; `violated` always carries a concrete,
// re-simulated witness; otherwise `unknown`.
SpecResult check_robustness(const GnodeModel& model, const RobustnessQuery& q,
                            ReachMode mode, const VerifyOptions& opts = {});

// Pure set check on an existing reach result: holds iff the unsafe halfspace
// misses every selected set. Never returns Violated (no model available);
// see verify_safety for the falsification-completed driver.
SpecResult check_safety(const ReachResult& result, const HalfspaceSpec& unsafe,
                        SafetyScope scope);

// reach + check_safety + falsification of `unknown` verdicts.
SpecResult verify_safety(const GnodeModel& model, const StarSet& r0,
                         const HalfspaceSpec& unsafe, SafetyScope scope,
                         ReachMode mode, const VerifyOptions& opts = {});

struct FalsifySpec {
  // exactly one of the two is active
  std::optional<HalfspaceSpec> unsafe;
  SafetyScope scope = SafetyScope::Final;
  std::optional<int> robust_label;
};

// Uniform + boundary-biased sampling of r0; every returned witness has been
// confirmed by simulation.
std::optional<Vec> falsify(const GnodeModel& model, const StarSet& r0,
                           const FalsifySpec& spec, Index budget,
                           std::uint64_t seed);

// Perturbation box of a robustness query (mask + clamp applied).
Box robustness_input_box(const RobustnessQuery& q, Index input_dim);

int argmax_class(const Vec& scores);

}  // namespace gnr

#endif  // GNR_VERIFY_HPP_
