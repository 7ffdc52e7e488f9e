#ifndef GNR_MODEL_IO_HPP_
#define GNR_MODEL_IO_HPP_

#include <json.hpp>

#include <filesystem>
#include <string>

#include "gnr/gnode.hpp"
#include "gnr/verify.hpp"

namespace gnr {

using Json = nlohmann::ordered_json;

// All real payloads are serialized as decimal strings with 17 significant
// digits so files round-trip bit-exactly through text.
Json real_to_json(double v);
double real_from_json(const Json& j, const std::string& where);
Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j, const std::string& where);
Json mat_to_json(const Mat& m);  // array of rows
Mat mat_from_json(const Json& j, const std::string& where);

// --- set files (.set.json) --------------------------------------------------
Json box_to_json(const Box& b);
Json zonotope_to_json(const Zonotope& z);
Json star_to_json(const StarSet& s);
Json reach_set_to_json(const ReachSet& s);
Json flowpipe_to_json(const Flowpipe& fp);

Box box_from_json(const Json& j, const std::string& where = "$");
StarSet star_from_json(const Json& j, const std::string& where = "$");
Zonotope zonotope_from_json(const Json& j, const std::string& where = "$");

// Any set document ({"type": "box"|"star"|"zonotope"}) as a star.
StarSet input_set_from_json(const Json& j, const std::string& where = "$");

// --- model files (.gnode.json) ----------------------------------------------
Json model_to_json(const GnodeModel& m);
GnodeModel model_from_json(const Json& j);

// Canonical text form (2-space indent, trailing newline); identical bytes for
// identical models.
std::string canonical_text(const Json& j);

GnodeModel load_model(const std::filesystem::path& path);
void save_model(const GnodeModel& m, const std::filesystem::path& path);

// --- spec files (.spec.json) -------------------------------------------------
struct SpecDocument {
  enum class Kind { Safety, Robustness } kind = Kind::Safety;
  HalfspaceSpec unsafe;                 // safety
  SafetyScope scope = SafetyScope::Final;
  RobustnessQuery robustness;           // robustness
};

SpecDocument spec_from_json(const Json& j);
Json verdict_to_json(const SpecResult& r);

// --- fixtures -----------------------------------------------------------------
// Seeded stand-ins for the benchmark architectures; layer shapes follow the
// published tables, weights are Glorot-uniform scaled by 0.5.
struct FixtureRecipe {
  std::string name;       // spiral_linear, spiral_nonlinear, damped_oscillator,
                          // fpa, cartpole, acc_3rd_order, acc_unrolled,
                          // fnode_s, fnode_m, fnode_l, random_gnode
  std::uint64_t seed = 0;
  int n_aug = 0;                  // damped_oscillator
  std::string variant;            // acc: linear|nonlinear; random_gnode: XS..XXL
  int control_steps = 5;          // acc_unrolled
};

GnodeModel generate_fixture(const FixtureRecipe& recipe);
Json fixture_document(const FixtureRecipe& recipe);

// The ACC closed loop as parts, for callers that need the NncsSpec itself.
NncsSpec acc_nncs_spec(const std::string& variant, std::uint64_t seed,
                       int control_steps);

// Nominal initial box used by the benchmark suites for a fixture.
Box fixture_default_input_box(const std::string& name, double delta);

std::vector<std::string> fixture_names();

}  // namespace gnr

#endif  // GNR_MODEL_IO_HPP_
