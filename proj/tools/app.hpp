#ifndef GNR_TOOLS_APP_HPP_
#define GNR_TOOLS_APP_HPP_

#include <optional>
#include <string>
#include <vector>

#include "gnr/model_io.hpp"

namespace gnr::app {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitEngine = 2;
inline constexpr int kExitViolated = 3;
inline constexpr int kExitUnknown = 4;
inline constexpr int kExitMisclassified = 5;

struct CommonConfig {
  std::string model_path;
  std::string input_set_path;
  std::vector<double> center;
  double delta = 0.0;
  std::string mode = "approx";
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  double step_override = 0.0;  // 0 = keep model value
  double tf_override = 0.0;
};

struct ReachConfig : CommonConfig {
  std::vector<int> project;  // empty or {i, j}
};

struct VerifyConfig : CommonConfig {
  std::string spec_path;
  Index falsify_budget = 1000;
};

struct SimulateConfig : CommonConfig {
  bool trace = false;
};

struct BenchConfig : CommonConfig {
  std::string suite;
  int images = 50;  // mnist_robustness protocol size
};

struct FixtureConfig {
  std::string name;
  std::string out_path;
  std::uint64_t seed = 0;
  int n_aug = 0;
  std::string variant;
  int control_steps = 5;
};

int cmd_reach(const ReachConfig& cfg);
int cmd_verify(const VerifyConfig& cfg);
int cmd_simulate(const SimulateConfig& cfg);
int cmd_bench(const BenchConfig& cfg);
int cmd_fixture(const FixtureConfig& cfg);

// Resolves the input star from exactly one of --input-set / --center+--delta.
StarSet resolve_input_set(const CommonConfig& cfg, Index expected_dim);

ReachMode parse_mode(const std::string& mode);

}  // namespace gnr::app

#endif  // GNR_TOOLS_APP_HPP_
