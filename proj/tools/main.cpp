#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "app.hpp"

namespace {

using namespace gnr;
using namespace gnr::app;

void add_common(CLI::App* sub, CommonConfig& cfg, bool with_input = true) {
  sub->add_option("--model", cfg.model_path, "Model file (.gnode.json)")
      ->required();
  if (with_input) {
    sub->add_option("--input-set", cfg.input_set_path,
                    "Input set file (.set.json)");
    sub->add_option("--center", cfg.center,
                    "Nominal input point (box center)")
        ->delimiter(',');
    sub->add_option("--delta", cfg.delta, "Box half-width around --center");
  }
  sub->add_option("--mode", cfg.mode, "Reach mode: approx|exact")
      ->check(CLI::IsMember({"approx", "exact"}));
  sub->add_option("--out", cfg.out_dir, "Output directory");
  sub->add_option("--seed", cfg.seed, "RNG seed (fixtures, falsification)");
  sub->add_option("--threads", cfg.threads, "Worker thread cap");
  sub->add_option("--step", cfg.step_override, "Override NODE step size");
  sub->add_option("--tf", cfg.tf_override, "Override NODE time horizon");
}

int error_exit(int code, const char* type, const std::string& msg) {
  gnr::Json err{{"error", {{"type", type}, {"message", msg}}}};
  std::fprintf(stderr, "%s\n", err.dump().c_str());
  return code;
}

int dispatch(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const SchemaError& e) {
    return error_exit(kExitUsage, "schema", e.what());
  } catch (const DimensionError& e) {
    return error_exit(kExitUsage, "dimension", e.what());
  } catch (const StepSizeError& e) {
    return error_exit(kExitEngine, "step_size", e.what());
  } catch (const BranchLimitError& e) {
    return error_exit(kExitEngine, "branch_limit", e.what());
  } catch (const UnboundedError& e) {
    return error_exit(kExitEngine, "unbounded", e.what());
  } catch (const EmptySetError& e) {
    return error_exit(kExitEngine, "empty_set", e.what());
  } catch (const SolverError& e) {
    return error_exit(kExitEngine, "solver", e.what());
  } catch (const NumericError& e) {
    return error_exit(kExitEngine, "numeric", e.what());
  } catch (const UnsupportedError& e) {
    return error_exit(kExitUsage, "unsupported", e.what());
  } catch (const std::exception& e) {
    return error_exit(kExitEngine, "internal", e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnode-reach: reachability analysis and verification of "
               "general neural ODEs"};
  app.require_subcommand(1);

  ReachConfig reach_cfg;
  auto* reach_cmd = app.add_subcommand("reach", "Compute reachable sets");
  add_common(reach_cmd, reach_cfg);
  reach_cmd->add_option("--project", reach_cfg.project,
                        "Export a 2-D polygon CSV for these two dims")
      ->expected(2);

  VerifyConfig verify_cfg;
  auto* verify_cmd =
      app.add_subcommand("verify", "Check a safety or robustness spec");
  add_common(verify_cmd, verify_cfg);
  verify_cmd->add_option("--spec", verify_cfg.spec_path, "Spec file (.spec.json)")
      ->required();
  verify_cmd->add_option("--budget", verify_cfg.falsify_budget,
                         "Falsification sample budget");

  SimulateConfig sim_cfg;
  auto* sim_cmd = app.add_subcommand("simulate", "Integrate one input point");
  add_common(sim_cmd, sim_cfg);
  sim_cmd->add_flag("--trace", sim_cfg.trace, "Record NODE trajectories");

  BenchConfig bench_cfg;
  auto* bench_cmd = app.add_subcommand("bench", "Run a named benchmark suite");
  bench_cmd
      ->add_option("--suite", bench_cfg.suite,
                   "damped_oscillator|random_gnode|spiral|fpa|acc|"
                   "mnist_robustness")
      ->required();
  bench_cmd->add_option("--out", bench_cfg.out_dir, "Output directory");
  bench_cmd->add_option("--seed", bench_cfg.seed, "Fixture RNG seed");
  bench_cmd->add_option("--threads", bench_cfg.threads, "Worker thread cap");
  bench_cmd->add_option("--images", bench_cfg.images,
                        "Image count for mnist_robustness");

  FixtureConfig fix_cfg;
  auto* fix_cmd =
      app.add_subcommand("fixture", "Generate a benchmark model fixture");
  fix_cmd->add_option("--name", fix_cfg.name, "Fixture name")->required();
  fix_cmd->add_option("--out", fix_cfg.out_path, "Output model path")->required();
  fix_cmd->add_option("--seed", fix_cfg.seed, "Weight RNG seed");
  fix_cmd->add_option("--n-aug", fix_cfg.n_aug, "Augmented dims (damped_oscillator)");
  fix_cmd->add_option("--variant", fix_cfg.variant,
                      "linear|nonlinear (acc) or XS..XXL (random_gnode)");
  fix_cmd->add_option("--cp", fix_cfg.control_steps, "Control steps (acc_unrolled)");

  CLI11_PARSE(app, argc, argv);

  if (reach_cmd->parsed()) return dispatch([&] { return cmd_reach(reach_cfg); });
  if (verify_cmd->parsed()) return dispatch([&] { return cmd_verify(verify_cfg); });
  if (sim_cmd->parsed()) return dispatch([&] { return cmd_simulate(sim_cfg); });
  if (bench_cmd->parsed()) return dispatch([&] { return cmd_bench(bench_cfg); });
  if (fix_cmd->parsed()) return dispatch([&] { return cmd_fixture(fix_cfg); });
  return kExitUsage;
}
