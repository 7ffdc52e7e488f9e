// End-to-end tests of the gnode-reach binary; the path comes in argv[1].

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gnr/model_io.hpp"

namespace fs = std::filesystem;
using gnr::Json;

namespace {

std::string g_binary;

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = g_binary + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return res;
  std::string out;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  int status = pclose(pipe);
  res.exit_code = WEXITSTATUS(status);
  res.stdout_text = std::move(out);
  return res;
}

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "gnr_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drop timing payloads before comparing result files.
void strip_timing(Json& j) {
  if (j.is_object()) {
    j.erase("wall_ms");
    j.erase("times");
    j.erase("reach_ms");
    j.erase("check_ms");
    for (auto& [k, v] : j.items()) strip_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing(v);
  }
}

std::string stripped(const fs::path& p) {
  Json j = Json::parse(slurp(p));
  strip_timing(j);
  return j.dump(2);
}

TEST(Cli, FixtureThenReachPointInput) {
  auto dir = temp_dir();
  auto model = dir / "identity_node.gnode.json";
  // frozen scalar NODE: z' = 0
  Json doc{{"format", "gnode-model/1"},
           {"name", "frozen"},
           {"layers",
            Json::array({Json{{"kind", "node"},
                              {"t_f", "1"},
                              {"step", "0.1"},
                              {"output_mode", "final_set"},
                              {"dynamics",
                               Json::array({Json{{"kind", "fc"},
                                                 {"activation", "linear"},
                                                 {"W", Json::array({Json::array({"0"})})},
                                                 {"b", Json::array({"0"})}}})}}})}};
  std::ofstream(model) << doc.dump(2) << "\n";

  auto out = dir / "reach_frozen";
  auto res = run_cli("reach --model " + model.string() + " --center 0.7 --delta 0 --out " + out.string());
  EXPECT_EQ(res.exit_code, 0);
  Json result = Json::parse(slurp(out / "reach_result.json"));
  EXPECT_EQ(result["format"], "gnode-reach-result/1");
  auto center = result["final"][0]["set"]["center"];
  EXPECT_EQ(std::stod(center[0].get<std::string>()), 0.7);
}

TEST(Cli, SpiralFixtureFlowpipeAndProjection) {
  auto dir = temp_dir();
  auto model = dir / "spiral_nl.gnode.json";
  auto res = run_cli("fixture --name spiral_nonlinear --seed 3 --out " + model.string());
  ASSERT_EQ(res.exit_code, 0);

  auto out = dir / "reach_spiral";
  res = run_cli("reach --model " + model.string() +
                " --center 2,0 --delta 0.01 --tf 1 --project 0 1 --out " +
                out.string());
  ASSERT_EQ(res.exit_code, 0);

  Json result = Json::parse(slurp(out / "reach_result.json"));
  const auto& steps = result["flowpipes"][0]["pipe"]["steps"];
  ASSERT_GE(steps.size(), 50u);
  double prev_hi = 0.0;
  for (const auto& st : steps) {
    double lo = std::stod(st["t_lo"].get<std::string>());
    double hi = std::stod(st["t_hi"].get<std::string>());
    EXPECT_NEAR(lo, prev_hi, 1e-12);
    prev_hi = hi;
  }
  EXPECT_NEAR(prev_hi, 1.0, 1e-9);

  // Each step polygon has at least 3 vertices.
  std::istringstream csv(slurp(out / "projection_0_1.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "step,t_lo,t_hi,x,y");
  std::map<int, int> counts;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    counts[std::stoi(line.substr(0, line.find(',')))]++;
  }
  ASSERT_FALSE(counts.empty());
  for (const auto& [step, count] : counts) EXPECT_GE(count, 3) << "step " << step;
}

TEST(Cli, VerifyExitCodes) {
  auto dir = temp_dir();
  auto model = dir / "drift.gnode.json";
  Json doc{{"format", "gnode-model/1"},
           {"name", "drift"},
           {"layers",
            Json::array({Json{{"kind", "node"},
                              {"t_f", "2"},
                              {"step", "0.1"},
                              {"output_mode", "flowpipe"},
                              {"dynamics",
                               Json::array({Json{{"kind", "fc"},
                                                 {"activation", "linear"},
                                                 {"W", Json::array({Json::array({"0"})})},
                                                 {"b", Json::array({"1"})}}})}}})}};
  std::ofstream(model) << doc.dump(2) << "\n";

  // unsafe x >= 1.5 -> reached at t = 1.5: violated, exit 3
  auto spec_hit = dir / "hit.spec.json";
  std::ofstream(spec_hit) << Json{{"type", "safety"},
                                  {"normal", Json::array({"-1"})},
                                  {"offset", "-1.5"},
                                  {"over", "flowpipe"}}
                                 .dump(2);
  auto res = run_cli("verify --model " + model.string() + " --spec " + spec_hit.string() +
                     " --center 0 --delta 0 --out " + (dir / "v1").string());
  EXPECT_EQ(res.exit_code, 3);
  Json verdict = Json::parse(slurp(dir / "v1" / "verdict.json"));
  EXPECT_EQ(verdict["verdict"], "violated");
  EXPECT_FALSE(verdict["witness"].is_null());

  // unsafe x <= -1: never reached, exit 0
  auto spec_safe = dir / "safe.spec.json";
  std::ofstream(spec_safe) << Json{{"type", "safety"},
                                   {"normal", Json::array({"1"})},
                                   {"offset", "-1"},
                                   {"over", "flowpipe"}}
                                  .dump(2);
  res = run_cli("verify --model " + model.string() + " --spec " + spec_safe.string() +
                " --center 0 --delta 0 --out " + (dir / "v2").string());
  EXPECT_EQ(res.exit_code, 0);
}

TEST(Cli, VerifyRobustnessSpec) {
  auto dir = temp_dir();
  auto model = dir / "cls.gnode.json";
  // y = x (2 classes) with a trivial frozen NODE appended
  Json fc{{"kind", "fc"},
          {"activation", "linear"},
          {"W", Json::array({Json::array({"1", "0"}), Json::array({"0", "1"})})},
          {"b", Json::array({"0", "0"})}};
  Json node{{"kind", "node"},
            {"t_f", "1"},
            {"step", "0.1"},
            {"output_mode", "final_set"},
            {"dynamics",
             Json::array({Json{{"kind", "fc"},
                               {"activation", "linear"},
                               {"W", Json::array({Json::array({"0", "0"}),
                                                  Json::array({"0", "0"})})},
                               {"b", Json::array({"0", "0"})}}})}};
  std::ofstream(model) << Json{{"format", "gnode-model/1"},
                               {"name", "cls"},
                               {"layers", Json::array({fc, node})}}
                              .dump(2);

  auto spec = dir / "rob.spec.json";
  std::ofstream(spec) << Json{{"type", "robustness"},
                              {"nominal", Json::array({"1", "0"})},
                              {"epsilon", "0.4"},
                              {"clamp", nullptr}}
                             .dump(2);
  auto res = run_cli("verify --model " + model.string() + " --spec " + spec.string() +
                     " --out " + (dir / "v3").string());
  EXPECT_EQ(res.exit_code, 0);

  auto spec2 = dir / "rob2.spec.json";
  std::ofstream(spec2) << Json{{"type", "robustness"},
                               {"nominal", Json::array({"1", "0"})},
                               {"epsilon", "0.6"},
                               {"clamp", nullptr}}
                              .dump(2);
  res = run_cli("verify --model " + model.string() + " --spec " + spec2.string() +
                " --out " + (dir / "v4").string());
  EXPECT_EQ(res.exit_code, 3);
}

TEST(Cli, UsageErrorsExitOne) {
  auto dir = temp_dir();
  auto res = run_cli("reach --model /nonexistent.gnode.json --center 0 --out " +
                     (dir / "x").string());
  EXPECT_EQ(res.exit_code, 1);
  res = run_cli("bench --suite bogus --out " + (dir / "x").string());
  EXPECT_EQ(res.exit_code, 1);
}

TEST(Cli, RerunsAreByteIdenticalModuloTiming) {
  auto dir = temp_dir();
  auto model = dir / "rg.gnode.json";
  auto res = run_cli("fixture --name random_gnode --variant XS --seed 9 --out " +
                     model.string());
  ASSERT_EQ(res.exit_code, 0);
  std::string fixture_once = slurp(model);
  res = run_cli("fixture --name random_gnode --variant XS --seed 9 --out " +
                model.string());
  ASSERT_EQ(res.exit_code, 0);
  EXPECT_EQ(fixture_once, slurp(model));

  auto out1 = dir / "r1";
  auto out2 = dir / "r2";
  std::string reach_args = "reach --model " + model.string() +
                           " --center 0.5 --delta 0.01 --seed 4 --out ";
  ASSERT_EQ(run_cli(reach_args + out1.string()).exit_code, 0);
  ASSERT_EQ(run_cli(reach_args + out2.string()).exit_code, 0);
  EXPECT_EQ(stripped(out1 / "reach_result.json"), stripped(out2 / "reach_result.json"));
}

TEST(Cli, SimulateWritesOutput) {
  auto dir = temp_dir();
  auto model = dir / "dec.gnode.json";
  Json doc{{"format", "gnode-model/1"},
           {"name", "decay"},
           {"layers",
            Json::array({Json{{"kind", "node"},
                              {"t_f", "1"},
                              {"step", "0.01"},
                              {"output_mode", "final_set"},
                              {"dynamics",
                               Json::array({Json{{"kind", "fc"},
                                                 {"activation", "linear"},
                                                 {"W", Json::array({Json::array({"-1"})})},
                                                 {"b", Json::array({"0"})}}})}}})}};
  std::ofstream(model) << doc.dump(2);
  auto out = dir / "sim";
  auto res = run_cli("simulate --model " + model.string() + " --center 1 --trace --out " +
                     out.string());
  ASSERT_EQ(res.exit_code, 0);
  Json sim = Json::parse(slurp(out / "simulate_result.json"));
  double y = std::stod(sim["output"][0].get<std::string>());
  EXPECT_NEAR(y, std::exp(-1.0), 1e-8);
  EXPECT_GE(sim["traces"][0]["samples"].size(), 100u);
}

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-gnode-reach>\n");
    return 1;
  }
  g_binary = argv[1];
  return RUN_ALL_TESTS();
}
