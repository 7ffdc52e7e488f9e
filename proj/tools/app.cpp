#include "app.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

#include "gnr/log.hpp"

namespace fs = std::filesystem;

namespace gnr::app {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write file", path.string());
  out << text;
}

GnodeModel load_with_overrides(const CommonConfig& cfg) {
  GnodeModel m = load_model(cfg.model_path);
  if (cfg.tf_override > 0.0 || cfg.step_override > 0.0) {
    for (auto& l : m.layers) {
      if (!layer_is_node(l)) continue;
      auto& nl = std::get<NodeLayer>(l);
      if (cfg.tf_override > 0.0) nl.time.t_f = cfg.tf_override;
      if (cfg.step_override > 0.0) nl.time.step = cfg.step_override;
    }
  }
  return m;
}

Json config_to_json(const CommonConfig& cfg, const std::string& subcommand) {
  Json j{{"subcommand", subcommand},
         {"model", cfg.model_path},
         {"mode", cfg.mode},
         {"seed", cfg.seed},
         {"threads", cfg.threads}};
  if (!cfg.input_set_path.empty()) j["input_set"] = cfg.input_set_path;
  if (!cfg.center.empty()) {
    j["center"] = vec_to_json(
        Eigen::Map<const Vec>(cfg.center.data(),
                              static_cast<Index>(cfg.center.size())));
    j["delta"] = real_to_json(cfg.delta);
  }
  if (cfg.tf_override > 0.0) j["tf_override"] = real_to_json(cfg.tf_override);
  if (cfg.step_override > 0.0) j["step_override"] = real_to_json(cfg.step_override);
  return j;
}

// Polygon of one star projected onto (dx_dim, dy_dim): support points in 64
// directions, deduplicated in order.
std::vector<std::pair<double, double>> star_polygon(const StarSet& s,
                                                    Index dim_x, Index dim_y) {
  constexpr int kDirs = 64;
  std::vector<std::pair<double, double>> pts;
  pts.reserve(kDirs);
  for (int k = 0; k < kDirs; ++k) {
    double theta = 2.0 * std::numbers::pi * k / kDirs;
    auto p = star_support_point_2d(s, dim_x, dim_y, std::cos(theta),
                                   std::sin(theta));
    if (!pts.empty()) {
      auto [px, py] = pts.back();
      if (std::abs(px - p.first) < 1e-12 && std::abs(py - p.second) < 1e-12)
        continue;
    }
    pts.push_back(p);
  }
  if (pts.size() > 1) {
    auto [fx, fy] = pts.front();
    auto [lx, ly] = pts.back();
    if (std::abs(fx - lx) < 1e-12 && std::abs(fy - ly) < 1e-12) pts.pop_back();
  }
  return pts;
}

Box union_box(const std::vector<TimedStar>& sets) {
  Box b = star_box_cheap(sets.front().star);
  for (size_t i = 1; i < sets.size(); ++i)
    b = b.hull(star_box_cheap(sets[i].star));
  return b;
}

double box_volume(const Box& b) {
  double v = 1.0;
  for (Index i = 0; i < b.dim(); ++i) v *= b.upper[i] - b.lower[i];
  return v;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < n) {
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

ReachMode parse_mode(const std::string& mode) {
  if (mode == "approx") return ReachMode::ApproxStar;
  if (mode == "exact") return ReachMode::ExactStar;
  throw SchemaError("mode must be approx or exact", "--mode");
}

StarSet resolve_input_set(const CommonConfig& cfg, Index expected_dim) {
  const bool has_file = !cfg.input_set_path.empty();
  const bool has_center = !cfg.center.empty();
  if (has_file == has_center)
    throw SchemaError("exactly one of --input-set or --center is required",
                      "input");
  StarSet s;
  if (has_file) {
    std::ifstream in(cfg.input_set_path);
    if (!in) throw SchemaError("cannot open input set", cfg.input_set_path);
    Json j;
    in >> j;
    s = input_set_from_json(j, cfg.input_set_path);
  } else {
    Vec c = Eigen::Map<const Vec>(cfg.center.data(),
                                  static_cast<Index>(cfg.center.size()));
    if (cfg.delta < 0.0) throw SchemaError("--delta must be >= 0", "--delta");
    s = StarSet::from_box(Box(c.array() - cfg.delta, c.array() + cfg.delta));
  }
  if (expected_dim > 0 && s.dim() != expected_dim)
    throw DimensionError("input set dimension does not match the model");
  return s;
}

int cmd_reach(const ReachConfig& cfg) {
  GnodeModel model = load_with_overrides(cfg);
  StarSet r0 = resolve_input_set(cfg, model.input_dim());
  ReachMode mode = parse_mode(cfg.mode);

  double t0 = now_seconds();
  ReachResult rr = reach(model, r0, mode);
  double total = now_seconds() - t0;
  log_info("reach finished in " + fmt(total, "%.3f") + " s");

  Json layers = Json::array();
  for (const auto& lr : rr.layers) {
    Json sets = Json::array();
    for (const auto& ts : lr.sets)
      sets.push_back(Json{{"t_lo", real_to_json(ts.t_lo)},
                          {"t_hi", real_to_json(ts.t_hi)},
                          {"set", star_to_json(ts.star)}});
    layers.push_back(Json{{"method", lr.method},
                          {"wall_ms", lr.wall_ms},
                          {"sets", std::move(sets)}});
  }
  Json pipes = Json::array();
  for (const auto& bf : rr.flowpipes)
    pipes.push_back(Json{{"layer", bf.layer},
                         {"branch", bf.branch},
                         {"pipe", flowpipe_to_json(bf.pipe)}});
  Json finals = Json::array();
  for (const auto& ts : rr.final_sets())
    finals.push_back(Json{{"t_lo", real_to_json(ts.t_lo)},
                          {"t_hi", real_to_json(ts.t_hi)},
                          {"set", star_to_json(ts.star)}});

  Json doc{{"format", "gnode-reach-result/1"},
           {"config", config_to_json(cfg, "reach")},
           {"model_name", model.name},
           {"input", star_to_json(r0)},
           {"layers", std::move(layers)},
           {"flowpipes", std::move(pipes)},
           {"final", std::move(finals)},
           {"times", Json{{"total_s", total}}}};
  write_text(fs::path(cfg.out_dir) / "reach_result.json", canonical_text(doc));

  if (!cfg.project.empty()) {
    if (cfg.project.size() != 2)
      throw SchemaError("--project needs exactly two dimension indices",
                        "--project");
    Index dx = cfg.project[0], dy = cfg.project[1];
    std::string csv = "step,t_lo,t_hi,x,y\n";
    const auto& finals_sets = rr.final_sets();
    for (size_t k = 0; k < finals_sets.size(); ++k) {
      auto poly = star_polygon(finals_sets[k].star, dx, dy);
      for (const auto& [x, y] : poly) {
        csv += std::to_string(k) + "," + fmt(finals_sets[k].t_lo, "%.9g") + "," +
               fmt(finals_sets[k].t_hi, "%.9g") + "," + fmt(x, "%.12g") + "," +
               fmt(y, "%.12g") + "\n";
      }
    }
    write_text(fs::path(cfg.out_dir) /
                   ("projection_" + std::to_string(dx) + "_" +
                    std::to_string(dy) + ".csv"),
               csv);
  }
  return kExitOk;
}

int cmd_verify(const VerifyConfig& cfg) {
  GnodeModel model = load_with_overrides(cfg);
  std::ifstream in(cfg.spec_path);
  if (!in) throw SchemaError("cannot open spec file", cfg.spec_path);
  Json sj;
  in >> sj;
  SpecDocument spec = spec_from_json(sj);

  VerifyOptions opts;
  opts.falsify_budget = cfg.falsify_budget;
  opts.seed = cfg.seed;

  SpecResult res;
  if (spec.kind == SpecDocument::Kind::Robustness) {
    res = check_robustness(model, spec.robustness, parse_mode(cfg.mode), opts);
  } else {
    StarSet r0 = resolve_input_set(cfg, model.input_dim());
    res = verify_safety(model, r0, spec.unsafe, spec.scope,
                        parse_mode(cfg.mode), opts);
  }

  Json doc = verdict_to_json(res);
  doc["config"] = config_to_json(cfg, "verify");
  doc["spec"] = sj;
  write_text(fs::path(cfg.out_dir) / "verdict.json", canonical_text(doc));

  if (res.nominal_misclassified) return kExitMisclassified;
  switch (res.verdict) {
    case Verdict::Holds: return kExitOk;
    case Verdict::Violated: return kExitViolated;
    case Verdict::Unknown: return kExitUnknown;
  }
  return kExitEngine;
}

int cmd_simulate(const SimulateConfig& cfg) {
  GnodeModel model = load_with_overrides(cfg);
  if (cfg.center.empty())
    throw SchemaError("simulate requires --center", "--center");
  Vec x0 = Eigen::Map<const Vec>(cfg.center.data(),
                                 static_cast<Index>(cfg.center.size()));
  SimOptions opts;
  opts.record_trajectories = cfg.trace;
  SimResult res = simulate(model, x0, opts);

  Json doc{{"format", "gnode-sim-result/1"},
           {"config", config_to_json(cfg, "simulate")},
           {"output", vec_to_json(res.output)}};
  if (cfg.trace) {
    Json traces = Json::array();
    for (const auto& tr : res.traces) {
      Json samples = Json::array();
      for (const auto& [t, x] : tr.samples)
        samples.push_back(Json{{"t", real_to_json(t)}, {"x", vec_to_json(x)}});
      traces.push_back(Json{{"layer", tr.layer}, {"samples", std::move(samples)}});
    }
    doc["traces"] = std::move(traces);
  }
  write_text(fs::path(cfg.out_dir) / "simulate_result.json", canonical_text(doc));
  return kExitOk;
}

int cmd_fixture(const FixtureConfig& cfg) {
  FixtureRecipe recipe;
  recipe.name = cfg.name;
  recipe.seed = cfg.seed;
  recipe.n_aug = cfg.n_aug;
  recipe.variant = cfg.variant;
  recipe.control_steps = cfg.control_steps;
  Json doc = fixture_document(recipe);
  write_text(cfg.out_path, canonical_text(doc));
  return kExitOk;
}

namespace {

struct RunStats {
  double seconds = 0.0;
  double volume = 0.0;
};

RunStats run_reach(const GnodeModel& model, const Box& input) {
  double t0 = now_seconds();
  ReachResult rr = reach(model, StarSet::from_box(input), ReachMode::ApproxStar);
  RunStats st;
  st.seconds = now_seconds() - t0;
  st.volume = box_volume(union_box(rr.final_sets()));
  return st;
}

int bench_damped_oscillator(const BenchConfig& cfg) {
  std::string csv = "n_aug,reach_seconds,final_box_volume\n";
  for (int n_aug : {0, 1, 2}) {
    FixtureRecipe r;
    r.name = "damped_oscillator";
    r.seed = cfg.seed;
    r.n_aug = n_aug;
    GnodeModel m = generate_fixture(r);
    auto st = run_reach(m, fixture_default_input_box("damped_oscillator", 0.01));
    csv += std::to_string(n_aug) + "," + fmt(st.seconds, "%.4f") + "," +
           fmt(st.volume) + "\n";
    log_info("damped_oscillator n_aug=" + std::to_string(n_aug) + " done");
  }
  write_text(fs::path(cfg.out_dir) / "damped_oscillator.csv", csv);
  return kExitOk;
}

int bench_random_gnode(const BenchConfig& cfg) {
  const std::vector<std::string> sizes = {"XS", "S", "M", "L", "XL", "XXL"};
  std::string csv = "delta";
  for (const auto& s : sizes) csv += "," + s;
  csv += "\n";
  for (double delta : {0.01, 0.02, 0.04}) {
    csv += fmt(delta, "%.2f");
    for (const auto& size : sizes) {
      FixtureRecipe r;
      r.name = "random_gnode";
      r.seed = cfg.seed;
      r.variant = size;
      GnodeModel m = generate_fixture(r);
      auto st = run_reach(m, fixture_default_input_box("random_gnode_" + size, delta));
      csv += "," + fmt(st.seconds, "%.4f");
    }
    csv += "\n";
  }
  write_text(fs::path(cfg.out_dir) / "random_gnode.csv", csv);
  return kExitOk;
}

int bench_spiral(const BenchConfig& cfg) {
  std::string csv = "name,delta,reach_seconds,final_box_volume\n";
  for (const char* name : {"spiral_linear", "spiral_nonlinear"}) {
    for (double delta : {0.01, 0.05, 0.1}) {
      FixtureRecipe r;
      r.name = name;
      r.seed = cfg.seed;
      GnodeModel m = generate_fixture(r);
      auto st = run_reach(m, fixture_default_input_box(name, delta));
      csv += std::string(name) + "," + fmt(delta, "%.2f") + "," +
             fmt(st.seconds, "%.4f") + "," + fmt(st.volume) + "\n";
    }
  }
  write_text(fs::path(cfg.out_dir) / "spiral.csv", csv);
  return kExitOk;
}

int bench_fpa(const BenchConfig& cfg) {
  std::string csv = "time_horizon,delta,reach_seconds,final_box_volume\n";
  for (double th : {0.5, 2.5, 10.0}) {
    FixtureRecipe r;
    r.name = "fpa";
    r.seed = cfg.seed;
    GnodeModel m = generate_fixture(r);
    for (auto& l : m.layers)
      if (layer_is_node(l)) std::get<NodeLayer>(l).time.t_f = th;
    auto st = run_reach(m, fixture_default_input_box("fpa", 0.01));
    csv += fmt(th, "%.2f") + ",0.01," + fmt(st.seconds, "%.4f") + "," +
           fmt(st.volume) + "\n";
  }
  write_text(fs::path(cfg.out_dir) / "fpa.csv", csv);
  return kExitOk;
}

int bench_acc(const BenchConfig& cfg) {
  // Safe-distance check: unsafe when D_rel - 1.4 v_ego <= 10.
  Vec normal = Vec::Zero(8);
  normal[0] = 1.0;
  normal[3] = -1.0;
  normal[4] = -1.4;
  HalfspaceSpec unsafe(normal, 10.0);

  std::string csv = "variant,cp,verdict,reach_seconds\n";
  for (const char* variant : {"linear", "nonlinear"}) {
    FixtureRecipe r;
    r.name = "acc_unrolled";
    r.seed = cfg.seed;
    r.variant = variant;
    r.control_steps = 5;
    GnodeModel m = generate_fixture(r);
    Box in = fixture_default_input_box("acc_unrolled", 0.1);
    VerifyOptions opts;
    opts.seed = cfg.seed;
    double t0 = now_seconds();
    SpecResult res = verify_safety(m, StarSet::from_box(in), unsafe,
                                   SafetyScope::FlowpipeScope,
                                   ReachMode::ApproxStar, opts);
    double secs = now_seconds() - t0;
    csv += std::string(variant) + ",5," + verdict_name(res.verdict) + "," +
           fmt(secs, "%.4f") + "\n";
    log_info(std::string("acc ") + variant + ": " + verdict_name(res.verdict));
  }
  write_text(fs::path(cfg.out_dir) / "acc.csv", csv);
  return kExitOk;
}

// Table-4-style robustness protocol on the FNODE_S-shaped fixture: 50 images,
// epsilon over all pixels and over a random 80-pixel subset.
int bench_mnist_robustness(const BenchConfig& cfg) {
  FixtureRecipe r;
  r.name = "fnode_s";
  r.seed = cfg.seed;
  GnodeModel model = generate_fixture(r);
  const Index n = model.input_dim();
  const int images = cfg.images;

  const std::vector<double> eps_all = {0.5, 1.0, 2.0};
  const std::vector<double> eps_sub = {2.55, 12.75, 25.5};

  struct Cell {
    std::atomic<int> robust{0};
    std::atomic<int> evaluated{0};
    std::atomic<double> seconds{0.0};
  };
  std::vector<Cell> cells(eps_all.size() + eps_sub.size());

  auto run_image = [&](int img) {
    Rng img_rng(cfg.seed * 1000003ull + static_cast<std::uint64_t>(img));
    std::uniform_real_distribution<double> pix(0.0, 255.0);
    Vec z(n);
    for (Index i = 0; i < n; ++i) z[i] = pix(img_rng);
    // 80-pixel mask, distinct indices
    std::vector<Index> mask;
    {
      std::vector<Index> all(static_cast<size_t>(n));
      std::iota(all.begin(), all.end(), Index{0});
      std::shuffle(all.begin(), all.end(), img_rng);
      mask.assign(all.begin(), all.begin() + 80);
      std::sort(mask.begin(), mask.end());
    }
    for (size_t e = 0; e < eps_all.size() + eps_sub.size(); ++e) {
      RobustnessQuery q;
      q.nominal = z;
      if (e < eps_all.size()) {
        q.epsilon = eps_all[e];
      } else {
        q.epsilon = eps_sub[e - eps_all.size()];
        q.mask = mask;
      }
      VerifyOptions opts;
      opts.seed = cfg.seed + static_cast<std::uint64_t>(img);
      opts.falsify_budget = 200;
      double t0 = now_seconds();
      SpecResult res = check_robustness(model, q, ReachMode::ApproxStar, opts);
      double secs = now_seconds() - t0;
      auto& cell = cells[e];
      cell.evaluated.fetch_add(1);
      if (res.verdict == Verdict::Holds) cell.robust.fetch_add(1);
      double old = cell.seconds.load();
      while (!cell.seconds.compare_exchange_weak(old, old + secs)) {
      }
    }
  };
  parallel_for(images, cfg.threads, run_image);

  std::string csv = "name,acc";
  for (double e : eps_all) csv += ",rob_all_" + fmt(e, "%.4g") + ",t_all_" + fmt(e, "%.4g");
  for (double e : eps_sub) csv += ",rob_sub80_" + fmt(e, "%.4g") + ",t_sub80_" + fmt(e, "%.4g");
  csv += "\nFNODE_S,1.00";
  for (const auto& cell : cells) {
    double frac = cell.evaluated.load() > 0
                      ? static_cast<double>(cell.robust.load()) /
                            cell.evaluated.load()
                      : 0.0;
    double avg = cell.evaluated.load() > 0
                     ? cell.seconds.load() / cell.evaluated.load()
                     : 0.0;
    csv += "," + fmt(frac, "%.2f") + "," + fmt(avg, "%.4f");
  }
  csv += "\n";
  write_text(fs::path(cfg.out_dir) / "mnist_robustness.csv", csv);
  return kExitOk;
}

}  // namespace

int cmd_bench(const BenchConfig& cfg) {
  if (cfg.suite == "damped_oscillator") return bench_damped_oscillator(cfg);
  if (cfg.suite == "random_gnode") return bench_random_gnode(cfg);
  if (cfg.suite == "spiral") return bench_spiral(cfg);
  if (cfg.suite == "fpa") return bench_fpa(cfg);
  if (cfg.suite == "acc") return bench_acc(cfg);
  if (cfg.suite == "mnist_robustness") return bench_mnist_robustness(cfg);
  throw SchemaError("unknown bench suite '" + cfg.suite + "'", "--suite");
}

}  // namespace gnr::app
