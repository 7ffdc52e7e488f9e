#include <algorithm>
#include <cmath>

#include "gnr/model_io.hpp"

namespace gnr {

namespace {

// Glorot-uniform scaled by 0.5; keeps seeded NODE dynamics well conditioned
// at the default fixed step.
Mat glorot(Rng& rng, Index rows, Index cols) {
  double a = 0.5 * std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-a, a);
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

Vec glorot_bias(Rng& rng, Index rows, Index cols) {
  double a = 0.5 * std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-a, a);
  Vec b(rows);
  for (Index i = 0; i < rows; ++i) b[i] = u(rng);
  return b;
}

FcLayer seeded_fc(Rng& rng, Index out, Index in, Activation act) {
  Mat w = glorot(rng, out, in);
  Vec b = glorot_bias(rng, out, in);
  return FcLayer(std::move(w), std::move(b), act);
}

GnodeModel spiral(std::uint64_t seed, bool nonlinear) {
  Rng rng(seed);
  GnodeModel m;
  m.name = nonlinear ? "spiral_nonlinear" : "spiral_linear";
  Activation hidden = nonlinear ? Activation::Tanh : Activation::Linear;
  NodeDynamics dyn({seeded_fc(rng, 10, 2, hidden), seeded_fc(rng, 2, 10, Activation::Linear)});
  m.layers.emplace_back(NodeLayer{dyn, {10.0, 0.02, OutputMode::FlowpipeMode}});
  return m;
}

GnodeModel damped_oscillator(std::uint64_t seed, int n_aug) {
  if (n_aug < 0) throw DimensionError("damped_oscillator: n_aug must be >= 0");
  Rng rng(seed);
  const Index d = 2 + n_aug;
  GnodeModel m;
  m.name = "damped_oscillator_naug" + std::to_string(n_aug);
  m.layers.emplace_back(seeded_fc(rng, d, 2, Activation::Linear));
  NodeDynamics dyn({seeded_fc(rng, 20, d, Activation::Linear),
                    seeded_fc(rng, 20, 20, Activation::Linear),
                    seeded_fc(rng, d, 20, Activation::Linear)});
  m.layers.emplace_back(NodeLayer{dyn, {1.0, 0.01, OutputMode::FlowpipeMode}});
  m.layers.emplace_back(seeded_fc(rng, 2, d, Activation::Linear));
  return m;
}

// Shape stand-ins: the published benchmarks reference external model files,
// so only the state dimensions are meaningful here.
GnodeModel fpa(std::uint64_t seed) {
  Rng rng(seed);
  GnodeModel m;
  m.name = "fpa";
  NodeDynamics dyn({seeded_fc(rng, 16, 2, Activation::Tanh),
                    seeded_fc(rng, 2, 16, Activation::Linear)});
  m.layers.emplace_back(NodeLayer{dyn, {2.5, 0.01, OutputMode::FlowpipeMode}});
  return m;
}

GnodeModel cartpole(std::uint64_t seed) {
  Rng rng(seed);
  GnodeModel m;
  m.name = "cartpole";
  NodeDynamics dyn({seeded_fc(rng, 16, 4, Activation::Tanh),
                    seeded_fc(rng, 16, 16, Activation::Tanh),
                    seeded_fc(rng, 4, 16, Activation::Linear)});
  m.layers.emplace_back(NodeLayer{dyn, {1.0, 0.005, OutputMode::FlowpipeMode}});
  return m;
}

// Third-order NODE plant: 6 kinematic states plus the two held accelerations
// (a_lead, a_ego). The learned core y' = g([gamma_lead, gamma_ego, a_lead,
// a_ego]) supplies the jerk of both cars.
NodeDynamics acc_plant_dynamics(const std::string& variant, std::uint64_t seed) {
  const bool nonlinear = variant == "nonlinear";
  if (!nonlinear && variant != "linear")
    throw DimensionError("acc_3rd_order: variant must be linear or nonlinear");
  Rng rng(seed);
  const Index hidden = nonlinear ? 10 : 20;
  const Activation act = nonlinear ? Activation::Tanh : Activation::Linear;
  Mat wa = glorot(rng, hidden, 4);
  Vec ba = glorot_bias(rng, hidden, 4);
  Mat wb = glorot(rng, 4, hidden);
  Vec bb = glorot_bias(rng, 4, hidden);

  // Passthrough block carries [x2, x3, x5, x6]; the core reads
  // z = [x3, x6, a_lead, a_ego] = indices (2, 5, 6, 7).
  const std::vector<Index> pass = {1, 2, 4, 5};
  const std::vector<Index> core_in = {2, 5, 6, 7};

  Mat w1 = Mat::Zero(4 + hidden, 8);
  for (Index i = 0; i < 4; ++i) w1(i, pass[static_cast<size_t>(i)]) = 1.0;
  for (Index i = 0; i < hidden; ++i)
    for (Index j = 0; j < 4; ++j)
      w1(4 + i, core_in[static_cast<size_t>(j)]) = wa(i, j);
  Vec b1 = Vec::Zero(4 + hidden);
  b1.tail(hidden) = ba;

  Mat w2 = Mat::Zero(8, 4 + hidden);
  w2.topLeftCorner(4, 4) = Mat::Identity(4, 4);
  w2.bottomRightCorner(4, hidden) = wb;
  Vec b2 = Vec::Zero(8);
  b2.tail(4) = bb;

  // [p1..p4, g1..g4] -> state derivatives per the third-order layout.
  Mat w3 = Mat::Zero(8, 8);
  w3(0, 0) = 1.0;  // x1' = x2
  w3(1, 1) = 1.0;  // x2' = x3
  w3(2, 4) = 1.0;  // x3' = g1
  w3(3, 2) = 1.0;  // x4' = x5
  w3(4, 3) = 1.0;  // x5' = x6
  w3(5, 5) = 1.0;  // x6' = g2
  // rows 6, 7 stay zero: held accelerations

  return NodeDynamics({FcLayer(w1, b1, act, 0.01, 4),
                       FcLayer(w2, b2, act, 0.01, 4),
                       FcLayer(w3, Vec::Zero(8), Activation::Linear)});
}

GnodeModel acc_plant_model(const std::string& variant, std::uint64_t seed) {
  GnodeModel m;
  m.name = "acc_3rd_order_" + variant;
  m.layers.emplace_back(
      NodeLayer{acc_plant_dynamics(variant, seed), {0.1, 0.01, OutputMode::FinalSet}});
  return m;
}

GnodeModel random_gnode(const std::string& size, std::uint64_t seed) {
  struct Shape {
    Index input, fc, node_hidden, node_state, output;
  };
  // inputs {1,2,2,3,3,4}, NODE states {2,3,4,4,5,5}, outputs mirror inputs
  Shape shape;
  if (size == "XS") shape = {1, 2, 2, 2, 1};
  else if (size == "S") shape = {2, 3, 5, 3, 2};
  else if (size == "M") shape = {2, 4, 8, 4, 2};
  else if (size == "L") shape = {3, 4, 8, 4, 3};
  else if (size == "XL") shape = {3, 5, 10, 5, 3};
  else if (size == "XXL") shape = {4, 5, 10, 5, 4};
  else throw DimensionError("random_gnode: size must be XS..XXL");

  Rng rng(seed);
  GnodeModel m;
  m.name = "random_gnode_" + size;
  m.layers.emplace_back(seeded_fc(rng, shape.fc, shape.input, Activation::Tanh));
  NodeDynamics node1({seeded_fc(rng, shape.node_hidden, shape.node_state, Activation::Tanh),
                      seeded_fc(rng, shape.node_state, shape.node_hidden, Activation::Tanh)});
  m.layers.emplace_back(NodeLayer{node1, {1.0, 0.01, OutputMode::FinalSet}});
  m.layers.emplace_back(seeded_fc(rng, shape.fc, shape.node_state, Activation::Tanh));
  NodeDynamics node2({seeded_fc(rng, shape.node_state, shape.node_state, Activation::Tanh)});
  m.layers.emplace_back(NodeLayer{node2, {1.0, 0.01, OutputMode::FinalSet}});
  m.layers.emplace_back(seeded_fc(rng, shape.output, shape.node_state, Activation::Tanh));
  return m;
}

GnodeModel fnode(const std::string& size, std::uint64_t seed) {
  Rng rng(seed);
  GnodeModel m;
  m.name = "fnode_" + size;
  if (size == "s") {
    m.layers.emplace_back(seeded_fc(rng, 64, 784, Activation::Relu));
    m.layers.emplace_back(seeded_fc(rng, 10, 64, Activation::Relu));
    NodeDynamics dyn({seeded_fc(rng, 10, 10, Activation::Linear)});
    m.layers.emplace_back(NodeLayer{dyn, {1.0, 0.01, OutputMode::FinalSet}});
    m.layers.emplace_back(seeded_fc(rng, 10, 10, Activation::Softmax));
  } else if (size == "m") {
    m.layers.emplace_back(seeded_fc(rng, 64, 784, Activation::Relu));
    m.layers.emplace_back(seeded_fc(rng, 32, 64, Activation::Relu));
    m.layers.emplace_back(seeded_fc(rng, 16, 32, Activation::Linear));
    NodeDynamics dyn({seeded_fc(rng, 10, 16, Activation::Linear),
                      seeded_fc(rng, 16, 10, Activation::Linear)});
    m.layers.emplace_back(NodeLayer{dyn, {1.0, 0.01, OutputMode::FinalSet}});
    m.layers.emplace_back(seeded_fc(rng, 10, 16, Activation::Softmax));
  } else if (size == "l") {
    m.layers.emplace_back(seeded_fc(rng, 64, 784, Activation::Relu));
    m.layers.emplace_back(seeded_fc(rng, 32, 64, Activation::Relu));
    m.layers.emplace_back(seeded_fc(rng, 32, 32, Activation::Relu));
    m.layers.emplace_back(seeded_fc(rng, 32, 32, Activation::Relu));
    m.layers.emplace_back(seeded_fc(rng, 16, 32, Activation::Linear));
    NodeDynamics dyn({seeded_fc(rng, 10, 16, Activation::Linear),
                      seeded_fc(rng, 10, 10, Activation::Linear),
                      seeded_fc(rng, 10, 10, Activation::Linear),
                      seeded_fc(rng, 16, 10, Activation::Linear)});
    m.layers.emplace_back(NodeLayer{dyn, {1.0, 0.01, OutputMode::FinalSet}});
    m.layers.emplace_back(seeded_fc(rng, 10, 16, Activation::Softmax));
  } else {
    throw DimensionError("fnode: size must be s, m, or l");
  }
  return m;
}

GnodeModel acc_controller(std::uint64_t seed) {
  Rng rng(seed + 0x9e3779b97f4a7c15ull);
  GnodeModel c;
  c.name = "acc_controller";
  c.layers.emplace_back(seeded_fc(rng, 16, 2, Activation::Relu));
  c.layers.emplace_back(seeded_fc(rng, 16, 16, Activation::Relu));
  c.layers.emplace_back(seeded_fc(rng, 1, 16, Activation::Linear));
  return c;
}

}  // namespace

NncsSpec acc_nncs_spec(const std::string& variant, std::uint64_t seed,
                       int control_steps) {
  NncsSpec spec;
  spec.controller = acc_controller(seed);
  spec.plant = acc_plant_dynamics(variant, seed);
  spec.period = {0.1, 0.01, OutputMode::FinalSet};
  spec.feedback = {1, 4};      // v_lead, v_ego
  spec.control_slots = {7};    // a_ego
  spec.control_steps = control_steps;
  return spec;
}

GnodeModel generate_fixture(const FixtureRecipe& recipe) {
  const std::string& n = recipe.name;
  if (n == "spiral_linear") return spiral(recipe.seed, false);
  if (n == "spiral_nonlinear") return spiral(recipe.seed, true);
  if (n == "damped_oscillator") return damped_oscillator(recipe.seed, recipe.n_aug);
  if (n == "fpa") return fpa(recipe.seed);
  if (n == "cartpole") return cartpole(recipe.seed);
  if (n == "acc_3rd_order")
    return acc_plant_model(recipe.variant.empty() ? "linear" : recipe.variant,
                           recipe.seed);
  if (n == "acc_unrolled") {
    auto spec = acc_nncs_spec(recipe.variant.empty() ? "linear" : recipe.variant,
                              recipe.seed, recipe.control_steps);
    GnodeModel m = unroll_nncs(spec);
    m.name = "acc_unrolled_" + (recipe.variant.empty() ? "linear" : recipe.variant) +
             "_cp" + std::to_string(recipe.control_steps);
    return m;
  }
  if (n == "fnode_s") return fnode("s", recipe.seed);
  if (n == "fnode_m") return fnode("m", recipe.seed);
  if (n == "fnode_l") return fnode("l", recipe.seed);
  if (n == "random_gnode")
    return random_gnode(recipe.variant.empty() ? "XS" : recipe.variant, recipe.seed);
  throw DimensionError("generate_fixture: unknown fixture '" + n + "'");
}

Json fixture_document(const FixtureRecipe& recipe) {
  return model_to_json(generate_fixture(recipe));
}

Box fixture_default_input_box(const std::string& name, double delta) {
  auto centered = [&](Vec c) {
    return Box(c.array() - delta, c.array() + delta);
  };
  if (name == "spiral_linear" || name == "spiral_nonlinear")
    return centered((Vec(2) << 2.0, 0.0).finished());
  if (name == "damped_oscillator") return centered((Vec(2) << 1.0, 1.0).finished());
  if (name == "fpa") return centered((Vec(2) << 0.5, 0.5).finished());
  if (name == "cartpole")
    return centered((Vec(4) << 0.1, 0.0, 0.05, 0.0).finished());
  if (name == "acc_3rd_order" || name == "acc_unrolled") {
    // [x_lead, v_lead, gamma_lead, x_ego, v_ego, gamma_ego, a_lead, a_ego]
    Vec c(8);
    c << 100.0, 32.1, 0.0, 10.5, 30.1, 0.0, -2.0, 0.0;
    Vec lo = c, hi = c;
    for (Index i = 0; i < 6; ++i) {
      lo[i] -= delta;
      hi[i] += delta;
    }
    return Box(lo, hi);
  }
  if (name.rfind("random_gnode", 0) == 0) {
    Index dims = 1;
    if (name.size() > 13) {
      const std::string size = name.substr(13);
      if (size == "XS") dims = 1;
      else if (size == "S" || size == "M") dims = 2;
      else if (size == "L" || size == "XL") dims = 3;
      else if (size == "XXL") dims = 4;
    }
    return centered(Vec::Constant(dims, 0.5));
  }
  if (name.rfind("fnode", 0) == 0) return centered(Vec::Constant(784, 127.5));
  throw DimensionError("fixture_default_input_box: unknown fixture '" + name + "'");
}

std::vector<std::string> fixture_names() {
  return {"spiral_linear", "spiral_nonlinear", "damped_oscillator", "fpa",
          "cartpole",      "acc_3rd_order",    "acc_unrolled",
          "fnode_s",       "fnode_m",          "fnode_l", "random_gnode"};
}

}  // namespace gnr
