#include "gnr/model_io.hpp"

#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace gnr;

namespace {

Json minimal_identity_doc() {
  return Json{{"format", "gnode-model/1"},
              {"name", "id"},
              {"layers", Json::array({Json{{"kind", "fc"},
                                           {"activation", "linear"},
                                           {"W", Json::array({Json::array({"1"})})},
                                           {"b", Json::array({"0"})}}})}};
}

TEST(ModelIo, MinimalIdentityDocument) {
  GnodeModel m = model_from_json(minimal_identity_doc());
  EXPECT_EQ(m.n_layers(), 1);
  EXPECT_EQ(m.input_dim(), 1);
  Vec out = simulate(m, (Vec(1) << 3.5).finished()).output;
  EXPECT_EQ(out[0], 3.5);
}

TEST(ModelIo, MismatchedBiasNamesLayer) {
  Json doc = minimal_identity_doc();
  doc["layers"][0]["b"] = Json::array({"0", "0"});
  try {
    model_from_json(doc);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(e.location().find("layers/0"), std::string::npos) << e.location();
  }
}

TEST(ModelIo, UnknownActivationLocated) {
  Json doc = minimal_identity_doc();
  doc["layers"][0]["activation"] = "softplus";
  EXPECT_THROW(model_from_json(doc), SchemaError);
}

TEST(ModelIo, DimensionChainBreakLocated) {
  Json doc = minimal_identity_doc();
  Json second = doc["layers"][0];
  second["W"] = Json::array({Json::array({"1", "0"}), Json::array({"0", "1"})});
  second["b"] = Json::array({"0", "0"});
  doc["layers"].push_back(second);
  EXPECT_THROW(model_from_json(doc), SchemaError);
}

TEST(ModelIo, RoundTripIsByteStable) {
  for (const char* name : {"spiral_nonlinear", "damped_oscillator", "random_gnode"}) {
    FixtureRecipe r;
    r.name = name;
    r.seed = 42;
    r.n_aug = 1;
    r.variant = "S";
    std::string first = canonical_text(fixture_document(r));
    GnodeModel loaded = model_from_json(Json::parse(first));
    std::string second = canonical_text(model_to_json(loaded));
    EXPECT_EQ(first, second) << name;
  }
}

TEST(ModelIo, SeedDeterminism) {
  FixtureRecipe r;
  r.name = "spiral_nonlinear";
  r.seed = 7;
  std::string a = canonical_text(fixture_document(r));
  std::string b = canonical_text(fixture_document(r));
  EXPECT_EQ(a, b);
  r.seed = 8;
  EXPECT_NE(a, canonical_text(fixture_document(r)));
}

struct FcShape {
  Index out, in;
  Activation act;
};

void expect_fc(const Layer& l, const FcShape& s) {
  ASSERT_FALSE(layer_is_node(l));
  const auto& fc = std::get<FcLayer>(l);
  EXPECT_EQ(fc.out_dim(), s.out);
  EXPECT_EQ(fc.in_dim(), s.in);
  EXPECT_EQ(fc.act, s.act);
}

void expect_node(const Layer& l, const std::vector<FcShape>& dyn) {
  ASSERT_TRUE(layer_is_node(l));
  const auto& nd = std::get<NodeLayer>(l).dynamics;
  ASSERT_EQ(nd.layers.size(), dyn.size());
  for (size_t i = 0; i < dyn.size(); ++i) {
    EXPECT_EQ(nd.layers[i].out_dim(), dyn[i].out);
    EXPECT_EQ(nd.layers[i].in_dim(), dyn[i].in);
    EXPECT_EQ(nd.layers[i].act, dyn[i].act);
  }
}

// Shape manifest mirroring the published architecture tables.
TEST(FixtureShapes, SpiralModels) {
  FixtureRecipe r;
  r.name = "spiral_nonlinear";
  GnodeModel nl = generate_fixture(r);
  ASSERT_EQ(nl.n_layers(), 1);
  expect_node(nl.layers[0], {{10, 2, Activation::Tanh}, {2, 10, Activation::Linear}});

  r.name = "spiral_linear";
  GnodeModel lin = generate_fixture(r);
  expect_node(lin.layers[0], {{10, 2, Activation::Linear}, {2, 10, Activation::Linear}});
  EXPECT_TRUE(std::get<NodeLayer>(lin.layers[0]).dynamics.is_linear());
}

TEST(FixtureShapes, DampedOscillatorAugmented) {
  for (int n_aug : {0, 1, 2}) {
    FixtureRecipe r;
    r.name = "damped_oscillator";
    r.n_aug = n_aug;
    GnodeModel m = generate_fixture(r);
    const Index d = 2 + n_aug;
    ASSERT_EQ(m.n_layers(), 3);
    expect_fc(m.layers[0], {d, 2, Activation::Linear});
    expect_node(m.layers[1], {{20, d, Activation::Linear},
                              {20, 20, Activation::Linear},
                              {d, 20, Activation::Linear}});
    expect_fc(m.layers[2], {2, d, Activation::Linear});
  }
}

TEST(FixtureShapes, RandomGnodeGrid) {
  struct Row {
    const char* size;
    Index input, fc, hidden, state, output;
  };
  // Table-derived: inputs {1,2,2,3,3,4}, NODE states {2,3,4,4,5,5}
  for (const Row& row : std::initializer_list<Row>{{"XS", 1, 2, 2, 2, 1},
                                                   {"S", 2, 3, 5, 3, 2},
                                                   {"M", 2, 4, 8, 4, 2},
                                                   {"L", 3, 4, 8, 4, 3},
                                                   {"XL", 3, 5, 10, 5, 3},
                                                   {"XXL", 4, 5, 10, 5, 4}}) {
    FixtureRecipe r;
    r.name = "random_gnode";
    r.variant = row.size;
    GnodeModel m = generate_fixture(r);
    ASSERT_EQ(m.n_layers(), 5) << row.size;
    expect_fc(m.layers[0], {row.fc, row.input, Activation::Tanh});
    expect_node(m.layers[1], {{row.hidden, row.state, Activation::Tanh},
                              {row.state, row.hidden, Activation::Tanh}});
    expect_fc(m.layers[2], {row.fc, row.state, Activation::Tanh});
    expect_node(m.layers[3], {{row.state, row.state, Activation::Tanh}});
    expect_fc(m.layers[4], {row.output, row.state, Activation::Tanh});
    EXPECT_EQ(m.n_node_layers(), 2);
    EXPECT_EQ(m.input_dim(), row.input);
    EXPECT_EQ(m.output_dim(), row.output);
  }
}

TEST(FixtureShapes, FnodeFamily) {
  FixtureRecipe r;
  r.name = "fnode_s";
  GnodeModel s = generate_fixture(r);
  ASSERT_EQ(s.n_layers(), 4);
  expect_fc(s.layers[0], {64, 784, Activation::Relu});
  expect_fc(s.layers[1], {10, 64, Activation::Relu});
  expect_node(s.layers[2], {{10, 10, Activation::Linear}});
  expect_fc(s.layers[3], {10, 10, Activation::Softmax});
  EXPECT_TRUE(std::get<NodeLayer>(s.layers[2]).dynamics.is_linear());

  r.name = "fnode_m";
  GnodeModel m = generate_fixture(r);
  ASSERT_EQ(m.n_layers(), 5);
  expect_node(m.layers[3], {{10, 16, Activation::Linear}, {16, 10, Activation::Linear}});

  r.name = "fnode_l";
  GnodeModel l = generate_fixture(r);
  ASSERT_EQ(l.n_layers(), 7);
  expect_node(l.layers[5], {{10, 16, Activation::Linear},
                            {10, 10, Activation::Linear},
                            {10, 10, Activation::Linear},
                            {16, 10, Activation::Linear}});
}

TEST(FixtureShapes, AccThirdOrderPlant) {
  FixtureRecipe r;
  r.name = "acc_3rd_order";
  r.variant = "linear";
  GnodeModel lin = generate_fixture(r);
  ASSERT_EQ(lin.n_layers(), 1);
  const auto& dyn = std::get<NodeLayer>(lin.layers[0]).dynamics;
  ASSERT_EQ(dyn.dim(), 8);
  ASSERT_EQ(dyn.layers.size(), 3u);
  EXPECT_EQ(dyn.layers[0].out_dim(), 24);  // 4 passthrough + fc(20) core
  EXPECT_EQ(dyn.layers[1].out_dim(), 8);   // 4 passthrough + fc(4) core
  EXPECT_TRUE(dyn.is_linear());

  r.variant = "nonlinear";
  GnodeModel nl = generate_fixture(r);
  const auto& dyn_nl = std::get<NodeLayer>(nl.layers[0]).dynamics;
  EXPECT_EQ(dyn_nl.layers[0].out_dim(), 14);  // 4 passthrough + tanh(10) core
  EXPECT_EQ(dyn_nl.layers[0].act, Activation::Tanh);
  EXPECT_FALSE(dyn_nl.is_linear());
}

TEST(FixtureShapes, AccKinematicChain) {
  // x1' = x2, x2' = x3, x4' = x5, x5' = x6, held slots have zero derivative.
  FixtureRecipe r;
  r.name = "acc_3rd_order";
  r.variant = "linear";
  GnodeModel m = generate_fixture(r);
  const auto& dyn = std::get<NodeLayer>(m.layers[0]).dynamics;
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    Vec x = gnr::testing::random_vec(rng, 8, -1, 1);
    Vec dx = dyn.eval(x);
    EXPECT_NEAR(dx[0], x[1], 1e-12);
    EXPECT_NEAR(dx[1], x[2], 1e-12);
    EXPECT_NEAR(dx[3], x[4], 1e-12);
    EXPECT_NEAR(dx[4], x[5], 1e-12);
    EXPECT_EQ(dx[6], 0.0);
    EXPECT_EQ(dx[7], 0.0);
  }
}

TEST(ModelIo, SetJsonRoundTrips) {
  Rng rng(19);
  StarSet s(gnr::testing::random_vec(rng, 3, -1, 1),
            gnr::testing::random_mat(rng, 3, 2),
            gnr::testing::random_mat(rng, 2, 2),
            gnr::testing::random_vec(rng, 2, 0.5, 1.0),
            Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  StarSet s2 = star_from_json(star_to_json(s));
  EXPECT_EQ(s.center, s2.center);
  EXPECT_EQ(s.basis, s2.basis);
  EXPECT_EQ(s.P, s2.P);
  EXPECT_EQ(*s.pred_ub, *s2.pred_ub);

  Zonotope z(gnr::testing::random_vec(rng, 2, -1, 1),
             gnr::testing::random_mat(rng, 2, 4));
  Zonotope z2 = zonotope_from_json(zonotope_to_json(z));
  EXPECT_EQ(z.generators, z2.generators);

  Box b(Vec::Constant(2, -0.25), Vec::Constant(2, 3.5));
  StarSet bs = input_set_from_json(box_to_json(b));
  EXPECT_EQ(bs.dim(), 2);
}

TEST(ModelIo, SpecDocuments) {
  Json safety{{"type", "safety"},
              {"normal", Json::array({"-1"})},
              {"offset", "-1.5"},
              {"over", "flowpipe"}};
  SpecDocument doc = spec_from_json(safety);
  EXPECT_EQ(doc.kind, SpecDocument::Kind::Safety);
  EXPECT_EQ(doc.scope, SafetyScope::FlowpipeScope);
  EXPECT_EQ(doc.unsafe.offset, -1.5);

  Json rob{{"type", "robustness"},
           {"nominal", Json::array({"1", "0"})},
           {"epsilon", "0.4"},
           {"label", 0},
           {"clamp", nullptr}};
  SpecDocument rdoc = spec_from_json(rob);
  EXPECT_EQ(rdoc.kind, SpecDocument::Kind::Robustness);
  EXPECT_FALSE(rdoc.robustness.clamp.has_value());
  EXPECT_EQ(*rdoc.robustness.label, 0);
}

TEST(ModelIo, FileRoundTrip) {
  FixtureRecipe r;
  r.name = "random_gnode";
  r.variant = "XS";
  GnodeModel m = generate_fixture(r);
  auto tmp = std::filesystem::temp_directory_path() / "gnr_test_model.gnode.json";
  save_model(m, tmp);
  GnodeModel loaded = load_model(tmp);
  EXPECT_EQ(canonical_text(model_to_json(m)), canonical_text(model_to_json(loaded)));
  std::filesystem::remove(tmp);
}

TEST(Fixtures, DefaultInputBoxes) {
  Box spiral = fixture_default_input_box("spiral_nonlinear", 0.01);
  EXPECT_EQ(spiral.dim(), 2);
  EXPECT_NEAR(spiral.lower[0], 1.99, 1e-12);
  Box acc = fixture_default_input_box("acc_unrolled", 0.1);
  EXPECT_EQ(acc.dim(), 8);
  EXPECT_EQ(acc.lower[6], acc.upper[6]);  // held a_lead is degenerate
}

}  // namespace
