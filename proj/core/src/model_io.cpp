#include "gnr/model_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gnr {

namespace {

constexpr const char* kModelFormat = "gnode-model/1";

[[noreturn]] void schema_fail(const std::string& msg, const std::string& where) {
  throw SchemaError(msg, where);
}

const Json& expect_field(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) schema_fail(std::string("missing field '") + key + "'", where);
  return *it;
}

Activation activation_from_name(const std::string& s, const std::string& where) {
  if (s == "linear") return Activation::Linear;
  if (s == "relu") return Activation::Relu;
  if (s == "leaky_relu") return Activation::LeakyRelu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "satlin") return Activation::Satlin;
  if (s == "softmax") return Activation::Softmax;
  schema_fail("unknown activation '" + s + "'", where);
}

}  // namespace

Json real_to_json(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return Json(std::string(buf));
}

double real_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      schema_fail("malformed real '" + s + "'", where);
    return v;
  }
  schema_fail("expected a real (number or decimal string)", where);
}

Json vec_to_json(const Vec& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(real_to_json(v[i]));
  return a;
}

Vec vec_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) schema_fail("expected an array of reals", where);
  Vec v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i)
    v[static_cast<Index>(i)] =
        real_from_json(j[i], where + "/" + std::to_string(i));
  return v;
}

Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index jj = 0; jj < m.cols(); ++jj) row.push_back(real_to_json(m(i, jj)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) schema_fail("expected an array of rows", where);
  const Index r = static_cast<Index>(j.size());
  if (r == 0) return Mat(0, 0);
  Index c = -1;
  Mat m;
  for (Index i = 0; i < r; ++i) {
    Vec row = vec_from_json(j[static_cast<size_t>(i)],
                            where + "/" + std::to_string(i));
    if (c < 0) {
      c = row.size();
      m.resize(r, c);
    } else if (row.size() != c) {
      schema_fail("ragged matrix rows", where + "/" + std::to_string(i));
    }
    m.row(i) = row.transpose();
  }
  return m;
}

Json box_to_json(const Box& b) {
  return Json{{"type", "box"},
              {"lower", vec_to_json(b.lower)},
              {"upper", vec_to_json(b.upper)}};
}

Json zonotope_to_json(const Zonotope& z) {
  return Json{{"type", "zonotope"},
              {"center", vec_to_json(z.center)},
              {"generators", mat_to_json(z.generators)}};
}

Json star_to_json(const StarSet& s) {
  Json j{{"type", "star"},
         {"center", vec_to_json(s.center)},
         {"basis", mat_to_json(s.basis)},
         {"P", mat_to_json(s.P)},
         {"d", vec_to_json(s.d)}};
  j["pred_lb"] = s.pred_lb ? vec_to_json(*s.pred_lb) : Json(nullptr);
  j["pred_ub"] = s.pred_ub ? vec_to_json(*s.pred_ub) : Json(nullptr);
  return j;
}

Json reach_set_to_json(const ReachSet& s) {
  if (std::holds_alternative<StarSet>(s))
    return star_to_json(std::get<StarSet>(s));
  return zonotope_to_json(std::get<Zonotope>(s));
}

Json flowpipe_to_json(const Flowpipe& fp) {
  Json steps = Json::array();
  for (const auto& st : fp.steps) {
    steps.push_back(Json{{"t_lo", real_to_json(st.t_lo)},
                         {"t_hi", real_to_json(st.t_hi)},
                         {"enclosure_verified", st.enclosure_verified},
                         {"set", reach_set_to_json(st.set)}});
  }
  return Json{{"mode", fp.mode == OutputMode::FinalSet ? "final_set" : "flowpipe"},
              {"steps", std::move(steps)}};
}

Box box_from_json(const Json& j, const std::string& where) {
  Vec lo = vec_from_json(expect_field(j, "lower", where), where + "/lower");
  Vec hi = vec_from_json(expect_field(j, "upper", where), where + "/upper");
  if (lo.size() != hi.size()) schema_fail("lower/upper length mismatch", where);
  return Box(std::move(lo), std::move(hi));
}

StarSet star_from_json(const Json& j, const std::string& where) {
  Vec c = vec_from_json(expect_field(j, "center", where), where + "/center");
  Mat v = mat_from_json(expect_field(j, "basis", where), where + "/basis");
  Mat p = mat_from_json(expect_field(j, "P", where), where + "/P");
  Vec d = vec_from_json(expect_field(j, "d", where), where + "/d");
  std::optional<Vec> lb, ub;
  if (j.contains("pred_lb") && !j["pred_lb"].is_null())
    lb = vec_from_json(j["pred_lb"], where + "/pred_lb");
  if (j.contains("pred_ub") && !j["pred_ub"].is_null())
    ub = vec_from_json(j["pred_ub"], where + "/pred_ub");
  if (v.rows() == 0 && v.cols() == 0) v = Mat(c.size(), 0);
  if (p.rows() == 0 && p.cols() == 0) p = Mat(0, v.cols());
  try {
    return StarSet(std::move(c), std::move(v), std::move(p), std::move(d),
                   std::move(lb), std::move(ub));
  } catch (const DimensionError& e) {
    schema_fail(e.what(), where);
  }
}

Zonotope zonotope_from_json(const Json& j, const std::string& where) {
  Vec c = vec_from_json(expect_field(j, "center", where), where + "/center");
  Mat g = mat_from_json(expect_field(j, "generators", where),
                        where + "/generators");
  if (g.rows() == 0 && g.cols() == 0) g = Mat(c.size(), 0);
  try {
    return Zonotope(std::move(c), std::move(g));
  } catch (const DimensionError& e) {
    schema_fail(e.what(), where);
  }
}

StarSet input_set_from_json(const Json& j, const std::string& where) {
  const std::string type =
      expect_field(j, "type", where).get<std::string>();
  if (type == "box") return StarSet::from_box(box_from_json(j, where));
  if (type == "star") return star_from_json(j, where);
  if (type == "zonotope") return zonotope_to_star(zonotope_from_json(j, where));
  schema_fail("unknown set type '" + type + "'", where);
}

namespace {

Json fc_layer_to_json(const FcLayer& fc) {
  Json j{{"kind", "fc"}, {"activation", activation_name(fc.act)}};
  if (fc.act == Activation::LeakyRelu) j["leaky_slope"] = real_to_json(fc.leaky_slope);
  if (fc.passthrough > 0) j["passthrough"] = fc.passthrough;
  j["W"] = mat_to_json(fc.W);
  j["b"] = vec_to_json(fc.b);
  return j;
}

FcLayer fc_layer_from_json(const Json& j, const std::string& where) {
  const std::string act_name =
      expect_field(j, "activation", where).get<std::string>();
  Activation act = activation_from_name(act_name, where + "/activation");
  Mat w = mat_from_json(expect_field(j, "W", where), where + "/W");
  Vec b = vec_from_json(expect_field(j, "b", where), where + "/b");
  double slope = 0.01;
  if (j.contains("leaky_slope"))
    slope = real_from_json(j["leaky_slope"], where + "/leaky_slope");
  Index pass = 0;
  if (j.contains("passthrough")) {
    if (!j["passthrough"].is_number_integer())
      schema_fail("passthrough must be an integer", where + "/passthrough");
    pass = j["passthrough"].get<Index>();
  }
  if (w.rows() != b.size())
    schema_fail("W row count does not match bias length", where);
  try {
    return FcLayer(std::move(w), std::move(b), act, slope, pass);
  } catch (const DimensionError& e) {
    schema_fail(e.what(), where);
  }
}

}  // namespace

Json model_to_json(const GnodeModel& m) {
  Json layers = Json::array();
  for (const auto& l : m.layers) {
    if (!layer_is_node(l)) {
      layers.push_back(fc_layer_to_json(std::get<FcLayer>(l)));
      continue;
    }
    const auto& nl = std::get<NodeLayer>(l);
    Json dyn = Json::array();
    for (const auto& fl : nl.dynamics.layers) dyn.push_back(fc_layer_to_json(fl));
    layers.push_back(Json{
        {"kind", "node"},
        {"t_f", real_to_json(nl.time.t_f)},
        {"step", real_to_json(nl.time.step)},
        {"output_mode",
         nl.time.mode == OutputMode::FinalSet ? "final_set" : "flowpipe"},
        {"dynamics", std::move(dyn)}});
  }
  return Json{{"format", kModelFormat},
              {"name", m.name},
              {"input_dim", m.input_dim()},
              {"output_dim", m.output_dim()},
              {"layers", std::move(layers)}};
}

GnodeModel model_from_json(const Json& j) {
  if (!j.is_object()) schema_fail("model document must be an object", "$");
  const auto& fmt = expect_field(j, "format", "$");
  if (fmt.get<std::string>() != kModelFormat)
    schema_fail("unsupported format '" + fmt.get<std::string>() + "'", "$/format");
  GnodeModel m;
  m.name = j.contains("name") ? j["name"].get<std::string>() : "";
  const Json& layers = expect_field(j, "layers", "$");
  if (!layers.is_array() || layers.empty())
    schema_fail("layers must be a non-empty array", "$/layers");
  for (size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "$/layers/" + std::to_string(i);
    const Json& lj = layers[i];
    const std::string kind = expect_field(lj, "kind", where).get<std::string>();
    if (kind == "fc") {
      m.layers.emplace_back(fc_layer_from_json(lj, where));
    } else if (kind == "node") {
      const Json& dyn = expect_field(lj, "dynamics", where);
      if (!dyn.is_array() || dyn.empty())
        schema_fail("dynamics must be a non-empty array", where + "/dynamics");
      std::vector<FcLayer> ls;
      for (size_t k = 0; k < dyn.size(); ++k)
        ls.push_back(fc_layer_from_json(
            dyn[k], where + "/dynamics/" + std::to_string(k)));
      TimeConfig tc;
      tc.t_f = real_from_json(expect_field(lj, "t_f", where), where + "/t_f");
      tc.step = real_from_json(expect_field(lj, "step", where), where + "/step");
      const std::string mode =
          expect_field(lj, "output_mode", where).get<std::string>();
      if (mode == "final_set") tc.mode = OutputMode::FinalSet;
      else if (mode == "flowpipe") tc.mode = OutputMode::FlowpipeMode;
      else schema_fail("output_mode must be final_set or flowpipe",
                       where + "/output_mode");
      if (!(tc.t_f > 0.0) || !(tc.step > 0.0))
        schema_fail("t_f and step must be positive", where);
      try {
        m.layers.emplace_back(NodeLayer{NodeDynamics(std::move(ls)), tc});
      } catch (const std::runtime_error& e) {
        schema_fail(e.what(), where);
      }
    } else {
      schema_fail("unknown layer kind '" + kind + "'", where + "/kind");
    }
  }
  try {
    m.validate();
  } catch (const DimensionError& e) {
    schema_fail(e.what(), "$/layers");
  }
  if (j.contains("input_dim") &&
      j["input_dim"].get<Index>() != m.input_dim())
    schema_fail("declared input_dim does not match layers", "$/input_dim");
  if (j.contains("output_dim") &&
      j["output_dim"].get<Index>() != m.output_dim())
    schema_fail("declared output_dim does not match layers", "$/output_dim");
  return m;
}

std::string canonical_text(const Json& j) { return j.dump(2) + "\n"; }

GnodeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open model file", path.string());
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("JSON parse error: ") + e.what(), path.string());
  }
  return model_from_json(j);
}

void save_model(const GnodeModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot open output file", path.string());
  out << canonical_text(model_to_json(m));
}

SpecDocument spec_from_json(const Json& j) {
  SpecDocument doc;
  const std::string type = expect_field(j, "type", "$").get<std::string>();
  if (type == "safety") {
    doc.kind = SpecDocument::Kind::Safety;
    Vec normal = vec_from_json(expect_field(j, "normal", "$"), "$/normal");
    double offset = real_from_json(expect_field(j, "offset", "$"), "$/offset");
    doc.unsafe = HalfspaceSpec(std::move(normal), offset);
    std::string over = j.contains("over") ? j["over"].get<std::string>() : "final";
    if (over == "final") doc.scope = SafetyScope::Final;
    else if (over == "flowpipe") doc.scope = SafetyScope::FlowpipeScope;
    else schema_fail("over must be final or flowpipe", "$/over");
    return doc;
  }
  if (type == "robustness") {
    doc.kind = SpecDocument::Kind::Robustness;
    doc.robustness.nominal =
        vec_from_json(expect_field(j, "nominal", "$"), "$/nominal");
    doc.robustness.epsilon =
        real_from_json(expect_field(j, "epsilon", "$"), "$/epsilon");
    if (j.contains("mask") && !j["mask"].is_null()) {
      std::vector<Index> mask;
      for (const auto& v : j["mask"]) mask.push_back(v.get<Index>());
      doc.robustness.mask = std::move(mask);
    }
    if (j.contains("label") && !j["label"].is_null())
      doc.robustness.label = j["label"].get<int>();
    if (j.contains("clamp")) {
      if (j["clamp"].is_null()) {
        doc.robustness.clamp.reset();
      } else {
        doc.robustness.clamp =
            std::pair{real_from_json(j["clamp"][0], "$/clamp/0"),
                      real_from_json(j["clamp"][1], "$/clamp/1")};
      }
    }
    return doc;
  }
  schema_fail("unknown spec type '" + type + "'", "$/type");
}

Json verdict_to_json(const SpecResult& r) {
  Json j{{"verdict", verdict_name(r.verdict)}};
  j["nominal_misclassified"] = r.nominal_misclassified;
  j["witness"] = r.witness ? vec_to_json(*r.witness) : Json(nullptr);
  if (!r.class_bounds.empty()) {
    Json bounds = Json::array();
    for (const auto& cb : r.class_bounds)
      bounds.push_back(Json{{"lo", real_to_json(cb.lo)},
                            {"hi", real_to_json(cb.hi)}});
    j["class_bounds"] = std::move(bounds);
  }
  if (r.violating_time)
    j["violating_time"] = Json{real_to_json(r.violating_time->first),
                               real_to_json(r.violating_time->second)};
  j["times"] = Json{{"reach_ms", r.reach_ms}, {"check_ms", r.check_ms}};
  return j;
}

}  // namespace gnr
