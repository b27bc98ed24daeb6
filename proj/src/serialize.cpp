#include "proce/serialize.hpp"

#include <cmath>

#include "proce/error.hpp"
#include "proce/util.hpp"
#include "proce/version.hpp"

namespace proce {

namespace {

// Field access that turns nlohmann's exceptions into this library's
// ParseError with the artifact named.
template <typename T>
T field(const Json& doc, const std::string& key, const std::string& what) {
  if (!doc.contains(key)) {
    throw ParseError(what + ": missing field '" + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(what + ": field '" + key + "': " + e.what());
  }
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

Json matrix_to_json(const Matrix& m) {
  return Json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const Json& doc, const std::string& what) {
  Matrix m;
  m.rows = field<std::size_t>(doc, "rows", what);
  m.cols = field<std::size_t>(doc, "cols", what);
  m.data = field<std::vector<double>>(doc, "data", what);
  if (m.data.size() != m.rows * m.cols) {
    throw ParseError(what + ": matrix data length does not match rows*cols");
  }
  return m;
}

}  // namespace

Json load_json_file(const std::string& path) {
  return parse_json(read_text_file(path), path);
}

void save_json_file(const std::string& path, const Json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

void require_version(const Json& doc, const std::string& what) {
  const int version = field<int>(doc, "version", what);
  if (version > kFormatVersion) {
    throw VersionError(what + ": format version " + std::to_string(version) +
                       " is newer than the supported version " +
                       std::to_string(kFormatVersion));
  }
}

Json network_to_json(const MlpNetwork& net) {
  net.validate();
  Json layers = Json::array();
  for (const DenseLayer& l : net.layers) {
    layers.push_back(Json{{"rows", l.weights.rows},
                          {"cols", l.weights.cols},
                          {"weights", l.weights.data},
                          {"bias", l.bias},
                          {"activation", activation_name(l.activation)},
                          {"dropout", l.dropout_rate}});
  }
  return Json{{"version", kFormatVersion},
              {"input_dim", net.input_dim()},
              {"layers", layers}};
}

MlpNetwork network_from_json(const Json& doc) {
  const std::string what = "network";
  require_version(doc, what);
  MlpNetwork net;
  const Json layers = field<Json>(doc, "layers", what);
  if (!layers.is_array() || layers.empty()) {
    throw ParseError(what + ": 'layers' must be a non-empty array");
  }
  for (const Json& jl : layers) {
    DenseLayer layer;
    layer.weights.rows = field<std::size_t>(jl, "rows", what);
    layer.weights.cols = field<std::size_t>(jl, "cols", what);
    layer.weights.data = field<std::vector<double>>(jl, "weights", what);
    if (layer.weights.data.size() != layer.weights.rows * layer.weights.cols) {
      throw ParseError(what + ": weights length does not match rows*cols");
    }
    layer.bias = field<std::vector<double>>(jl, "bias", what);
    layer.activation =
        activation_from_name(field<std::string>(jl, "activation", what));
    layer.dropout_rate = field<double>(jl, "dropout", what);
    net.layers.push_back(std::move(layer));
  }
  const auto declared = field<std::size_t>(doc, "input_dim", what);
  if (declared != net.input_dim()) {
    throw ParseError(what + ": declared input_dim " + std::to_string(declared) +
                     " does not match first layer cols " +
                     std::to_string(net.input_dim()));
  }
  net.validate();
  return net;
}

std::string serialize_network(const MlpNetwork& net) {
  return network_to_json(net).dump(2) + "\n";
}

MlpNetwork deserialize_network(const std::string& text) {
  return network_from_json(parse_json(text, "network"));
}

Json schema_to_json(const FeatureSchema& schema) {
  schema.validate();
  Json features = Json::array();
  for (const Feature& f : schema.features) {
    Json jf{{"name", f.name},
            {"kind", f.kind == FeatureKind::kContinuous ? "continuous"
                                                        : "categorical"},
            {"mutable", f.is_mutable}};
    if (f.kind == FeatureKind::kCategorical) jf["categories"] = f.categories;
    if (f.constraint == ConstraintKind::kNondecreasing) {
      jf["constraint"] = "nondecreasing";
    }
    features.push_back(std::move(jf));
  }
  return Json{{"version", kFormatVersion},
              {"features", features},
              {"label", schema.label_column}};
}

FeatureSchema schema_from_json(const Json& doc) {
  const std::string what = "schema";
  require_version(doc, what);
  FeatureSchema schema;
  schema.label_column = field<std::string>(doc, "label", what);
  const Json features = field<Json>(doc, "features", what);
  if (!features.is_array()) {
    throw ParseError(what + ": 'features' must be an array");
  }
  for (const Json& jf : features) {
    Feature f;
    f.name = field<std::string>(jf, "name", what);
    const std::string kind = field<std::string>(jf, "kind", what);
    if (kind == "continuous") {
      f.kind = FeatureKind::kContinuous;
    } else if (kind == "categorical") {
      f.kind = FeatureKind::kCategorical;
      f.categories = field<std::vector<std::string>>(jf, "categories", what);
    } else {
      throw ParseError(what + ": unknown feature kind '" + kind + "'");
    }
    if (jf.contains("mutable")) f.is_mutable = field<bool>(jf, "mutable", what);
    if (jf.contains("constraint")) {
      const std::string c = field<std::string>(jf, "constraint", what);
      if (c == "nondecreasing") {
        f.constraint = ConstraintKind::kNondecreasing;
      } else if (c != "none") {
        throw ParseError(what + ": unknown constraint '" + c + "'");
      }
    }
    schema.features.push_back(std::move(f));
  }
  schema.validate();
  return schema;
}

Json normalizer_to_json(const Normalizer& norm, const FeatureSchema& schema) {
  Json ranges = Json::array();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.at(i).kind != FeatureKind::kContinuous) {
      ranges.push_back(Json{{"feature", schema.at(i).name}});
      continue;
    }
    const ContinuousRange& r = norm.ranges[i];
    ranges.push_back(Json{{"feature", schema.at(i).name},
                          {"min", r.min},
                          {"max", r.max},
                          {"degenerate", r.degenerate}});
  }
  return Json{{"version", kFormatVersion}, {"ranges", ranges}};
}

Normalizer normalizer_from_json(const Json& doc, const FeatureSchema& schema) {
  const std::string what = "normalizer";
  require_version(doc, what);
  const Json ranges = field<Json>(doc, "ranges", what);
  if (!ranges.is_array() || ranges.size() != schema.size()) {
    throw ParseError(what + ": 'ranges' must list one entry per feature");
  }
  Normalizer norm;
  norm.ranges.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const Json& jr = ranges[i];
    const std::string name = field<std::string>(jr, "feature", what);
    if (name != schema.at(i).name) {
      throw SchemaError(what + ": entry " + std::to_string(i) + " names '" +
                        name + "' but the schema has '" + schema.at(i).name +
                        "'");
    }
    if (schema.at(i).kind != FeatureKind::kContinuous) continue;
    norm.ranges[i].min = field<double>(jr, "min", what);
    norm.ranges[i].max = field<double>(jr, "max", what);
    norm.ranges[i].degenerate = field<bool>(jr, "degenerate", what);
  }
  return norm;
}

Json classifier_to_json(const Classifier& clf) {
  return Json{{"version", kFormatVersion},
              {"preset", classifier_preset_name(clf.preset)},
              {"schema_fingerprint", clf.schema_fingerprint},
              {"net", network_to_json(clf.net)}};
}

Classifier classifier_from_json(const Json& doc) {
  const std::string what = "classifier";
  require_version(doc, what);
  Classifier clf;
  clf.preset =
      classifier_preset_from_name(field<std::string>(doc, "preset", what));
  clf.schema_fingerprint = field<std::string>(doc, "schema_fingerprint", what);
  clf.net = network_from_json(field<Json>(doc, "net", what));
  return clf;
}

Json autoencoder_to_json(const Autoencoder& ae, const FeatureSchema& schema) {
  Json embeddings = Json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.at(i).kind != FeatureKind::kCategorical) continue;
    const Matrix& emb = ae.cat_embeddings[i];
    Json rows = Json::object();
    for (std::size_t r = 0; r < emb.rows; ++r) {
      rows[std::to_string(r)] =
          std::vector<double>(emb.row(r), emb.row(r) + emb.cols);
    }
    embeddings[schema.at(i).name] = std::move(rows);
  }
  return Json{{"version", kFormatVersion},
              {"embedding_dim", ae.embedding_dim},
              {"cat_embedding_dim", ae.cat_embedding_dim},
              {"schema_fingerprint", ae.schema_fingerprint},
              {"encoder", network_to_json(ae.encoder)},
              {"decoder", network_to_json(ae.decoder)},
              {"cat_embeddings", embeddings}};
}

Autoencoder autoencoder_from_json(const Json& doc,
                                  const FeatureSchema& schema) {
  const std::string what = "autoencoder";
  require_version(doc, what);
  Autoencoder ae;
  ae.embedding_dim = field<std::size_t>(doc, "embedding_dim", what);
  ae.cat_embedding_dim = field<std::size_t>(doc, "cat_embedding_dim", what);
  ae.schema_fingerprint = field<std::string>(doc, "schema_fingerprint", what);
  ae.encoder = network_from_json(field<Json>(doc, "encoder", what));
  ae.decoder = network_from_json(field<Json>(doc, "decoder", what));
  const Json embeddings = field<Json>(doc, "cat_embeddings", what);
  ae.cat_embeddings.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const Feature& f = schema.at(i);
    if (f.kind != FeatureKind::kCategorical) continue;
    if (!embeddings.contains(f.name)) {
      throw ParseError(what + ": missing embeddings for feature '" + f.name +
                       "'");
    }
    Matrix emb(f.categories.size(), ae.cat_embedding_dim);
    const Json& rows = embeddings.at(f.name);
    for (std::size_t r = 0; r < emb.rows; ++r) {
      const std::string key = std::to_string(r);
      if (!rows.contains(key)) {
        throw ParseError(what + ": feature '" + f.name +
                         "' lacks embedding row " + key);
      }
      const auto row = rows.at(key).get<std::vector<double>>();
      if (row.size() != ae.cat_embedding_dim) {
        throw ParseError(what + ": embedding row width mismatch for '" +
                         f.name + "'");
      }
      std::copy(row.begin(), row.end(), emb.row(r));
    }
    ae.cat_embeddings[i] = std::move(emb);
  }
  if (ae.encoder.input_dim() != embedded_dim(schema, ae.cat_embedding_dim)) {
    throw SchemaError(what + ": encoder input width does not match schema");
  }
  return ae;
}

Json graph_to_json(const CausalGraph& graph) {
  Json edges = Json::array();
  for (const auto& [from, to] : graph.edges) {
    edges.push_back(Json::array({from, to}));
  }
  return Json{{"version", kFormatVersion},
              {"nodes", graph.nodes},
              {"edges", edges}};
}

CausalGraph graph_from_json(const Json& doc) {
  const std::string what = "causal graph";
  require_version(doc, what);
  CausalGraph graph;
  graph.nodes = field<std::vector<std::string>>(doc, "nodes", what);
  const Json edges = field<Json>(doc, "edges", what);
  if (!edges.is_array()) throw ParseError(what + ": 'edges' must be an array");
  for (const Json& je : edges) {
    if (!je.is_array() || je.size() != 2) {
      throw ParseError(what + ": each edge must be a [parent, child] pair");
    }
    graph.edges.emplace_back(je[0].get<std::string>(),
                             je[1].get<std::string>());
  }
  return graph;
}

Json scm_to_json(const StructuralModel& model) {
  Json equations = Json::array();
  for (const StructuralEquation& eq : model.equations) {
    equations.push_back(Json{{"child", eq.child},
                             {"parents", eq.parents},
                             {"coefficients", eq.coefficients},
                             {"intercept", eq.intercept},
                             {"r_squared", eq.r_squared},
                             {"ridge_fallback", eq.ridge_fallback}});
  }
  return Json{{"version", kFormatVersion},
              {"graph", graph_to_json(model.graph)},
              {"equations", equations},
              {"warnings", model.warnings}};
}

StructuralModel scm_from_json(const Json& doc) {
  const std::string what = "structural model";
  require_version(doc, what);
  StructuralModel model;
  model.graph = graph_from_json(field<Json>(doc, "graph", what));
  model.warnings = field<std::vector<std::string>>(doc, "warnings", what);
  const Json equations = field<Json>(doc, "equations", what);
  if (!equations.is_array()) {
    throw ParseError(what + ": 'equations' must be an array");
  }
  for (const Json& je : equations) {
    StructuralEquation eq;
    eq.child = field<std::string>(je, "child", what);
    eq.parents = field<std::vector<std::string>>(je, "parents", what);
    eq.coefficients = field<std::vector<double>>(je, "coefficients", what);
    eq.intercept = field<double>(je, "intercept", what);
    eq.r_squared = field<double>(je, "r_squared", what);
    eq.ridge_fallback = field<bool>(je, "ridge_fallback", what);
    if (eq.coefficients.size() != eq.parents.size()) {
      throw ParseError(what + ": equation for '" + eq.child +
                       "' has mismatched parents/coefficients");
    }
    model.equations.push_back(std::move(eq));
  }
  validate_dag(model.graph);
  return model;
}

Json raw_instance_to_json(const Instance& raw, const FeatureSchema& schema) {
  Json out = Json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const Feature& f = schema.at(i);
    if (f.kind == FeatureKind::kCategorical) {
      out[f.name] = f.categories[static_cast<std::size_t>(raw[i])];
    } else {
      out[f.name] = raw[i];
    }
  }
  return out;
}

Instance raw_instance_from_json(const Json& doc, const FeatureSchema& schema,
                                const std::string& what) {
  Instance out;
  out.values.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const Feature& f = schema.at(i);
    if (!doc.contains(f.name)) {
      throw ParseError(what + ": missing feature '" + f.name + "'");
    }
    const Json& v = doc.at(f.name);
    if (f.kind == FeatureKind::kCategorical) {
      if (!v.is_string()) {
        throw ParseError(what + ": feature '" + f.name +
                         "' must be a category label");
      }
      out.values[i] =
          static_cast<double>(f.category_index(v.get<std::string>()));
    } else {
      if (!v.is_number()) {
        throw ParseError(what + ": feature '" + f.name + "' must be a number");
      }
      out.values[i] = v.get<double>();
    }
  }
  return out;
}

Json report_to_json(const ExplanationReport& report,
                    const FeatureSchema& schema, const Json& config_echo) {
  Json deltas = Json::array();
  for (const FeatureDelta& d : report.deltas) {
    Json jd{{"feature", d.feature}, {"changed", d.changed}};
    if (d.is_categorical) {
      jd["from"] = d.from_label;
      jd["to"] = d.to_label;
    } else {
      jd["from"] = d.from_value;
      jd["to"] = d.to_value;
    }
    deltas.push_back(std::move(jd));
  }
  return Json{{"version", kFormatVersion},
              {"tool_version", kVersion},
              {"x_org", raw_instance_to_json(report.x_org_raw, schema)},
              {"x_cf", raw_instance_to_json(report.x_cf_raw, schema)},
              {"x_org_norm", report.x_org_norm.values},
              {"x_cf_norm", report.x_cf_norm.values},
              {"y_org", report.y_org},
              {"y_cf", report.y_cf},
              {"deltas", deltas},
              {"objectives",
               Json{{"pred", report.objectives.pred},
                    {"proto", report.objectives.proto},
                    {"dist", report.objectives.dist_final}}},
              {"valid", report.valid},
              {"generations_run", report.generations_run},
              {"seed", report.seed},
              {"config_echo", config_echo}};
}

ExplanationReport report_from_json(const Json& doc,
                                   const FeatureSchema& schema) {
  const std::string what = "report";
  require_version(doc, what);
  ExplanationReport report;
  report.x_org_norm =
      Instance{field<std::vector<double>>(doc, "x_org_norm", what)};
  report.x_cf_norm =
      Instance{field<std::vector<double>>(doc, "x_cf_norm", what)};
  report.x_org_raw =
      raw_instance_from_json(field<Json>(doc, "x_org", what), schema, what);
  report.x_cf_raw =
      raw_instance_from_json(field<Json>(doc, "x_cf", what), schema, what);
  report.y_org = field<int>(doc, "y_org", what);
  report.y_cf = field<int>(doc, "y_cf", what);
  const Json objectives = field<Json>(doc, "objectives", what);
  report.objectives.pred = field<double>(objectives, "pred", what);
  report.objectives.proto = field<double>(objectives, "proto", what);
  report.objectives.dist_final = field<double>(objectives, "dist", what);
  report.valid = field<bool>(doc, "valid", what);
  report.generations_run = field<std::size_t>(doc, "generations_run", what);
  report.seed = field<std::uint64_t>(doc, "seed", what);
  // Wall-clock timing never enters the file, so artifacts stay byte-stable
  // across identical-seed runs; file-loaded reports carry runtime 0.
  validate_instance(schema, report.x_org_norm);
  validate_instance(schema, report.x_cf_norm);
  return report;
}

std::vector<ConstraintSpec> constraints_from_json(const Json& doc,
                                                  const FeatureSchema& schema) {
  const std::string what = "constraints";
  const Json list = field<Json>(doc, "constraints", what);
  if (!list.is_array()) {
    throw ParseError(what + ": 'constraints' must be an array");
  }
  std::vector<ConstraintSpec> out;
  for (const Json& jc : list) {
    ConstraintSpec c;
    const std::string kind = field<std::string>(jc, "kind", what);
    if (kind == "nondecreasing") {
      c.kind = ConstraintSpec::Kind::kNondecreasing;
      c.feature = field<std::string>(jc, "feature", what);
    } else if (kind == "proportional") {
      c.kind = ConstraintSpec::Kind::kProportional;
      c.sources = field<std::vector<std::string>>(jc, "sources", what);
      c.target = field<std::string>(jc, "target", what);
    } else {
      throw ParseError(what + ": unknown constraint kind '" + kind + "'");
    }
    out.push_back(std::move(c));
  }
  validate_constraints(out, schema);
  return out;
}

Json metrics_to_json(const MetricsReport& metrics, const std::string& method,
                     const std::string& dataset, const Json& config_echo) {
  return Json{
      {"version", kFormatVersion},
      {"tool_version", kVersion},
      {"method", method},
      {"dataset", dataset},
      {"n", metrics.n},
      {"metrics",
       Json{{"tcv", metrics.tcv},
            {"ccv", metrics.ccv},
            {"cat_proximity", metrics.cat_prox},
            {"con_proximity", metrics.con_prox},
            {"im1", metrics.im1},
            {"im2", metrics.im2},
            {"im2_x10", metrics.im2_x10},
            {"runtime_seconds", metrics.runtime_seconds},
            {"epsilon", metrics.epsilon}}},
      {"per_sample",
       Json{{"tcv", metrics.tcv_per_sample},
            {"ccv", metrics.ccv_per_sample},
            {"cat_proximity", metrics.cat_per_sample},
            {"con_proximity", metrics.con_per_sample},
            {"im1", metrics.im1_per_sample},
            {"im2", metrics.im2_per_sample},
            {"runtime_seconds", metrics.runtime_per_sample}}},
      {"config_echo", config_echo}};
}

MetricsReport metrics_from_json(const Json& doc) {
  const std::string what = "metrics";
  require_version(doc, what);
  MetricsReport m;
  m.n = field<std::size_t>(doc, "n", what);
  const Json summary = field<Json>(doc, "metrics", what);
  m.tcv = field<double>(summary, "tcv", what);
  m.ccv = field<double>(summary, "ccv", what);
  m.cat_prox = field<double>(summary, "cat_proximity", what);
  m.con_prox = field<double>(summary, "con_proximity", what);
  m.im1 = field<double>(summary, "im1", what);
  m.im2 = field<double>(summary, "im2", what);
  m.im2_x10 = field<double>(summary, "im2_x10", what);
  m.runtime_seconds = field<double>(summary, "runtime_seconds", what);
  m.epsilon = field<double>(summary, "epsilon", what);
  const Json per_sample = field<Json>(doc, "per_sample", what);
  m.tcv_per_sample = field<std::vector<double>>(per_sample, "tcv", what);
  m.ccv_per_sample = field<std::vector<double>>(per_sample, "ccv", what);
  m.cat_per_sample =
      field<std::vector<double>>(per_sample, "cat_proximity", what);
  m.con_per_sample =
      field<std::vector<double>>(per_sample, "con_proximity", what);
  m.im1_per_sample = field<std::vector<double>>(per_sample, "im1", what);
  m.im2_per_sample = field<std::vector<double>>(per_sample, "im2", what);
  m.runtime_per_sample =
      field<std::vector<double>>(per_sample, "runtime_seconds", what);
  return m;
}

std::string metrics_to_csv(const MetricsReport& metrics,
                           const std::string& method,
                           const std::string& dataset) {
  std::string out =
      "method,dataset,n,tcv,ccv,cat_proximity,con_proximity,im1,im2,"
      "im2_x10,runtime_seconds,epsilon\n";
  out += method + ',' + dataset + ',' + std::to_string(metrics.n);
  for (double v : {metrics.tcv, metrics.ccv, metrics.cat_prox,
                   metrics.con_prox, metrics.im1, metrics.im2, metrics.im2_x10,
                   metrics.runtime_seconds, metrics.epsilon}) {
    out += ',';
    out += format_double(v);
  }
  out += '\n';
  return out;
}

}  // namespace proce
