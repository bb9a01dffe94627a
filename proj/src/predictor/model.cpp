#include "lorecast/predictor/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace lorecast::predictor {

using Code = PredictorError::Code;
using nlohmann::json;

std::string_view error_code_name(Code code) {
  switch (code) {
    case Code::EmptyDataset: return "empty-dataset";
    case Code::SchemaMismatch: return "schema-mismatch";
    case Code::NonFiniteTarget: return "non-finite-target";
    case Code::InvalidConfig: return "invalid-config";
    case Code::VersionMismatch: return "version-mismatch";
    case Code::CorruptFile: return "corrupt-file";
    case Code::SchemaHashMismatch: return "schema-hash-mismatch";
    case Code::Io: return "io";
  }
  return "?";
}

std::string_view transform_name(Transform t) {
  return t == Transform::Log1p ? "log1p" : "identity";
}

Transform parse_transform(std::string_view name) {
  if (name == "log1p") return Transform::Log1p;
  if (name == "identity") return Transform::Identity;
  throw std::invalid_argument(fmt::format("unknown target transform '{}'", name));
}

namespace {

double forward(Transform t, double y) { return t == Transform::Log1p ? std::log1p(y) : y; }
double inverse(Transform t, double z) { return t == Transform::Log1p ? std::expm1(z) : z; }

void check_schema(int version) {
  if (version != features::kSchemaVersion)
    throw PredictorError(Code::SchemaMismatch,
                         fmt::format("feature schema version {} does not match version {}",
                                     version, features::kSchemaVersion));
}

}  // namespace

BoostConfig TrainConfig::boost() const {
  BoostConfig b;
  b.n_trees = n_trees;
  b.max_depth = max_depth;
  b.learning_rate = learning_rate;
  b.min_leaf_rows = min_leaf_rows;
  b.seed = seed;
  b.row_subsample = row_subsample;
  b.feature_subsample = feature_subsample;
  return b;
}

TrainedModel train(const Dataset& data, const TrainConfig& cfg) {
  if (data.rows.empty()) throw PredictorError(Code::EmptyDataset, "dataset has no rows");
  check_schema(data.schema_version);
  const auto boost = cfg.boost();
  try {
    boost.validate();
  } catch (const std::invalid_argument& e) {
    throw PredictorError(Code::InvalidConfig, e.what());
  }

  const std::size_t cols = features::feature_names().size();
  Matrix x{cols, {}};
  x.data.reserve(data.rows.size() * cols);
  std::vector<double> power;
  std::vector<double> tns;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& row = data.rows[i];
    if (row.features.schema_version != data.schema_version || row.features.values.size() != cols)
      throw PredictorError(Code::SchemaMismatch,
                           fmt::format("row {} does not match the feature schema", i));
    if (!std::isfinite(row.power_uW) || !std::isfinite(row.tns_ns))
      throw PredictorError(Code::NonFiniteTarget, fmt::format("row {} has a non-finite target", i));
    if (row.power_uW < 0.0)
      throw PredictorError(Code::NonFiniteTarget, fmt::format("row {} has negative power", i));
    x.data.insert(x.data.end(), row.features.values.begin(), row.features.values.end());
    power.push_back(forward(cfg.power_transform, row.power_uW));
    tns.push_back(forward(cfg.tns_transform, std::fabs(row.tns_ns)));
  }

  TrainedModel m;
  m.schema_version = data.schema_version;
  m.schema_hash = features::schema_hash();
  m.learning_rate = cfg.learning_rate;
  m.train_seed = cfg.seed;
  m.row_count = data.rows.size();
  m.power = {cfg.power_transform, fit(x, power, boost)};
  // Offset the seed so subsampled runs do not draw identical masks for both targets.
  auto tns_boost = boost;
  tns_boost.seed = boost.seed ^ 0x9e3779b97f4a7c15ULL;
  m.tns = {cfg.tns_transform, fit(x, tns, tns_boost)};
  return m;
}

Forecast predict(const TrainedModel& model, const features::FeatureVector& fv) {
  if (fv.schema_version != model.schema_version)
    throw PredictorError(Code::SchemaMismatch,
                         fmt::format("feature vector schema version {} does not match model version {}",
                                     fv.schema_version, model.schema_version));
  if (fv.values.size() != features::feature_names().size())
    throw PredictorError(Code::SchemaMismatch,
                         fmt::format("feature vector has {} values, expected {}", fv.values.size(),
                                     features::feature_names().size()));
  auto eval = [&](const TargetModel& t) {
    return std::max(0.0, inverse(t.transform, t.ensemble.predict(fv.values)));
  };
  return {eval(model.power), eval(model.tns)};
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json tree_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    if (n.leaf())
      nodes.push_back({{"value", n.value}});
    else
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right}});
  }
  return nodes;
}

json target_json(const TargetModel& t) {
  json trees = json::array();
  for (const auto& tree : t.ensemble.trees) trees.push_back(tree_json(tree));
  return {{"transform", transform_name(t.transform)},
          {"base_score", t.ensemble.base_score},
          {"trees", std::move(trees)}};
}

[[noreturn]] void corrupt(const std::string& why) {
  throw PredictorError(Code::CorruptFile, "corrupt model file: " + why);
}

double finite(const json& j, const char* what) {
  const double v = j.get<double>();
  if (!std::isfinite(v)) corrupt(fmt::format("non-finite {}", what));
  return v;
}

RegressionTree tree_from_json(const json& j, std::size_t n_features) {
  RegressionTree tree;
  if (!j.is_array() || j.empty()) corrupt("tree without nodes");
  const auto n = static_cast<int>(j.size());
  for (const auto& jn : j) {
    RegressionTree::Node node;
    if (jn.contains("value")) {
      node.value = finite(jn.at("value"), "leaf value");
    } else {
      node.feature = jn.at("feature").get<int>();
      node.threshold = finite(jn.at("threshold"), "threshold");
      node.left = jn.at("left").get<int>();
      node.right = jn.at("right").get<int>();
      if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features)
        corrupt(fmt::format("feature index {} out of range", node.feature));
    }
    tree.nodes.push_back(node);
  }
  // Children must point forward so evaluation always terminates.
  for (int i = 0; i < n; ++i) {
    const auto& node = tree.nodes[static_cast<std::size_t>(i)];
    if (node.leaf()) continue;
    if (node.left <= i || node.left >= n || node.right <= i || node.right >= n)
      corrupt(fmt::format("node {} has an invalid child index", i));
  }
  return tree;
}

TargetModel target_from_json(const json& j, double learning_rate, std::size_t n_features) {
  TargetModel t;
  t.transform = parse_transform(j.at("transform").get<std::string>());
  t.ensemble.base_score = finite(j.at("base_score"), "base score");
  t.ensemble.learning_rate = learning_rate;
  for (const auto& jt : j.at("trees")) t.ensemble.trees.push_back(tree_from_json(jt, n_features));
  if (t.ensemble.trees.empty()) corrupt("empty ensemble");
  return t;
}

}  // namespace

json to_json(const TrainedModel& model) {
  json names = json::array();
  for (auto n : features::feature_names()) names.push_back(n);
  return {{"format", "lorecast-model"},
          {"format_version", kModelFormatVersion},
          {"schema_version", model.schema_version},
          {"schema_hash", model.schema_hash},
          {"feature_names", std::move(names)},
          {"learning_rate", model.learning_rate},
          {"train_seed", model.train_seed},
          {"metadata", {{"timestamp", model.timestamp}, {"row_count", model.row_count}}},
          {"power", target_json(model.power)},
          {"tns", target_json(model.tns)}};
}

TrainedModel model_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "lorecast-model") corrupt("not a model document");
  try {
    const int fmt_version = j.at("format_version").get<int>();
    if (fmt_version != kModelFormatVersion)
      throw PredictorError(Code::VersionMismatch,
                           fmt::format("model format version {} is not supported (expected {})",
                                       fmt_version, kModelFormatVersion));
    TrainedModel m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != features::kSchemaVersion)
      throw PredictorError(Code::SchemaMismatch,
                           fmt::format("model feature schema version {} does not match version {}",
                                       m.schema_version, features::kSchemaVersion));
    m.schema_hash = j.at("schema_hash").get<std::string>();
    if (m.schema_hash != features::schema_hash())
      throw PredictorError(Code::SchemaHashMismatch,
                           fmt::format("model schema hash {} does not match {}", m.schema_hash,
                                       features::schema_hash()));
    m.learning_rate = finite(j.at("learning_rate"), "learning rate");
    if (!(m.learning_rate > 0.0 && m.learning_rate <= 1.0)) corrupt("learning rate out of range");
    m.train_seed = j.at("train_seed").get<std::uint64_t>();
    const auto& meta = j.at("metadata");
    m.timestamp = meta.at("timestamp").get<std::string>();
    m.row_count = meta.at("row_count").get<std::size_t>();
    const auto n_features = features::feature_names().size();
    m.power = target_from_json(j.at("power"), m.learning_rate, n_features);
    m.tns = target_from_json(j.at("tns"), m.learning_rate, n_features);
    return m;
  } catch (const json::exception& e) {
    corrupt(e.what());
  } catch (const std::invalid_argument& e) {
    corrupt(e.what());
  }
}

std::string serialize_model(const TrainedModel& model) { return to_json(model).dump(1) + "\n"; }

TrainedModel deserialize_model(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) corrupt("not valid JSON");
  return model_from_json(j);
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PredictorError(Code::Io, fmt::format("cannot write {}", path.string()));
  out << serialize_model(model);
  if (!out) throw PredictorError(Code::Io, fmt::format("write to {} failed", path.string()));
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PredictorError(Code::Io, fmt::format("cannot read {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

Evaluation evaluate(const TrainedModel& model, const Dataset& data) {
  if (data.rows.empty()) throw PredictorError(Code::EmptyDataset, "dataset has no rows");
  metrics::EvalSet power{{}, "power"};
  metrics::EvalSet tns{{}, "tns"};
  for (const auto& row : data.rows) {
    const auto f = predict(model, row.features);
    power.pairs.push_back({f.power_uW, row.power_uW});
    tns.pairs.push_back({f.tns_ns, std::fabs(row.tns_ns)});
  }
  return {metrics::evaluate(power), metrics::evaluate(tns)};
}

}  // namespace lorecast::predictor
