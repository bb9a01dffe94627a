#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lorecast/features/feature_vector.hpp"
#include "lorecast/metrics/metrics.hpp"
#include "lorecast/predictor/gbdt.hpp"

namespace lorecast::predictor {

/// Version of the `.lcmodel.json` layout.
inline constexpr int kModelFormatVersion = 1;

class PredictorError : public std::runtime_error {
 public:
  enum class Code {
    EmptyDataset,
    SchemaMismatch,
    NonFiniteTarget,
    InvalidConfig,
    VersionMismatch,
    CorruptFile,
    SchemaHashMismatch,
    Io,
  };
  PredictorError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] Code code() const { return code_; }

 private:
  Code code_;
};

std::string_view error_code_name(PredictorError::Code code);

enum class Transform { Identity, Log1p };
std::string_view transform_name(Transform t);
Transform parse_transform(std::string_view name);

struct DataRow {
  std::string design;  // optional label
  features::FeatureVector features;
  double power_uW = 0.0;
  double tns_ns = 0.0;  // absolute value
};

struct Dataset {
  int schema_version = features::kSchemaVersion;
  std::vector<DataRow> rows;
};

/// Header: optional `design`, the schema names, then `power_uW,tns_ns`.
/// Negative TNS values are stored as their magnitude.
Dataset read_dataset_csv(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);
void save_dataset(const Dataset& data, const std::filesystem::path& path);

struct TrainConfig {
  int n_trees = 200;
  int max_depth = 6;
  double learning_rate = 0.05;
  int min_leaf_rows = 2;
  std::uint64_t seed = 0;
  double row_subsample = 1.0;
  double feature_subsample = 1.0;
  Transform power_transform = Transform::Log1p;
  Transform tns_transform = Transform::Identity;

  [[nodiscard]] BoostConfig boost() const;
};

struct TargetModel {
  Transform transform = Transform::Identity;
  Ensemble ensemble;
  friend bool operator==(const TargetModel&, const TargetModel&) = default;
};

struct TrainedModel {
  int schema_version = features::kSchemaVersion;
  std::string schema_hash;
  TargetModel power;
  TargetModel tns;
  double learning_rate = 0.05;
  std::uint64_t train_seed = 0;
  /// Left empty by train(); callers that want provenance stamp it.
  std::string timestamp;
  std::size_t row_count = 0;

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

struct Forecast {
  double power_uW = 0.0;
  double tns_ns = 0.0;
};

TrainedModel train(const Dataset& data, const TrainConfig& cfg);

/// Throws PredictorError(SchemaMismatch) when the vector's schema differs.
Forecast predict(const TrainedModel& model, const features::FeatureVector& fv);

nlohmann::json to_json(const TrainedModel& model);
/// Throws PredictorError with VersionMismatch, SchemaMismatch,
/// SchemaHashMismatch or CorruptFile.
TrainedModel model_from_json(const nlohmann::json& j);

std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

struct Evaluation {
  metrics::MetricsReport power;
  metrics::MetricsReport tns;
};

/// Throws PredictorError(EmptyDataset) on no rows; metric errors propagate as
/// metrics::UndefinedMetric.
Evaluation evaluate(const TrainedModel& model, const Dataset& data);

}  // namespace lorecast::predictor
