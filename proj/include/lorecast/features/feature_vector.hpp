#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lorecast::features {

/// Bumped whenever the feature list or its order changes. Trained models
/// carry it and refuse vectors of another version.
inline constexpr int kSchemaVersion = 1;

enum class Effort { Low, Medium, High };

std::string_view effort_name(Effort e);
/// Throws std::invalid_argument for anything but low/medium/high.
Effort parse_effort(std::string_view name);

struct EdaParams {
  double clock_period_ns = 0.0;
  double target_utilization = 0.7;
  Effort effort = Effort::Medium;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Names of all features in schema order: the AST counters followed by the
/// EDA parameters (effort is one-hot).
std::span<const std::string_view> feature_names();

/// Number of AST counters at the front of the schema.
inline constexpr std::size_t kAstFeatureCount = 27;

/// Position of `name` in the schema; throws std::out_of_range if unknown.
std::size_t feature_index(std::string_view name);

/// Digest of the schema version and names, used to detect silent drift.
std::string schema_hash();

struct FeatureVector {
  int schema_version = kSchemaVersion;
  std::vector<double> values;
  /// Width expressions that did not fold to a constant and were counted as
  /// one bit. Diagnostic only; not part of the schema.
  int unresolved_widths = 0;

  [[nodiscard]] double get(std::string_view name) const;
  [[nodiscard]] double& at(std::string_view name);

  /// Throws std::invalid_argument on wrong length, version, or a negative or
  /// non-finite value.
  void validate() const;
};

std::string csv_header();
std::string to_csv_row(const FeatureVector& fv);
FeatureVector from_csv_row(std::string_view row);

nlohmann::json to_json(const FeatureVector& fv);
FeatureVector from_json(const nlohmann::json& j);

}  // namespace lorecast::features
