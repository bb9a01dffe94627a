#include "lorecast/features/feature_vector.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lorecast/csv.hpp"
#include "lorecast/digest.hpp"

namespace lorecast::features {
namespace {

constexpr std::array<std::string_view, 32> kNames = {
    "module_count",
    "port_bit_total",
    "reg_bit_total",
    "wire_bit_total",
    "always_block_count",
    "seq_always_count",
    "comb_always_count",
    "continuous_assign_count",
    "blocking_assign_count",
    "nonblocking_assign_count",
    "if_count",
    "case_count",
    "case_item_total",
    "for_loop_count",
    "instance_count",
    "mux_ternary_count",
    "op_add_sub_count",
    "op_mul_count",
    "op_div_mod_count",
    "op_shift_count",
    "op_compare_count",
    "op_bitwise_count",
    "op_reduction_count",
    "op_logical_count",
    "concat_count",
    "max_expr_depth",
    "total_node_count",
    "clock_period_ns",
    "target_utilization",
    "effort_low",
    "effort_medium",
    "effort_high",
};

}  // namespace

std::string_view effort_name(Effort e) {
  switch (e) {
    case Effort::Low: return "low";
    case Effort::Medium: return "medium";
    case Effort::High: return "high";
  }
  return "medium";
}

Effort parse_effort(std::string_view name) {
  if (name == "low") return Effort::Low;
  if (name == "medium") return Effort::Medium;
  if (name == "high") return Effort::High;
  throw std::invalid_argument(
      fmt::format("effort must be low, medium or high, got '{}'", name));
}

void EdaParams::validate() const {
  if (!(clock_period_ns > 0.0) || !std::isfinite(clock_period_ns))
    throw std::invalid_argument(
        fmt::format("clock period must be a positive number of ns, got {}", clock_period_ns));
  if (!(target_utilization > 0.0 && target_utilization <= 1.0))
    throw std::invalid_argument(
        fmt::format("target utilization must be in (0, 1], got {}", target_utilization));
}

std::span<const std::string_view> feature_names() { return kNames; }

std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return i;
  throw std::out_of_range(fmt::format("unknown feature '{}'", name));
}

std::string schema_hash() {
  std::string text = fmt::format("v{}", kSchemaVersion);
  for (auto n : kNames) {
    text += ',';
    text += n;
  }
  return content_digest(text);
}

double FeatureVector::get(std::string_view name) const { return values.at(feature_index(name)); }

double& FeatureVector::at(std::string_view name) { return values.at(feature_index(name)); }

void FeatureVector::validate() const {
  if (schema_version != kSchemaVersion)
    throw std::invalid_argument(fmt::format("feature schema version {} (expected {})",
                                            schema_version, kSchemaVersion));
  if (values.size() != kNames.size())
    throw std::invalid_argument(fmt::format("feature vector has {} values (expected {})",
                                            values.size(), kNames.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0)
      throw std::invalid_argument(
          fmt::format("feature {} has invalid value {}", kNames[i], values[i]));
  }
}

std::string csv_header() {
  std::string out = "schema_version";
  for (auto n : kNames) {
    out += ',';
    out += n;
  }
  return out;
}

std::string to_csv_row(const FeatureVector& fv) {
  std::string out = std::to_string(fv.schema_version);
  for (double v : fv.values) out += fmt::format(",{}", v);
  return out;
}

FeatureVector from_csv_row(std::string_view row) {
  const auto cells = csv::split(row);
  FeatureVector fv;
  fv.values.clear();
  fv.schema_version = static_cast<int>(csv::parse_number(cells.at(0)));
  for (std::size_t i = 1; i < cells.size(); ++i) fv.values.push_back(csv::parse_number(cells[i]));
  fv.validate();
  return fv;
}

nlohmann::json to_json(const FeatureVector& fv) {
  nlohmann::json j;
  j["schema_version"] = fv.schema_version;
  for (std::size_t i = 0; i < fv.values.size() && i < kNames.size(); ++i)
    j[std::string(kNames[i])] = fv.values[i];
  return j;
}

FeatureVector from_json(const nlohmann::json& j) {
  FeatureVector fv;
  fv.schema_version = j.at("schema_version").get<int>();
  if (fv.schema_version != kSchemaVersion)
    throw std::invalid_argument(fmt::format("feature schema version {} (expected {})",
                                            fv.schema_version, kSchemaVersion));
  for (auto n : kNames) {
    auto it = j.find(std::string(n));
    if (it == j.end())
      throw std::invalid_argument(fmt::format("feature '{}' missing from JSON", n));
    fv.values.push_back(it->get<double>());
  }
  fv.validate();
  return fv;
}

}  // namespace lorecast::features
