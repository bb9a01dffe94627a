#pragma once

// Checks a document against the subset of JSON Schema used by the files in
// schemas/: type, enum, required, properties, items, minimum, maximum,
// exclusiveMinimum. Returns one message per violation.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lorecast::testing {

inline bool schema_type_matches(const nlohmann::json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

inline void schema_check(const nlohmann::json& schema, const nlohmann::json& v, const std::string& at,
                         std::vector<std::string>& errors) {
  if (auto it = schema.find("type"); it != schema.end()) {
    bool any = false;
    if (it->is_array()) {
      for (const auto& t : *it) any = any || schema_type_matches(v, t.get<std::string>());
    } else {
      any = schema_type_matches(v, it->get<std::string>());
    }
    if (!any) {
      errors.push_back(at + ": wrong type");
      return;
    }
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    bool found = false;
    for (const auto& e : *it) found = found || e == v;
    if (!found) errors.push_back(at + ": value not in enum");
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) errors.push_back(at + ": below minimum");
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) errors.push_back(at + ": above maximum");
    if (schema.contains("exclusiveMinimum") && !(x > schema["exclusiveMinimum"].get<double>()))
      errors.push_back(at + ": not above exclusiveMinimum");
  }
  if (v.is_object()) {
    for (const auto& r : schema.value("required", nlohmann::json::array()))
      if (!v.contains(r.get<std::string>())) errors.push_back(at + ": missing " + r.get<std::string>());
    if (auto it = schema.find("properties"); it != schema.end())
      for (const auto& [key, sub] : it->items())
        if (v.contains(key)) schema_check(sub, v[key], at + "." + key, errors);
  }
  if (v.is_array() && schema.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i)
      schema_check(schema["items"], v[i], at + "[" + std::to_string(i) + "]", errors);
}

inline std::vector<std::string> schema_errors(const nlohmann::json& schema, const nlohmann::json& v) {
  std::vector<std::string> errors;
  schema_check(schema, v, "$", errors);
  return errors;
}

}  // namespace lorecast::testing
