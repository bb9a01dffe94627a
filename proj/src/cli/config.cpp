#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lorecast/cli/cli.hpp"
#include "lorecast/csv.hpp"

extern char** environ;

namespace lorecast::cli {

using nlohmann::json;

Env process_env() {
  Env env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    if (!kv.starts_with("LORECAST_")) continue;
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return env;
}

std::string_view format_name(Format f) {
  switch (f) {
    case Format::Json: return "json";
    case Format::Csv: return "csv";
    case Format::Text: return "text";
  }
  return "?";
}

Format parse_format(std::string_view s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "text") return Format::Text;
  throw std::invalid_argument(fmt::format("unknown output format '{}' (json, csv, text)", s));
}

features::EdaParams CliConfig::eda() const {
  if (!clock_period_ns)
    throw std::invalid_argument(
        "no clock period given (use --clock, LORECAST_CLOCK_NS or eda.clock_period_ns in the config)");
  features::EdaParams p{*clock_period_ns, target_utilization, effort};
  p.validate();
  return p;
}

namespace {

double env_number(const Env& env, const char* key, double fallback) {
  auto it = env.find(key);
  if (it == env.end() || it->second.empty()) return fallback;
  try {
    return csv::parse_number(it->second);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument(fmt::format("{}='{}' is not a number", key, it->second));
  }
}

int env_int(const Env& env, const char* key, int fallback) {
  const double v = env_number(env, key, fallback);
  if (v != static_cast<int>(v)) throw std::invalid_argument(fmt::format("{} must be an integer", key));
  return static_cast<int>(v);
}

std::string env_string(const Env& env, const char* key, const std::string& fallback) {
  auto it = env.find(key);
  return it == env.end() || it->second.empty() ? fallback : it->second;
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) field = it->get<T>();
}

}  // namespace

CliConfig resolve_config(const json* file, const Env& env, const ConfigOverrides& flags) {
  CliConfig c;
  std::string effort = std::string(features::effort_name(c.effort));
  std::string format = "json";

  if (file) {
    try {
      if (auto b = file->find("backend"); b != file->end()) {
        take(*b, "endpoint_url", c.backend.endpoint_url);
        take(*b, "model_id", c.backend.model_id);
        take(*b, "timeout_s", c.backend.timeout_s);
        take(*b, "max_attempts", c.backend.max_attempts);
        take(*b, "replay", c.backend.replay_path);
      }
      take(*file, "max_iterations", c.max_iterations);
      if (auto e = file->find("eda"); e != file->end()) {
        if (auto it = e->find("clock_period_ns"); it != e->end() && !it->is_null())
          c.clock_period_ns = it->get<double>();
        take(*e, "target_utilization", c.target_utilization);
        take(*e, "effort", effort);
      }
      take(*file, "model_path", c.model_path);
      take(*file, "template_dir", c.template_dir);
      take(*file, "session_dir", c.session_dir);
      take(*file, "output_format", format);
    } catch (const json::exception& e) {
      throw std::invalid_argument(fmt::format("config file: {}", e.what()));
    }
  }

  c.backend.endpoint_url = env_string(env, "LORECAST_ENDPOINT_URL", c.backend.endpoint_url);
  c.backend.model_id = env_string(env, "LORECAST_MODEL_ID", c.backend.model_id);
  c.backend.timeout_s = env_number(env, "LORECAST_TIMEOUT_S", c.backend.timeout_s);
  c.backend.max_attempts = env_int(env, "LORECAST_MAX_ATTEMPTS", c.backend.max_attempts);
  c.backend.replay_path = env_string(env, "LORECAST_REPLAY", c.backend.replay_path);
  c.max_iterations = env_int(env, "LORECAST_MAX_ITERATIONS", c.max_iterations);
  if (env.contains("LORECAST_CLOCK_NS")) c.clock_period_ns = env_number(env, "LORECAST_CLOCK_NS", 0.0);
  c.target_utilization = env_number(env, "LORECAST_UTILIZATION", c.target_utilization);
  effort = env_string(env, "LORECAST_EFFORT", effort);
  c.model_path = env_string(env, "LORECAST_MODEL", c.model_path);
  c.template_dir = env_string(env, "LORECAST_TEMPLATE_DIR", c.template_dir);
  c.session_dir = env_string(env, "LORECAST_SESSION_DIR", c.session_dir);
  format = env_string(env, "LORECAST_FORMAT", format);

  if (flags.endpoint_url) c.backend.endpoint_url = *flags.endpoint_url;
  if (flags.model_id) c.backend.model_id = *flags.model_id;
  if (flags.timeout_s) c.backend.timeout_s = *flags.timeout_s;
  if (flags.max_attempts) c.backend.max_attempts = *flags.max_attempts;
  if (flags.replay_path) c.backend.replay_path = *flags.replay_path;
  if (flags.max_iterations) c.max_iterations = *flags.max_iterations;
  if (flags.clock_period_ns) c.clock_period_ns = *flags.clock_period_ns;
  if (flags.target_utilization) c.target_utilization = *flags.target_utilization;
  if (flags.effort) effort = *flags.effort;
  if (flags.model_path) c.model_path = *flags.model_path;
  if (flags.template_dir) c.template_dir = *flags.template_dir;
  if (flags.session_dir) c.session_dir = *flags.session_dir;
  if (flags.output_format) format = *flags.output_format;

  c.effort = features::parse_effort(effort);
  c.output_format = parse_format(format);
  if (c.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (c.backend.max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
  if (!(c.backend.timeout_s > 0.0)) throw std::invalid_argument("timeout must be positive");
  features::EdaParams{c.clock_period_ns.value_or(1.0), c.target_utilization, c.effort}.validate();
  return c;
}

json to_json(const CliConfig& c) {
  return {{"backend",
           {{"endpoint_url", c.backend.endpoint_url},
            {"model_id", c.backend.model_id},
            {"timeout_s", c.backend.timeout_s},
            {"max_attempts", c.backend.max_attempts},
            {"replay", c.backend.replay_path}}},
          {"max_iterations", c.max_iterations},
          {"eda",
           {{"clock_period_ns", c.clock_period_ns ? json(*c.clock_period_ns) : json()},
            {"target_utilization", c.target_utilization},
            {"effort", features::effort_name(c.effort)}}},
          {"model_path", c.model_path},
          {"template_dir", c.template_dir},
          {"session_dir", c.session_dir},
          {"output_format", format_name(c.output_format)}};
}

}  // namespace lorecast::cli
