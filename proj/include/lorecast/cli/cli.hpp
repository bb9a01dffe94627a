#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lorecast/features/feature_vector.hpp"

namespace lorecast::cli {

enum ExitCode : int {
  kOk = 0,
  kDomainFailure = 1,  // syntax refusal, undefined metric, bad data
  kUsageError = 2,     // bad arguments, config or unreadable inputs
  kBackendFailure = 3,
};

using Env = std::map<std::string, std::string>;

/// The LORECAST_* variables of the current process.
Env process_env();

enum class Format { Json, Csv, Text };
std::string_view format_name(Format f);
Format parse_format(std::string_view s);

struct BackendConfig {
  std::string endpoint_url;
  std::string model_id;
  double timeout_s = 120.0;
  int max_attempts = 3;
  std::string replay_path;  // offline backend when set
};

struct CliConfig {
  BackendConfig backend;
  int max_iterations = 10;
  std::optional<double> clock_period_ns;
  double target_utilization = 0.7;
  features::Effort effort = features::Effort::Medium;
  std::string model_path;
  std::string template_dir;
  std::string session_dir;
  Format output_format = Format::Json;

  /// Throws std::invalid_argument when the clock period was never given.
  [[nodiscard]] features::EdaParams eda() const;
};

/// Values given on the command line; unset means "not given".
struct ConfigOverrides {
  std::optional<std::string> endpoint_url;
  std::optional<std::string> model_id;
  std::optional<double> timeout_s;
  std::optional<int> max_attempts;
  std::optional<std::string> replay_path;
  std::optional<int> max_iterations;
  std::optional<double> clock_period_ns;
  std::optional<double> target_utilization;
  std::optional<std::string> effort;
  std::optional<std::string> model_path;
  std::optional<std::string> template_dir;
  std::optional<std::string> session_dir;
  std::optional<std::string> output_format;
};

/// Layers defaults, the config file, environment variables and flags, each
/// overriding the one before. Throws std::invalid_argument on bad values.
CliConfig resolve_config(const nlohmann::json* file, const Env& env, const ConfigOverrides& flags);

nlohmann::json to_json(const CliConfig& cfg);

/// Runs one command line (without the program name). Results go to `out`,
/// messages to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Env& env);

}  // namespace lorecast::cli
