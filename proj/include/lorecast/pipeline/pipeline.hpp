#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lorecast/features/feature_vector.hpp"
#include "lorecast/llm/client.hpp"
#include "lorecast/predictor/model.hpp"
#include "lorecast/promptgen/promptgen.hpp"
#include "lorecast/verilog/diagnostic.hpp"

namespace lorecast::pipeline {

/// Iteration limit of the generate/check/feedback loop.
inline constexpr int kDefaultMaxIterations = 10;

/// Message of the diagnostic synthesized when a response holds no code.
inline constexpr std::string_view kNoCodeMessage = "no Verilog code block found in response";

enum class PromptKind { Repic, Feedback, Direct };
std::string_view prompt_kind_name(PromptKind k);

struct Attempt {
  int index = 0;
  PromptKind prompt_kind = PromptKind::Repic;
  std::string prompt_text;
  std::string response_text;
  std::optional<std::string> extracted_code;
  std::optional<verilog::SyntaxReport> syntax_report;
  bool truncated = false;
  std::int64_t wall_ms = 0;
};

enum class Outcome { SyntaxOk, MaxIterationsExhausted, NoCodeExtracted, BackendFailed };
std::string_view outcome_name(Outcome o);

struct GenerationSession {
  std::string spec_digest;
  std::vector<Attempt> attempts;
  Outcome outcome = Outcome::MaxIterationsExhausted;
  std::optional<std::string> final_code;
  int max_iterations = kDefaultMaxIterations;
  std::string backend_error;  // set when outcome is BackendFailed
  std::optional<std::filesystem::path> log_path;
};

struct PipelineOptions {
  int max_iterations = kDefaultMaxIterations;
  std::string model_id;
  double temperature = 0.0;
  int max_output_tokens = 4096;
  llm::RetryPolicy retry;
  promptgen::TemplateSet templates = promptgen::TemplateSet::builtin();
  /// When set, each session is appended to `<dir>/<tag>.jsonl` as it runs.
  std::optional<std::filesystem::path> session_dir;
  /// Leave wall-clock fields out of logs so equal inputs give equal bytes.
  bool record_timing = true;
};

/// Runs the generate, check and feedback loop for one design.
GenerationSession generate_with_ipref(const promptgen::DesignSpec& spec, llm::LlmBackend& backend,
                                      const PipelineOptions& opts = {});

struct DirectCode {
  std::string text;
};
using DesignInput = std::variant<promptgen::DesignSpec, DirectCode>;

struct ForecastResult {
  predictor::Forecast forecast;
  GenerationSession session;
  features::FeatureVector features;
  features::EdaParams eda;
  std::string model_id_used;
  std::string predictor_version;
};

/// Why no forecast was produced. The session is kept for inspection.
struct Refusal {
  GenerationSession session;
  std::string reason;
};

using ForecastOutcome = std::variant<ForecastResult, Refusal>;

/// Spec input needs a backend; code input skips generation and is recorded
/// as a single direct attempt. Predictor errors (schema mismatch) propagate.
ForecastOutcome forecast(const DesignInput& input, const predictor::TrainedModel& model,
                         const features::EdaParams& eda, llm::LlmBackend* backend,
                         const PipelineOptions& opts = {});

using BackendFactory = std::function<std::unique_ptr<llm::LlmBackend>(std::size_t index)>;

struct BatchResult {
  std::vector<ForecastOutcome> items;  // input order
  double syntax_rate = 0.0;
};

/// Designs run independently (at most `max_parallel` at a time), each with
/// its own backend from `make_backend`. One failure never aborts the batch.
BatchResult batch_forecast(const std::vector<DesignInput>& inputs, const predictor::TrainedModel& model,
                           const features::EdaParams& eda, const BackendFactory& make_backend,
                           const PipelineOptions& opts = {}, std::size_t max_parallel = 1);

std::string predictor_version(const predictor::TrainedModel& model);

nlohmann::json to_json(const verilog::SyntaxReport& report);
nlohmann::json to_json(const Attempt& a, bool with_timing = true);
nlohmann::json to_json(const GenerationSession& s, bool with_attempts = true);
nlohmann::json to_json(const ForecastResult& r);
nlohmann::json to_json(const Refusal& r);

}  // namespace lorecast::pipeline
