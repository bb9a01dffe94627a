#include "lorecast/pipeline/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lorecast/digest.hpp"
#include "lorecast/features/extract.hpp"
#include "lorecast/metrics/metrics.hpp"
#include "lorecast/verilog/parser.hpp"

namespace lorecast::pipeline {

using nlohmann::json;

std::string_view prompt_kind_name(PromptKind k) {
  switch (k) {
    case PromptKind::Repic: return "repic";
    case PromptKind::Feedback: return "feedback";
    case PromptKind::Direct: return "direct";
  }
  return "?";
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::SyntaxOk: return "SyntaxOk";
    case Outcome::MaxIterationsExhausted: return "MaxIterationsExhausted";
    case Outcome::NoCodeExtracted: return "NoCodeExtracted";
    case Outcome::BackendFailed: return "BackendFailed";
  }
  return "?";
}

json to_json(const verilog::SyntaxReport& report) {
  json diags = json::array();
  for (const auto& d : report.diagnostics)
    diags.push_back({{"line", d.span.line},
                     {"column", d.span.column},
                     {"kind", verilog::diag_kind_name(d.kind)},
                     {"message", d.message}});
  return {{"ok", report.ok()}, {"diagnostics", std::move(diags)}};
}

json to_json(const Attempt& a, bool with_timing) {
  json j = {{"index", a.index},
            {"prompt_kind", prompt_kind_name(a.prompt_kind)},
            {"prompt_text", a.prompt_text},
            {"response_text", a.response_text},
            {"extracted_code", a.extracted_code ? json(*a.extracted_code) : json()},
            {"syntax_report", a.syntax_report ? to_json(*a.syntax_report) : json()},
            {"truncated", a.truncated}};
  if (with_timing) j["wall_ms"] = a.wall_ms;
  return j;
}

json to_json(const GenerationSession& s, bool with_attempts) {
  json j = {{"spec_digest", s.spec_digest},
            {"outcome", outcome_name(s.outcome)},
            {"max_iterations", s.max_iterations},
            {"attempt_count", s.attempts.size()},
            {"final_code", s.final_code ? json(*s.final_code) : json()},
            {"log_path", s.log_path ? json(s.log_path->string()) : json()}};
  if (!s.backend_error.empty()) j["backend_error"] = s.backend_error;
  if (with_attempts) {
    json attempts = json::array();
    for (const auto& a : s.attempts) attempts.push_back(to_json(a));
    j["attempts"] = std::move(attempts);
  }
  return j;
}

json to_json(const ForecastResult& r) {
  return {{"status", "ok"},
          {"forecast", {{"power_uW", r.forecast.power_uW}, {"tns_ns", r.forecast.tns_ns}}},
          {"features", features::to_json(r.features)},
          {"eda",
           {{"clock_period_ns", r.eda.clock_period_ns},
            {"target_utilization", r.eda.target_utilization},
            {"effort", features::effort_name(r.eda.effort)}}},
          {"model_id_used", r.model_id_used},
          {"predictor_version", r.predictor_version},
          {"session", to_json(r.session, false)}};
}

json to_json(const Refusal& r) {
  return {{"status", "refused"}, {"reason", r.reason}, {"session", to_json(r.session, false)}};
}

std::string predictor_version(const predictor::TrainedModel& model) {
  return fmt::format("lcmodel-v{}/schema-{}/{}", predictor::kModelFormatVersion, model.schema_version,
                     model.schema_hash);
}

namespace {

// Append-only JSONL writer: every record is flushed as soon as it exists so
// an interrupted run keeps its partial session.
class SessionLog {
 public:
  SessionLog(const PipelineOptions& opts, const std::string& tag) : timing_(opts.record_timing) {
    if (!opts.session_dir) return;
    std::filesystem::create_directories(*opts.session_dir);
    path_ = *opts.session_dir / (tag + ".jsonl");
    out_.open(*path_, std::ios::trunc);
    if (!out_) throw std::runtime_error(fmt::format("cannot write session log {}", path_->string()));
  }

  void write(const json& record) {
    if (!out_.is_open()) return;
    out_ << record.dump() << '\n';
    out_.flush();
  }
  [[nodiscard]] bool timing() const { return timing_; }
  [[nodiscard]] const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  bool timing_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
};

std::int64_t ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
      .count();
}

verilog::SyntaxReport no_code_report(std::string_view response) {
  verilog::SyntaxReport r;
  verilog::SyntaxDiagnostic d;
  d.span.line = 1;
  d.span.column = 1;
  d.kind = verilog::DiagKind::UnexpectedToken;
  d.message = std::string(kNoCodeMessage);
  d.offending_line_text = std::string(response.substr(0, response.find('\n')));
  r.diagnostics.push_back(std::move(d));
  return r;
}

}  // namespace

GenerationSession generate_with_ipref(const promptgen::DesignSpec& spec, llm::LlmBackend& backend,
                                      const PipelineOptions& opts) {
  if (opts.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  spec.validate();

  GenerationSession session;
  session.max_iterations = opts.max_iterations;
  session.spec_digest = content_digest(promptgen::to_json(spec).dump());
  const auto tag = fmt::format("{}-{}", spec.module_name, session.spec_digest.substr(0, 8));
  SessionLog log(opts, tag);
  session.log_path = log.path();
  log.write({{"record", "session"},
             {"spec_digest", session.spec_digest},
             {"module_name", spec.module_name},
             {"max_iterations", opts.max_iterations},
             {"backend_id", backend.id()},
             {"model_id", opts.model_id},
             {"template_version", opts.templates.version()}});

  // Code and report the next feedback prompt is built from.
  std::string last_text;
  verilog::SyntaxReport last_report;
  bool any_code = false;

  for (int i = 0; i < opts.max_iterations; ++i) {
    const auto start = std::chrono::steady_clock::now();
    Attempt a;
    a.index = i;
    if (i == 0) {
      a.prompt_kind = PromptKind::Repic;
      a.prompt_text = promptgen::build_repic(spec, opts.templates).rendered_text;
    } else {
      a.prompt_kind = PromptKind::Feedback;
      a.prompt_text = promptgen::build_feedback(last_text, last_report, i, opts.templates).rendered_text;
    }

    llm::LlmRequest req;
    req.prompt_text = a.prompt_text;
    req.temperature = opts.temperature;
    req.max_output_tokens = opts.max_output_tokens;
    req.model_id = opts.model_id;
    req.request_tag = fmt::format("{}#{}", tag, i);
    try {
      const auto resp = llm::with_retries(backend, req, opts.retry);
      a.response_text = resp.text;
      a.truncated = resp.truncated;
    } catch (const llm::LlmError& e) {
      session.outcome = Outcome::BackendFailed;
      session.backend_error = fmt::format("{}: {}", llm::category_name(e.category()), e.what());
      break;
    }

    a.extracted_code = promptgen::extract_code(a.response_text);
    if (a.extracted_code) {
      any_code = true;
      session.final_code = a.extracted_code;
      a.syntax_report = verilog::check_syntax(*a.extracted_code);
      last_text = *a.extracted_code;
      last_report = *a.syntax_report;
    } else {
      last_text = a.response_text.empty() ? std::string("(empty response)") : a.response_text;
      last_report = no_code_report(last_text);
    }
    a.wall_ms = ms_since(start);
    const bool ok = a.syntax_report && a.syntax_report->ok();
    log.write([&] {
      auto j = to_json(a, log.timing());
      j["record"] = "attempt";
      return j;
    }());
    session.attempts.push_back(std::move(a));
    if (ok) {
      session.outcome = Outcome::SyntaxOk;
      break;
    }
  }

  if (session.outcome != Outcome::SyntaxOk && session.outcome != Outcome::BackendFailed)
    session.outcome = any_code ? Outcome::MaxIterationsExhausted : Outcome::NoCodeExtracted;
  log.write({{"record", "outcome"},
             {"outcome", outcome_name(session.outcome)},
             {"attempt_count", session.attempts.size()},
             {"final_code", session.final_code ? json(*session.final_code) : json()},
             {"backend_error", session.backend_error}});
  return session;
}

namespace {

GenerationSession direct_session(const std::string& code) {
  GenerationSession s;
  s.max_iterations = 1;
  s.spec_digest = content_digest(code);
  Attempt a;
  a.prompt_kind = PromptKind::Direct;
  a.response_text = code;
  a.extracted_code = code;
  a.syntax_report = verilog::check_syntax(code);
  s.outcome = a.syntax_report->ok() ? Outcome::SyntaxOk : Outcome::MaxIterationsExhausted;
  s.final_code = code;
  s.attempts.push_back(std::move(a));
  return s;
}

}  // namespace

ForecastOutcome forecast(const DesignInput& input, const predictor::TrainedModel& model,
                         const features::EdaParams& eda, llm::LlmBackend* backend,
                         const PipelineOptions& opts) {
  eda.validate();
  GenerationSession session;
  std::string model_id = "direct";
  if (const auto* spec = std::get_if<promptgen::DesignSpec>(&input)) {
    if (!backend) throw std::invalid_argument("a design spec needs an LLM backend");
    session = generate_with_ipref(*spec, *backend, opts);
    model_id = opts.model_id.empty() ? backend->id() : opts.model_id;
  } else {
    session = direct_session(std::get<DirectCode>(input).text);
  }

  if (session.outcome != Outcome::SyntaxOk) {
    auto reason = fmt::format("generation ended with {}", outcome_name(session.outcome));
    if (!session.backend_error.empty()) reason += ": " + session.backend_error;
    return Refusal{std::move(session), std::move(reason)};
  }

  // Parse again rather than trusting the recorded report: nothing that fails
  // the checker may reach the predictor.
  const auto parsed = verilog::parse(*session.final_code);
  if (!parsed.ok()) return Refusal{std::move(session), "final code does not parse"};

  ForecastResult r;
  r.features = features::extract_features(parsed.forest, eda);
  r.forecast = predictor::predict(model, r.features);
  r.eda = eda;
  r.model_id_used = model_id;
  r.predictor_version = predictor_version(model);
  r.session = std::move(session);
  return r;
}

BatchResult batch_forecast(const std::vector<DesignInput>& inputs, const predictor::TrainedModel& model,
                           const features::EdaParams& eda, const BackendFactory& make_backend,
                           const PipelineOptions& opts, std::size_t max_parallel) {
  if (inputs.empty()) throw std::invalid_argument("batch_forecast needs at least one design");

  std::vector<std::optional<ForecastOutcome>> slots(inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      try {
        std::unique_ptr<llm::LlmBackend> backend;
        if (std::holds_alternative<promptgen::DesignSpec>(inputs[i]) && make_backend)
          backend = make_backend(i);
        slots[i] = forecast(inputs[i], model, eda, backend.get(), opts);
      } catch (const std::exception& e) {
        slots[i] = Refusal{{}, fmt::format("design {} failed: {}", i, e.what())};
        std::get<Refusal>(*slots[i]).session.outcome = Outcome::BackendFailed;
        std::get<Refusal>(*slots[i]).session.backend_error = e.what();
      }
    }
  };

  const auto n_threads = std::clamp<std::size_t>(max_parallel, 1, inputs.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  BatchResult out;
  std::vector<bool> ok;
  for (auto& s : slots) {
    const auto& session = std::visit([](const auto& v) -> const GenerationSession& { return v.session; }, *s);
    ok.push_back(session.outcome == Outcome::SyntaxOk);
    out.items.push_back(std::move(*s));
  }
  out.syntax_rate = metrics::syntax_rate(ok);
  return out;
}

}  // namespace lorecast::pipeline
