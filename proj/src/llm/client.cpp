#include "lorecast/llm/client.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lorecast/digest.hpp"

namespace lorecast::llm {

using Category = LlmError::Category;
using nlohmann::json;

void LlmRequest::validate() const {
  if (prompt_text.empty()) throw std::invalid_argument("prompt is empty");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (max_output_tokens < 1) throw std::invalid_argument("max_output_tokens must be >= 1");
}

LlmError::LlmError(Category category, const std::string& what, int http_status)
    : std::runtime_error(what), category_(category), http_status_(http_status) {}

bool LlmError::retryable() const {
  switch (category_) {
    case Category::Network:
    case Category::Timeout:
    case Category::RateLimited:
    case Category::ServerError:
      return true;
    default:
      return false;
  }
}

LlmError LlmError::with_attempts(int attempts) const {
  LlmError e(category_, fmt::format("{} (after {} attempt{})", what(), attempts, attempts == 1 ? "" : "s"),
             http_status_);
  e.attempts_ = attempts;
  return e;
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Network: return "network";
    case Category::Timeout: return "timeout";
    case Category::RateLimited: return "rate-limited";
    case Category::ServerError: return "server-error";
    case Category::Auth: return "auth";
    case Category::BadRequest: return "bad-request";
    case Category::Protocol: return "protocol";
    case Category::ReplayExhausted: return "replay-exhausted";
    case Category::ReplayMismatch: return "replay-mismatch";
    case Category::Config: return "config";
  }
  return "?";
}

Category classify_status(int status) {
  if (status == 401 || status == 403) return Category::Auth;
  if (status == 408) return Category::Timeout;
  if (status == 429) return Category::RateLimited;
  if (status >= 500) return Category::ServerError;
  return Category::BadRequest;
}

// ---------------------------------------------------------------------------
// Replay

namespace {

ReplayEntry entry_from_json(const json& j) {
  if (j.is_string()) return {j.get<std::string>(), std::nullopt, false};
  if (!j.is_object() || !j.contains("text") || !j["text"].is_string())
    throw LlmError(Category::Config, "replay entry must be a string or an object with \"text\"");
  ReplayEntry e{j["text"].get<std::string>(), std::nullopt, j.value("truncated", false)};
  if (auto it = j.find("prompt_digest"); it != j.end() && it->is_string()) e.prompt_digest = it->get<std::string>();
  return e;
}

}  // namespace

ReplayScript ReplayScript::parse(std::string_view text) {
  ReplayScript script;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return script;
  if (text[first] == '[') {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw LlmError(Category::Config, "replay script is not a JSON array");
    for (const auto& e : j) script.entries.push_back(entry_from_json(e));
    return script;
  }
  std::size_t start = 0;
  int lineno = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == text.npos ? text.npos : nl - start);
    start = nl == text.npos ? text.size() : nl + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw LlmError(Category::Config, fmt::format("replay script line {} is not JSON", lineno));
    script.entries.push_back(entry_from_json(j));
  }
  return script;
}

ReplayScript ReplayScript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LlmError(Category::Config, fmt::format("cannot read replay script {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

ReplayScript ReplayScript::of(std::vector<std::string> texts) {
  ReplayScript s;
  for (auto& t : texts) s.entries.push_back({std::move(t), std::nullopt, false});
  return s;
}

ReplayBackend::ReplayBackend(ReplayScript script) : script_(std::move(script)) {}

LlmResponse ReplayBackend::complete(const LlmRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  std::lock_guard lock(mu_);
  if (cursor_ >= script_.entries.size())
    throw LlmError(Category::ReplayExhausted,
                   fmt::format("replay script exhausted after {} responses", script_.entries.size()));
  const auto& entry = script_.entries[cursor_];
  if (entry.prompt_digest) {
    const auto digest = content_digest(request.prompt_text);
    if (digest != *entry.prompt_digest)
      throw LlmError(Category::ReplayMismatch,
                     fmt::format("request {} prompt digest {} does not match scripted {}", cursor_,
                                 digest, *entry.prompt_digest));
  }
  ++cursor_;
  LlmResponse r;
  r.text = entry.text;
  r.backend_id = id();
  r.truncated = entry.truncated;
  r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  return r;
}

std::size_t ReplayBackend::consumed() const {
  std::lock_guard lock(mu_);
  return cursor_;
}

// ---------------------------------------------------------------------------
// Retries

std::vector<std::chrono::milliseconds> RetryPolicy::schedule() const {
  std::vector<std::chrono::milliseconds> out;
  double delay = static_cast<double>(initial_backoff.count());
  for (int i = 0; i + 1 < max_attempts; ++i) {
    out.emplace_back(static_cast<std::int64_t>(std::min(delay, static_cast<double>(max_backoff.count()))));
    delay *= multiplier;
  }
  return out;
}

LlmResponse with_retries(LlmBackend& backend, const LlmRequest& request, const RetryPolicy& policy) {
  if (policy.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  const auto delays = policy.schedule();
  for (int attempt = 1;; ++attempt) {
    try {
      return backend.complete(request);
    } catch (const LlmError& e) {
      if (!e.retryable() || attempt >= policy.max_attempts) throw e.with_attempts(attempt);
      const auto delay = delays[static_cast<std::size_t>(attempt - 1)];
      if (policy.sleep)
        policy.sleep(delay);
      else
        std::this_thread::sleep_for(delay);
    }
  }
}

}  // namespace lorecast::llm
