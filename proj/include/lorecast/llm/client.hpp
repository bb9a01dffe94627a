#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lorecast::llm {

struct LlmRequest {
  std::string prompt_text;
  double temperature = 0.0;
  int max_output_tokens = 4096;
  std::string model_id;
  std::string request_tag;  // correlates a request with its session log

  /// Throws std::invalid_argument on an empty prompt, negative temperature
  /// or a non-positive token limit.
  void validate() const;
};

struct LlmResponse {
  std::string text;
  std::int64_t latency_ms = 0;
  std::string backend_id;
  bool truncated = false;  // the backend stopped at the token limit
};

class LlmError : public std::runtime_error {
 public:
  enum class Category {
    Network,
    Timeout,
    RateLimited,
    ServerError,
    Auth,
    BadRequest,
    Protocol,
    ReplayExhausted,
    ReplayMismatch,
    Config,
  };

  LlmError(Category category, const std::string& what, int http_status = 0);

  [[nodiscard]] Category category() const { return category_; }
  [[nodiscard]] bool retryable() const;
  [[nodiscard]] int http_status() const { return http_status_; }
  /// Attempts made before giving up; set by with_retries().
  [[nodiscard]] int attempts() const { return attempts_; }
  [[nodiscard]] LlmError with_attempts(int attempts) const;

 private:
  Category category_;
  int http_status_;
  int attempts_ = 1;
};

std::string_view category_name(LlmError::Category c);

/// Maps an HTTP status to the error category used for it.
LlmError::Category classify_status(int status);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual LlmResponse complete(const LlmRequest& request) = 0;
  [[nodiscard]] virtual std::string id() const = 0;
};

struct ReplayEntry {
  std::string text;
  /// When set, the request prompt must have this content digest.
  std::optional<std::string> prompt_digest;
  bool truncated = false;
};

/// Canned responses served in order. Accepts a JSON array or JSONL whose
/// elements are strings or objects {"text", "prompt_digest"?, "truncated"?}.
struct ReplayScript {
  std::vector<ReplayEntry> entries;

  static ReplayScript parse(std::string_view text);
  static ReplayScript load(const std::filesystem::path& path);
  static ReplayScript of(std::vector<std::string> texts);
};

class ReplayBackend final : public LlmBackend {
 public:
  explicit ReplayBackend(ReplayScript script);
  LlmResponse complete(const LlmRequest& request) override;
  [[nodiscard]] std::string id() const override { return "replay"; }
  [[nodiscard]] std::size_t consumed() const;

 private:
  ReplayScript script_;
  mutable std::mutex mu_;
  std::size_t cursor_ = 0;
};

struct HttpConfig {
  std::string endpoint_url;  // full URL of the chat-completions endpoint
  std::string model_id;
  double timeout_s = 120.0;
  std::string api_key;  // sent as a bearer token when non-empty
};

/// Chat-completions style JSON POST with a single user message.
class HttpBackend final : public LlmBackend {
 public:
  explicit HttpBackend(HttpConfig config);
  LlmResponse complete(const LlmRequest& request) override;
  [[nodiscard]] std::string id() const override;

 private:
  HttpConfig cfg_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};
  Sleeper sleep;  // defaults to std::this_thread::sleep_for

  /// Delay before attempt i + 2, for i in [0, max_attempts - 1).
  [[nodiscard]] std::vector<std::chrono::milliseconds> schedule() const;
};

/// Calls `backend` until it succeeds, a terminal error occurs, or the
/// attempts run out. Errors leave with attempts() set.
LlmResponse with_retries(LlmBackend& backend, const LlmRequest& request, const RetryPolicy& policy);

}  // namespace lorecast::llm
