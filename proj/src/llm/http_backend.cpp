#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <regex>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lorecast/llm/client.hpp"

namespace lorecast::llm {

using Category = LlmError::Category;
using nlohmann::json;

HttpBackend::HttpBackend(HttpConfig config) : cfg_(std::move(config)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.endpoint_url, m, url))
    throw LlmError(Category::Config, fmt::format("endpoint URL '{}' is not http(s)://host[:port]/path",
                                                 cfg_.endpoint_url));
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  if (!(cfg_.timeout_s > 0.0)) throw LlmError(Category::Config, "timeout must be positive");
}

std::string HttpBackend::id() const { return "http:" + cfg_.model_id; }

LlmResponse HttpBackend::complete(const LlmRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  const auto model = request.model_id.empty() ? cfg_.model_id : request.model_id;
  const json body = {
      {"model", model},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt_text}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
  };

  httplib::Client client(origin_);
  const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(cfg_.timeout_s * 1000.0));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  if (!request.request_tag.empty()) headers.emplace("X-Request-Tag", request.request_tag);

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    throw LlmError(err == httplib::Error::Read || err == httplib::Error::Write ? Category::Timeout
                                                                                : Category::Network,
                   fmt::format("request to {} failed: {}", origin_, httplib::to_string(err)));
  }
  if (res->status != 200) {
    auto snippet = res->body.substr(0, 300);
    throw LlmError(classify_status(res->status), fmt::format("HTTP {}: {}", res->status, snippet),
                   res->status);
  }

  const json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw LlmError(Category::Protocol, "response body is not JSON", 200);
  LlmResponse out;
  try {
    const auto& choice = reply.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    out.text = content.is_null() ? std::string() : content.get<std::string>();
    const auto finish = choice.value("finish_reason", json());
    out.truncated = finish.is_string() && finish.get<std::string>() == "length";
  } catch (const json::exception& e) {
    throw LlmError(Category::Protocol, fmt::format("unexpected response shape: {}", e.what()), 200);
  }
  out.backend_id = id();
  out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return out;
}

}  // namespace lorecast::llm
