#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vwsd {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct LlmRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 150;
  std::string seed_tag;  // salts the cache key
};

/// Single user-turn request.
LlmRequest make_user_request(std::string model, std::string prompt, double temperature, int max_tokens,
                             std::string seed_tag = {});

/// Throws ValidationError unless the request has a model, at least one user
/// message, non-empty contents, temperature >= 0 and max_tokens > 0.
void validate_request(const LlmRequest& request);

/// Canonical JSON of every field that determines the completion.
nlohmann::json request_identity(const LlmRequest& request);

/// Hex SHA-256 of request_identity().dump().
std::string cache_key(const LlmRequest& request);

struct LlmResponse {
  std::string text;  // verbatim completion
  bool cached = false;
  std::int64_t latency_ms = 0;
  std::string model;
};

// ---------------------------------------------------------------------------
// Model registry

/// Wire shape of the upstream endpoint. Legacy completions are folded into the
/// chat shape by the gateway.
enum class EndpointShape { chat, completion };

struct ModelInfo {
  std::string name;       // name used in configs and reports
  std::string api_model;  // name sent upstream
  EndpointShape shape = EndpointShape::chat;
};

class ModelRegistry {
public:
  /// Knowledge-enhancement and QA models with their usual serving shape.
  static ModelRegistry with_defaults();

  void add(ModelInfo info);

  /// Unknown names pass through unchanged as chat models.
  ModelInfo resolve(std::string_view name) const;

  std::vector<std::string> names() const;

private:
  std::map<std::string, ModelInfo, std::less<>> models_;
};

// ---------------------------------------------------------------------------
// Transport

struct HttpReply {
  int status = 0;  // 0: the request never got a response
  std::string body;
  std::optional<double> retry_after_s;
};

class Transport {
public:
  virtual ~Transport() = default;
  virtual HttpReply post(const std::string& path, const std::string& json_body) = 0;
};

/// OpenAI-compatible HTTP(S) endpoint, e.g. "https://api.openai.com" or
/// "http://localhost:8000/v1". A trailing "/v1" is folded into the path.
class HttpTransport : public Transport {
public:
  HttpTransport(std::string base_url, std::string api_key,
                std::chrono::seconds timeout = std::chrono::seconds(120));

  /// Reads VWSD_LLM_BASE_URL / VWSD_LLM_API_KEY; nullptr when no base URL is set.
  static std::shared_ptr<HttpTransport> from_env();

  HttpReply post(const std::string& path, const std::string& json_body) override;

private:
  std::string origin_;
  std::string path_prefix_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

/// Scriptable in-process endpoint that speaks the same JSON as the real
/// service. Replies are looked up by the last user message (chat) or the
/// prompt (legacy), then fall back to the responder. Queued failure statuses
/// are served before any success.
class StubTransport : public Transport {
public:
  using Responder = std::function<std::string(const std::string& prompt)>;

  void script(std::string prompt, std::string reply);
  void set_responder(Responder responder);
  void fail_next(int status, std::optional<double> retry_after_s = std::nullopt);

  HttpReply post(const std::string& path, const std::string& json_body) override;

  struct Call {
    std::string path;
    nlohmann::json body;
    int status = 0;
  };
  std::vector<Call> calls() const;
  std::size_t call_count() const;

private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string> scripted_;
  Responder responder_;
  std::vector<HttpReply> failures_;
  std::vector<Call> calls_;
};

// ---------------------------------------------------------------------------
// Cache

/// One JSON file per key at <root>/llm/<first two hex chars>/<key>.json
/// holding the request identity and the response text.
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path root);

  std::filesystem::path path_for(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const LlmRequest& request, const std::string& text) const;

private:
  std::filesystem::path root_;
};

// ---------------------------------------------------------------------------
// Rate limiting and retries

/// Token bucket of capacity one: dispatches are spaced at least 60/rpm
/// seconds apart. rpm <= 0 disables limiting.
class RateLimiter {
public:
  explicit RateLimiter(double requests_per_minute);
  void acquire();

private:
  std::mutex mutex_;
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
};

struct GatewayOptions {
  bool offline = false;
  double requests_per_minute = 0.0;
  RetryPolicy retry;
  std::filesystem::path cache_root;  // empty: memory-only cache
  ModelRegistry registry = ModelRegistry::with_defaults();
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for
};

/// Chat-completion client shared across workers. Completions are cached by
/// request content; concurrent identical requests share one upstream call.
class LlmGateway {
public:
  LlmGateway(GatewayOptions options, std::shared_ptr<Transport> transport);

  LlmResponse complete(const LlmRequest& request);

  /// Attempts sent to the transport so far (retries included).
  std::size_t upstream_attempts() const;

  const GatewayOptions& options() const noexcept { return options_; }

private:
  std::string fetch(const LlmRequest& request);
  std::string parse_reply(const ModelInfo& info, const HttpReply& reply) const;

  GatewayOptions options_;
  std::shared_ptr<Transport> transport_;
  std::optional<ResponseCache> cache_;
  RateLimiter limiter_;

  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> memory_;
  std::unordered_map<std::string, std::shared_future<std::string>> inflight_;
  std::size_t attempts_ = 0;
};

}  // namespace vwsd
