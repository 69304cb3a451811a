#include "vwsd/llm_gateway.hpp"

#include "vwsd/error.hpp"
#include "vwsd/io.hpp"
#include "vwsd/text.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace vwsd {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  if (name == "assistant") return Role::assistant;
  throw ValidationError("unknown chat role '" + std::string(name) + "'");
}

LlmRequest make_user_request(std::string model, std::string prompt, double temperature, int max_tokens,
                             std::string seed_tag) {
  LlmRequest request;
  request.model = std::move(model);
  request.messages.push_back({Role::user, std::move(prompt)});
  request.temperature = temperature;
  request.max_tokens = max_tokens;
  request.seed_tag = std::move(seed_tag);
  return request;
}

void validate_request(const LlmRequest& request) {
  if (request.model.empty()) throw ValidationError("LLM request without a model");
  if (!(request.temperature >= 0.0)) throw ValidationError("LLM temperature must be >= 0");
  if (request.max_tokens <= 0) throw ValidationError("LLM max_tokens must be positive");
  bool has_user = false;
  for (const auto& m : request.messages) {
    if (m.content.empty()) throw ValidationError("LLM request with an empty message");
    has_user = has_user || m.role == Role::user;
  }
  if (!has_user) throw ValidationError("LLM request needs at least one user message");
}

nlohmann::json request_identity(const LlmRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {{"model", request.model},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens},
          {"seed_tag", request.seed_tag}};
}

std::string cache_key(const LlmRequest& request) {
  return sha256_hex(request_identity(request).dump());
}

// ---------------------------------------------------------------------------

ModelRegistry ModelRegistry::with_defaults() {
  ModelRegistry registry;
  registry.add({"gpt-3", "text-davinci-003", EndpointShape::completion});
  registry.add({"gpt-3.5-turbo", "gpt-3.5-turbo", EndpointShape::chat});
  registry.add({"vicuna-7b", "vicuna-7b", EndpointShape::chat});
  registry.add({"vicuna-13b", "vicuna-13b", EndpointShape::chat});
  for (const char* base : {"gpt2-xl", "bloomz-1.7b", "bloomz-3b", "opt-2.7b", "opt-6.7b", "galactica-6.7b",
                           "llama-7b"}) {
    registry.add({base, base, EndpointShape::completion});
  }
  return registry;
}

void ModelRegistry::add(ModelInfo info) {
  auto name = info.name;
  models_.insert_or_assign(std::move(name), std::move(info));
}

ModelInfo ModelRegistry::resolve(std::string_view name) const {
  if (const auto it = models_.find(name); it != models_.end()) return it->second;
  return {std::string(name), std::string(name), EndpointShape::chat};
}

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, info] : models_) out.push_back(name);
  return out;
}

// ---------------------------------------------------------------------------

HttpTransport::HttpTransport(std::string base_url, std::string api_key, std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("LLM base URL needs a scheme: " + base_url);
  const auto path_start = base_url.find('/', scheme_end + 3);
  origin_ = base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
  if (path_prefix_.ends_with("/v1")) path_prefix_.resize(path_prefix_.size() - 3);
}

std::shared_ptr<HttpTransport> HttpTransport::from_env() {
  const char* url = std::getenv("VWSD_LLM_BASE_URL");
  if (!url || !*url) return nullptr;
  const char* key = std::getenv("VWSD_LLM_API_KEY");
  return std::make_shared<HttpTransport>(url, key ? key : "");
}

HttpReply HttpTransport::post(const std::string& path, const std::string& json_body) {
  httplib::Client client(origin_);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(path_prefix_ + path, headers, json_body, "application/json");
  HttpReply reply;
  if (!res) {
    reply.body = httplib::to_string(res.error());
    return reply;
  }
  reply.status = res->status;
  reply.body = res->body;
  if (res->has_header("Retry-After")) {
    try {
      reply.retry_after_s = std::stod(res->get_header_value("Retry-After"));
    } catch (const std::exception&) {
      // HTTP-date form; fall back to the backoff schedule.
    }
  }
  return reply;
}

// ---------------------------------------------------------------------------

void StubTransport::script(std::string prompt, std::string reply) {
  std::lock_guard lock(mutex_);
  scripted_.insert_or_assign(std::move(prompt), std::move(reply));
}

void StubTransport::set_responder(Responder responder) {
  std::lock_guard lock(mutex_);
  responder_ = std::move(responder);
}

void StubTransport::fail_next(int status, std::optional<double> retry_after_s) {
  std::lock_guard lock(mutex_);
  failures_.push_back({status, R"({"error":{"message":"scripted failure"}})", retry_after_s});
}

HttpReply StubTransport::post(const std::string& path, const std::string& json_body) {
  std::unique_lock lock(mutex_);
  Call call{path, nlohmann::json::parse(json_body), 0};
  const bool chat = call.body.contains("messages");

  if (!failures_.empty()) {
    HttpReply reply = failures_.front();
    failures_.erase(failures_.begin());
    call.status = reply.status;
    calls_.push_back(std::move(call));
    return reply;
  }

  std::string prompt;
  if (chat) {
    for (const auto& m : call.body.at("messages")) {
      if (m.at("role") == "user") prompt = m.at("content").get<std::string>();
    }
  } else {
    prompt = call.body.value("prompt", "");
  }

  std::optional<std::string> text;
  if (const auto it = scripted_.find(prompt); it != scripted_.end()) {
    text = it->second;
  } else if (responder_) {
    auto responder = responder_;
    lock.unlock();
    text = responder(prompt);
    lock.lock();
  }

  HttpReply reply;
  if (!text) {
    reply.status = 400;
    reply.body = R"({"error":{"message":"stub has no reply for this prompt"}})";
  } else {
    reply.status = 200;
    nlohmann::json body;
    if (chat) {
      body["choices"] = {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", *text}}}}};
    } else {
      body["choices"] = {{{"index", 0}, {"text", *text}}};
    }
    reply.body = body.dump();
  }
  call.status = reply.status;
  calls_.push_back(std::move(call));
  return reply;
}

std::vector<StubTransport::Call> StubTransport::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::size_t StubTransport::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_.size();
}

// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return root_ / "llm" / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    return j.at("response").at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt cache entry " + path.string() + ": " + e.what());
  }
}

void ResponseCache::put(const std::string& key, const LlmRequest& request, const std::string& text) const {
  nlohmann::ordered_json j;
  j["key"] = key;
  j["request"] = request_identity(request);
  j["response"] = {{"text", text}};
  write_file_atomic(path_for(key), j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_minute) {
  if (requests_per_minute > 0.0) {
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(60.0 / requests_per_minute));
  }
}

void RateLimiter::acquire() {
  if (interval_ == std::chrono::steady_clock::duration::zero()) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

// ---------------------------------------------------------------------------

LlmGateway::LlmGateway(GatewayOptions options, std::shared_ptr<Transport> transport)
    : options_(std::move(options)), transport_(std::move(transport)), limiter_(options_.requests_per_minute) {
  if (!options_.cache_root.empty()) cache_.emplace(options_.cache_root);
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (options_.retry.max_attempts < 1) throw UsageError("retry policy needs at least one attempt");
}

std::size_t LlmGateway::upstream_attempts() const {
  std::lock_guard lock(mutex_);
  return attempts_;
}

LlmResponse LlmGateway::complete(const LlmRequest& request) {
  validate_request(request);
  const std::string key = cache_key(request);
  const auto hit = [&](std::string text) { return LlmResponse{std::move(text), true, 0, request.model}; };

  {
    std::lock_guard lock(mutex_);
    if (const auto it = memory_.find(key); it != memory_.end()) return hit(it->second);
  }
  if (cache_) {
    if (auto text = cache_->get(key)) {
      std::lock_guard lock(mutex_);
      memory_.emplace(key, *text);
      return hit(std::move(*text));
    }
  }

  std::promise<std::string> promise;
  {
    std::unique_lock lock(mutex_);
    if (const auto it = memory_.find(key); it != memory_.end()) return hit(it->second);
    if (const auto it = inflight_.find(key); it != inflight_.end()) {
      auto shared = it->second;
      lock.unlock();
      return hit(shared.get());
    }
    if (options_.offline) throw ReplayGapError(key);
    inflight_.emplace(key, promise.get_future().share());
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    std::string text = fetch(request);
    if (cache_) cache_->put(key, request, text);
    {
      std::lock_guard lock(mutex_);
      memory_.emplace(key, text);
      inflight_.erase(key);
    }
    promise.set_value(text);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    return {std::move(text), false, std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count(),
            request.model};
  } catch (...) {
    {
      std::lock_guard lock(mutex_);
      inflight_.erase(key);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::string LlmGateway::fetch(const LlmRequest& request) {
  if (!transport_) throw GatewayError("no LLM endpoint configured (set VWSD_LLM_BASE_URL or use --offline)");
  const ModelInfo info = options_.registry.resolve(request.model);

  nlohmann::json body;
  std::string path;
  body["model"] = info.api_model;
  if (info.shape == EndpointShape::chat) {
    path = "/v1/chat/completions";
    body["messages"] = nlohmann::json::array();
    for (const auto& m : request.messages) {
      body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
  } else {
    path = "/v1/completions";
    std::vector<std::string> parts;
    for (const auto& m : request.messages) parts.push_back(m.content);
    body["prompt"] = join(parts, "\n\n");
  }
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  const std::string payload = body.dump();

  auto delay = options_.retry.base_delay;
  for (int attempt = 1;; ++attempt) {
    limiter_.acquire();
    {
      std::lock_guard lock(mutex_);
      ++attempts_;
    }
    HttpReply reply;
    try {
      reply = transport_->post(path, payload);
    } catch (const std::exception& e) {
      reply.status = 0;
      reply.body = e.what();
    }

    if (reply.status >= 200 && reply.status < 300) return parse_reply(info, reply);
    if (reply.status == 401 || reply.status == 403) {
      throw AuthError("LLM endpoint rejected credentials (HTTP " + std::to_string(reply.status) + ")");
    }
    const bool retryable = reply.status == 0 || reply.status == 429 || reply.status >= 500;
    const std::string detail = reply.status == 0 ? "connection failed: " + reply.body
                                                 : "HTTP " + std::to_string(reply.status) + ": " + reply.body.substr(0, 200);
    if (!retryable) throw GatewayError("LLM request failed, " + detail);
    if (attempt >= options_.retry.max_attempts) {
      throw GatewayError("LLM request failed after " + std::to_string(attempt) + " attempts, last " + detail);
    }
    auto wait = delay;
    if (reply.retry_after_s) {
      wait = std::max(wait, std::chrono::milliseconds(static_cast<std::int64_t>(*reply.retry_after_s * 1000.0)));
    }
    options_.sleep(wait);
    delay = std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(delay.count()) * options_.retry.factor));
  }
}

std::string LlmGateway::parse_reply(const ModelInfo& info, const HttpReply& reply) const {
  try {
    const auto j = nlohmann::json::parse(reply.body);
    const auto& choice = j.at("choices").at(0);
    if (info.shape == EndpointShape::completion || !choice.contains("message")) {
      return choice.at("text").get<std::string>();
    }
    const auto& content = choice.at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError(std::string("malformed completion response: ") + e.what());
  }
}

}  // namespace vwsd
