#include "cbias/chat_client.hpp"

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "httplib.h"

namespace cbias {

using nlohmann::json;

json to_json(const EndpointConfig& c) {
  return {{"base_url", c.base_url},
          {"model", c.model},
          {"api_key_env", c.api_key_env},
          {"headers", c.headers},
          {"temperature", c.temperature},
          {"top_p", c.top_p},
          {"top_k", c.top_k},
          {"presence_penalty", c.presence_penalty},
          {"max_tokens", c.max_tokens},
          {"max_attempts", c.max_attempts},
          {"backoff_ms", c.backoff_ms},
          {"timeout_s", c.timeout_s}};
}

EndpointConfig endpoint_from_json(const json& j) {
  EndpointConfig c;
  c.base_url = j.value("base_url", c.base_url);
  c.model = j.value("model", c.model);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  if (j.contains("headers")) c.headers = j["headers"].get<std::map<std::string, std::string>>();
  c.temperature = j.value("temperature", c.temperature);
  c.top_p = j.value("top_p", c.top_p);
  c.top_k = j.value("top_k", c.top_k);
  c.presence_penalty = j.value("presence_penalty", c.presence_penalty);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.max_attempts = j.value("max_attempts", c.max_attempts);
  c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  return c;
}

namespace {

// Counting gate whose capacity can change between runs.
struct RequestGate {
  std::mutex mu;
  std::condition_variable cv;
  int capacity{8};
  int in_flight{0};
};

RequestGate& gate() {
  static RequestGate g;
  return g;
}

class GateSlot {
 public:
  GateSlot() {
    auto& g = gate();
    std::unique_lock lock(g.mu);
    g.cv.wait(lock, [&] { return g.in_flight < g.capacity; });
    ++g.in_flight;
  }
  ~GateSlot() {
    auto& g = gate();
    {
      std::lock_guard lock(g.mu);
      --g.in_flight;
    }
    g.cv.notify_one();
  }
  GateSlot(const GateSlot&) = delete;
  GateSlot& operator=(const GateSlot&) = delete;
};

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

void set_request_capacity(int capacity) {
  auto& g = gate();
  {
    std::lock_guard lock(g.mu);
    g.capacity = std::max(1, capacity);
  }
  g.cv.notify_all();
}

int request_capacity() {
  auto& g = gate();
  std::lock_guard lock(g.mu);
  return g.capacity;
}

ChatClient::ChatClient(EndpointConfig config) : config_(std::move(config)) {
  const auto& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("endpoint URL needs a scheme: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw TransportError("unsupported scheme: " + scheme);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw TransportError("built without TLS support; use an http:// endpoint");
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/chat/completions";
}

ChatResult ChatClient::complete(const std::vector<ChatMessage>& messages) const {
  return complete(messages, config_.temperature);
}

ChatResult ChatClient::complete(const std::vector<ChatMessage>& messages, double temperature) const {
  json body = {{"model", config_.model},
               {"temperature", temperature},
               {"top_p", config_.top_p},
               {"top_k", config_.top_k},
               {"presence_penalty", config_.presence_penalty},
               {"max_tokens", config_.max_tokens},
               {"messages", json::array()}};
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const std::string payload = body.dump();

  httplib::Headers headers;
  for (const auto& [k, v] : config_.headers) headers.emplace(k, v);
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, config_.max_attempts); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(config_.backoff_ms) << (attempt - 1)));
    }
    httplib::Result res;
    {
      GateSlot slot;
      httplib::Client client(scheme_host_port_);
      client.set_connection_timeout(std::chrono::seconds(config_.timeout_s));
      client.set_read_timeout(std::chrono::seconds(config_.timeout_s));
      client.set_write_timeout(std::chrono::seconds(config_.timeout_s));
      res = client.Post(path_, headers, payload, "application/json");
    }
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      if (retryable_status(res->status)) continue;
      throw TransportError(last_error);
    }
    try {
      const auto j = json::parse(res->body);
      const auto& choice = j.at("choices").at(0);
      const auto& msg = choice.at("message");
      ChatResult out;
      if (msg.contains("content") && msg["content"].is_string()) out.content = msg["content"].get<std::string>();
      for (const char* field : {"reasoning_content", "reasoning"}) {
        if (msg.contains(field) && msg[field].is_string()) {
          out.reasoning = msg[field].get<std::string>();
          break;
        }
      }
      if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
        out.finish_reason = choice["finish_reason"].get<std::string>();
      }
      if (j.contains("usage") && j["usage"].is_object() && j["usage"].contains("completion_tokens")) {
        out.completion_tokens = j["usage"]["completion_tokens"].get<std::int64_t>();
      } else {
        out.completion_tokens = count_words(out.reasoning) + count_words(out.content);
      }
      return out;
    } catch (const json::exception& e) {
      last_error = std::string("unreadable response: ") + e.what();
    }
  }
  throw TransportError(config_.base_url + ": " + last_error + " (after " + std::to_string(config_.max_attempts) +
                       " attempts)");
}

}  // namespace cbias
