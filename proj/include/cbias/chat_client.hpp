#pragma once

// Minimal client for OpenAI-compatible /chat/completions endpoints.

#include <chrono>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbias/episode.hpp"
#include "json.hpp"

namespace cbias {

struct EndpointConfig {
  std::string base_url;  // e.g. "http://localhost:8000/v1"
  std::string model;
  std::string api_key_env{"OPENAI_API_KEY"};  // name of the variable, never the key
  std::map<std::string, std::string> headers;
  double temperature{0.6};
  double top_p{0.95};
  int top_k{20};
  double presence_penalty{0.0};
  int max_tokens{256};
  int max_attempts{4};
  int backoff_ms{500};
  int timeout_s{120};
};

nlohmann::json to_json(const EndpointConfig& c);
EndpointConfig endpoint_from_json(const nlohmann::json& j);

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChatResult {
  std::string content;
  std::string reasoning;  // provider "reasoning_content", if any
  std::int64_t completion_tokens{0};
  std::string finish_reason;
};

// Caps in-flight requests across every client in the process.
void set_request_capacity(int capacity);
int request_capacity();

class ChatClient {
 public:
  explicit ChatClient(EndpointConfig config);

  // Retries transport errors, 429 and 5xx with exponential backoff up to
  // max_attempts, then throws TransportError.
  ChatResult complete(const std::vector<ChatMessage>& messages) const;
  // Same, with an explicit temperature override (the judge uses 0).
  ChatResult complete(const std::vector<ChatMessage>& messages, double temperature) const;

  const EndpointConfig& config() const noexcept { return config_; }

 private:
  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace cbias
