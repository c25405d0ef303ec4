#pragma once

// Local OpenAI-style endpoint for tests. Replies are taken from a queue of
// (status, body) pairs; the last one repeats once the queue runs dry.

#include <deque>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace mock {

inline std::string completion(const std::string& content, std::optional<int> tokens = std::nullopt,
                              const std::string& reasoning = {}) {
  nlohmann::json msg = {{"role", "assistant"}, {"content", content}};
  if (!reasoning.empty()) msg["reasoning_content"] = reasoning;
  nlohmann::json j = {{"choices", {{{"index", 0}, {"message", msg}, {"finish_reason", "stop"}}}}};
  if (tokens) j["usage"] = {{"completion_tokens", *tokens}};
  return j.dump();
}

struct Request {
  nlohmann::json body;
  std::string authorization;
};

class Server {
 public:
  Server() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      requests_.push_back({nlohmann::json::parse(req.body, nullptr, false), req.get_header_value("Authorization")});
      std::pair<int, std::string> reply{500, "{}"};
      if (!replies_.empty()) {
        reply = replies_.front();
        if (replies_.size() > 1) replies_.pop_front();
      }
      res.status = reply.first;
      res.set_content(reply.second, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Server() {
    server_.stop();
    thread_.join();
  }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void push(int status, std::string body) {
    std::lock_guard lock(mu_);
    replies_.emplace_back(status, std::move(body));
  }
  void reply(const std::string& content) { push(200, completion(content)); }

  std::vector<Request> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_{0};
  std::thread thread_;
  mutable std::mutex mu_;
  std::deque<std::pair<int, std::string>> replies_;
  std::vector<Request> requests_;
};

}  // namespace mock
