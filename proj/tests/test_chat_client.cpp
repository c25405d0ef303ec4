#include <cstdlib>

#include "cbias/agents.hpp"
#include "cbias/chat_client.hpp"
#include "cbias/runner.hpp"
#include "doctest.h"
#include "support/mock_server.hpp"

using namespace cbias;

namespace {

EndpointConfig config_for(const mock::Server& s) {
  EndpointConfig c;
  c.base_url = s.base_url();
  c.model = "mock-model";
  c.api_key_env = "CBIAS_TEST_KEY";
  c.max_attempts = 3;
  c.backoff_ms = 1;
  c.timeout_s = 5;
  return c;
}

}  // namespace

TEST_CASE("successful completion and request body") {
  mock::Server server;
  server.push(200, mock::completion("Check: [1,2,3]", 17));
  ::setenv("CBIAS_TEST_KEY", "sk-test", 1);
  ChatClient client(config_for(server));
  const auto r = client.complete({{"user", "hello"}});
  CHECK(r.content == "Check: [1,2,3]");
  CHECK(r.completion_tokens == 17);
  CHECK(r.finish_reason == "stop");
  const auto reqs = server.requests();
  REQUIRE(reqs.size() == 1u);
  CHECK(reqs[0].authorization == "Bearer sk-test");
  CHECK(reqs[0].body["model"] == "mock-model");
  CHECK(reqs[0].body["messages"][0]["content"] == "hello");
  CHECK(reqs[0].body["temperature"].get<double>() == doctest::Approx(0.6));
  client.complete({{"user", "again"}}, 0.0);
  CHECK(server.requests()[1].body["temperature"].get<double>() == 0.0);
  ::unsetenv("CBIAS_TEST_KEY");
}

TEST_CASE("missing key sends no authorization header") {
  mock::Server server;
  server.reply("hi");
  ::unsetenv("CBIAS_TEST_KEY");
  ChatClient client(config_for(server));
  client.complete({{"user", "x"}});
  CHECK(server.requests()[0].authorization.empty());
}

TEST_CASE("usage fallback and reasoning field") {
  mock::Server server;
  server.push(200, mock::completion("Announce: all even", std::nullopt, "let me think"));
  ChatClient client(config_for(server));
  const auto r = client.complete({{"user", "x"}});
  CHECK(r.reasoning == "let me think");
  CHECK(r.completion_tokens == 6);
}

TEST_CASE("retryable failures") {
  mock::Server server;
  server.push(429, "{\"error\":\"slow down\"}");
  server.push(503, "{}");
  server.reply("ok");
  ChatClient client(config_for(server));
  CHECK(client.complete({{"user", "x"}}).content == "ok");
  CHECK(server.requests().size() == 3u);

  mock::Server always;
  always.push(500, "{}");
  ChatClient failing(config_for(always));
  CHECK_THROWS_AS(failing.complete({{"user", "x"}}), TransportError);
  CHECK(always.requests().size() == 3u);
}

TEST_CASE("client errors fail at once") {
  mock::Server server;
  server.push(401, "{\"error\":\"bad key\"}");
  ChatClient client(config_for(server));
  CHECK_THROWS_WITH_AS(client.complete({{"user", "x"}}), doctest::Contains("401"), TransportError);
  CHECK(server.requests().size() == 1u);
}

TEST_CASE("unreadable bodies are retried then reported") {
  mock::Server server;
  server.push(200, "not json");
  ChatClient client(config_for(server));
  CHECK_THROWS_AS(client.complete({{"user", "x"}}), TransportError);
  CHECK(server.requests().size() == 3u);
}

TEST_CASE("unreachable endpoint and bad URLs") {
  EndpointConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.max_attempts = 2;
  c.backoff_ms = 1;
  c.timeout_s = 2;
  CHECK_THROWS_AS(ChatClient(c).complete({{"user", "x"}}), TransportError);
  c.base_url = "localhost:8000";
  CHECK_THROWS_AS(ChatClient{c}, TransportError);
  c.base_url = "ftp://host/v1";
  CHECK_THROWS_AS(ChatClient{c}, TransportError);
}

TEST_CASE("endpoint config round trip") {
  EndpointConfig c;
  c.base_url = "http://h/v1";
  c.model = "m";
  c.headers = {{"X-Team", "a"}};
  c.max_tokens = 99;
  const auto back = endpoint_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(to_json(c).dump().find("sk-") == std::string::npos);
}

TEST_CASE("request capacity") {
  const int before = request_capacity();
  set_request_capacity(2);
  CHECK(request_capacity() == 2);
  set_request_capacity(before);
}

TEST_CASE("llm agent plays through the endpoint") {
  mock::Server server;
  server.push(200, mock::completion("Announce: all even", 3, "thinking"));
  server.push(200, mock::completion("Check: [2,4,8]", 4));
  EpisodeSpec s;
  s.id = "llm";
  s.turn_budget = 1;
  s.setup = WasonSetup{{2, 4, 6}, "All even", "a % 2 == 0 and b % 2 == 0 and c % 2 == 0", 1};
  LlmAgent agent(config_for(server));
  const auto t = run_episode(s, agent);
  CHECK(t.status == EpisodeStatus::complete);
  REQUIRE(t.turns.size() == 2u);
  CHECK(t.turns[0].raw == "<think>thinking</think>Announce: all even");
  CHECK(t.turns[0].tokens == 3);
  CHECK(t.turns[1].feedback == Feedback::yes);
  // The model sees its earlier output without the reasoning block.
  const auto second = server.requests()[1].body["messages"];
  REQUIRE(second.size() == 3u);
  CHECK(second[1]["content"] == "Announce: all even");
  CHECK(second[2]["content"] == "Turn - Test");
}

TEST_CASE("transport failure ends the episode") {
  mock::Server server;
  server.push(200, mock::completion("Announce: all even", 3));
  server.push(503, "{}");
  EpisodeSpec s;
  s.id = "llm-fail";
  s.turn_budget = 2;
  s.setup = WasonSetup{{2, 4, 6}, "All even", "a % 2 == 0 and b % 2 == 0 and c % 2 == 0", 1};
  LlmAgent agent(config_for(server));
  const auto t = run_episode(s, agent);
  CHECK(t.status == EpisodeStatus::transport_failure);
  CHECK(t.turns.size() == 1u);
  CHECK_FALSE(t.status_detail.empty());
}
