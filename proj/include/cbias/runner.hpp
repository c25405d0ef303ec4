#pragma once

// Batch execution of episodes with a worker pool.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cbias/agents.hpp"
#include "cbias/catalog.hpp"
#include "cbias/chat_client.hpp"
#include "cbias/transcript.hpp"
#include "json.hpp"

namespace cbias {

struct AgentSpec {
  std::string kind{"confirm"};  // confirm | falsify | eliminate | llm
  std::vector<std::string> wason_pool;
  int blicket_k_max{3};
  EndpointConfig endpoint;
};

struct RunConfig {
  std::string dataset;
  std::optional<Protocol> protocol;  // overrides the dataset's protocol
  AgentSpec agent;
  std::uint64_t seed{kDefaultSeed};
  int turn_budget{kDefaultTurnBudget};
  int retry_cap{5};
  unsigned workers{1};
  int request_capacity{4};
  std::int64_t max_episode_tokens{0};  // 0 = unlimited
  std::string output_dir{"out"};
};

nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);  // throws std::invalid_argument

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, const Catalog& catalog, const EpisodeSpec& episode,
                                  std::uint64_t seed);

struct RunOptions {
  int retry_cap{5};
  std::int64_t max_episode_tokens{0};
  nlohmann::json run_header = nlohmann::json::object();
};

// Plays one episode to the end. Transport errors end it with
// transport_failure; running over max_episode_tokens with budget_exceeded.
Transcript run_episode(const EpisodeSpec& spec, Agent& agent, const RunOptions& options = {});

struct RunSummary {
  std::size_t episodes{0};
  std::map<std::string, std::size_t> by_status;
};

// Runs every episode and writes <output_dir>/transcripts/<id>.jsonl plus
// <output_dir>/run.json. `progress` (optional) is called after each episode.
RunSummary run_dataset(const RunConfig& config, const Catalog& catalog, const std::vector<EpisodeSpec>& episodes,
                       const std::function<void(std::size_t, std::size_t)>& progress = {});

// Applies `fn` to indices [0, n) on `workers` threads; exceptions propagate
// (the first one wins).
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace cbias
