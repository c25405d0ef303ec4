#pragma once

// Agents that play episodes: deterministic scripted strategies and an
// LLM-backed agent.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbias/blicket.hpp"
#include "cbias/catalog.hpp"
#include "cbias/chat_client.hpp"
#include "cbias/episode.hpp"
#include "cbias/pcg.hpp"
#include "cbias/truth_table.hpp"
#include "json.hpp"

namespace cbias {

// What an agent may look at: everything except the hidden rule.
struct PublicView {
  Task task{Task::wason};
  Protocol protocol{Protocol::baseline};
  Phase phase{Phase::awaiting_guess};
  int turn{1};
  int turn_budget{kDefaultTurnBudget};
  std::optional<Triple> initial_triple;
  int num_objects{0};
  ObjectSet initial_placement{0};
  bool initial_on{false};
  const std::vector<TurnRecord>* history{nullptr};
  std::vector<ChatMessage> messages;
};

PublicView public_view(const Episode& episode);

struct AgentReply {
  std::string text;
  std::int64_t tokens{0};
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentReply act(const PublicView& view) = 0;
  virtual nlohmann::json describe() const = 0;
};

// ---------------------------------------------------------------------------
// Hypothesis pools

class PoolEmpty : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedRule {
  std::string name;
  std::string source;
  std::shared_ptr<const TruthTable> table;
};

// Candidates ordered by name; viability only ever goes from true to false.
class WasonPool {
 public:
  explicit WasonPool(std::vector<NamedRule> candidates);

  void observe(const Triple& x, bool label);
  const std::vector<NamedRule>& candidates() const noexcept { return candidates_; }
  const std::vector<bool>& viable() const noexcept { return viable_; }
  std::vector<std::size_t> viable_indices() const;

 private:
  std::vector<NamedRule> candidates_;
  std::vector<bool> viable_;
};

// Every (subset, kind) with 1 <= |subset| <= k_max over conjunctive,
// disjunctive and exclusive kinds, ordered by (size, bitmask, kind).
class BlicketPool {
 public:
  BlicketPool(int num_objects, int k_max);

  void observe(ObjectSet placed, bool on);
  const std::vector<BlicketRule>& candidates() const noexcept { return candidates_; }
  const std::vector<bool>& viable() const noexcept { return viable_; }
  std::vector<std::size_t> viable_indices() const;
  int num_objects() const noexcept { return num_objects_; }

 private:
  int num_objects_;
  std::vector<BlicketRule> candidates_;
  std::vector<bool> viable_;
};

// ---------------------------------------------------------------------------
// Scripted agents

enum class Strategy : std::uint8_t { confirm, falsify, eliminate };
std::string_view strategy_name(Strategy s);

struct ScriptedOptions {
  Strategy strategy{Strategy::confirm};
  std::vector<std::string> wason_pool;  // rule names; empty = the episode's group
  int blicket_k_max{3};
  std::uint64_t seed{kDefaultSeed};
};

// Plays either task. Built per episode because the pool depends on the
// episode's group; never reads the hidden rule.
class ScriptedAgent : public Agent {
 public:
  ScriptedAgent(const Catalog& catalog, const EpisodeSpec& spec, ScriptedOptions options);

  AgentReply act(const PublicView& view) override;
  nlohmann::json describe() const override;

  // Exposed for tests.
  std::optional<std::size_t> current_hypothesis() const;
  Triple choose_probe(std::size_t hypothesis);
  ObjectSet choose_placement(std::size_t hypothesis);

 private:
  void sync(const PublicView& view);
  std::string announce_line(const PublicView& view);
  std::string test_line(const PublicView& view);

  ScriptedOptions options_;
  Task task_;
  std::optional<WasonPool> wason_;
  std::optional<BlicketPool> blicket_;
  std::size_t observed_{0};  // history entries already fed to the pool
  std::optional<std::size_t> announced_;
  std::optional<std::size_t> last_viable_;
  Pcg32 rng_;
};

// Replays fixed lines, one per call; used for golden transcripts.
class ScriptedLinesAgent : public Agent {
 public:
  explicit ScriptedLinesAgent(std::vector<std::string> lines);
  AgentReply act(const PublicView& view) override;
  nlohmann::json describe() const override;

 private:
  std::vector<std::string> lines_;
  std::size_t next_{0};
};

class LlmAgent : public Agent {
 public:
  explicit LlmAgent(EndpointConfig config);
  AgentReply act(const PublicView& view) override;
  nlohmann::json describe() const override;

 private:
  ChatClient client_;
};

}  // namespace cbias
