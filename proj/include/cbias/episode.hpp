#pragma once

// Guess/Test protocol state machine for one episode.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cbias/blicket.hpp"
#include "cbias/catalog.hpp"

namespace cbias {

enum class Phase : std::uint8_t { awaiting_guess, awaiting_test, done };
enum class Feedback : std::uint8_t { none, yes, no, dax, med, on, off };
enum class TurnKind : std::uint8_t { guess, test };
enum class EpisodeStatus : std::uint8_t { running, complete, format_failure, transport_failure, budget_exceeded };

std::string_view feedback_word(Feedback f);  // "YES", ..., "" for none
std::optional<Feedback> parse_feedback_word(std::string_view w);
std::string_view status_name(EpisodeStatus s);
std::optional<EpisodeStatus> parse_status(std::string_view s);
std::string_view turn_kind_name(TurnKind k);

// Feedback value as a truth value of the hidden rule (DAX/YES/ON -> true).
std::optional<bool> feedback_truth(Feedback f);

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct TurnRecord {
  TurnKind kind{TurnKind::guess};
  int turn{1};
  std::string instruction;  // what the agent was answering (first attempt)
  std::string raw;          // accepted output, verbatim
  // Guess payload. Wason: announced rule; dual goal: the DAX clause;
  // Blicket: the text after "rule=".
  std::string announcement;
  std::string med;                    // dual goal MED clause
  std::optional<ObjectSet> relevant;  // Blicket announcements
  // Test payload.
  std::optional<Triple> probe;
  std::optional<ObjectSet> placement;
  Feedback feedback{Feedback::none};
  std::int64_t tokens{0};
  int retries{0};
  std::vector<std::string> rejected;  // malformed attempts, never shown to the agent again
};

// Removes <think>...</think> blocks; an unmatched closing tag drops
// everything before it, an unmatched opening tag everything after it.
std::string strip_think(std::string_view text);

// Whitespace-delimited word count.
std::int64_t count_words(std::string_view text);

class RetryLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EpisodeFinished : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EngineOptions {
  int retry_cap{5};
};

// The initial instruction for a spec (template filled with its evidence).
std::string render_initial_prompt(const EpisodeSpec& spec);
std::string render_initial_prompt(const EpisodeSpec& spec, Protocol protocol);

// Parsed agent outputs; nullopt when the text breaks the required format.
struct ParsedGuess {
  std::string announcement;
  std::string med;
  std::optional<ObjectSet> relevant;
};
std::optional<ParsedGuess> parse_guess(std::string_view text, Task task, Protocol protocol, int num_objects = 0);
std::optional<Triple> parse_check(std::string_view text);
std::optional<ObjectSet> parse_test_objects(std::string_view text, int num_objects);

class Episode {
 public:
  explicit Episode(EpisodeSpec spec, EngineOptions options = {});

  struct Step {
    bool accepted{false};
    Feedback feedback{Feedback::none};
    std::string next_instruction;  // empty once the episode is over
  };

  // Feeds one agent output. Throws EpisodeFinished when the episode is over
  // and RetryLimitExceeded (after marking the episode format_failure) when the
  // retry cap is hit.
  Step submit(std::string_view raw, std::int64_t tokens);

  // Ends the episode early with a failure status.
  void abort(EpisodeStatus status, std::string detail);

  const EpisodeSpec& spec() const noexcept { return spec_; }
  Phase phase() const noexcept { return phase_; }
  EpisodeStatus status() const noexcept { return status_; }
  const std::string& status_detail() const noexcept { return status_detail_; }
  int turn() const noexcept { return turn_; }  // 1-based index of the current turn
  int completed_tests() const noexcept { return completed_tests_; }
  int pending_retries() const noexcept { return pending_retries_; }
  const std::string& initial_prompt() const noexcept { return initial_prompt_; }
  // Instruction the agent must answer now (a retry notice after a malformed
  // output).
  const std::string& pending_instruction() const noexcept { return pending_instruction_; }
  const std::vector<TurnRecord>& history() const noexcept { return history_; }

  // Conversation as the agent sees it: accepted outputs with reasoning blocks
  // removed, ending with the pending instruction.
  std::vector<ChatMessage> visible_messages() const;

 private:
  std::string feedback_instruction(Feedback f) const;
  std::string retry_instruction() const;

  EpisodeSpec spec_;
  EngineOptions options_;
  RuleExpr target_;  // Wason only
  Phase phase_{Phase::awaiting_guess};
  EpisodeStatus status_{EpisodeStatus::running};
  std::string status_detail_;
  int turn_{1};
  int completed_tests_{0};
  int pending_retries_{0};
  std::vector<std::string> pending_rejected_;
  std::string initial_prompt_;
  std::string current_instruction_;
  std::string pending_instruction_;
  std::vector<TurnRecord> history_;
};

}  // namespace cbias
