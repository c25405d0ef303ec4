#pragma once

// Announcement correctness and probe compatibility.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbias/blicket.hpp"
#include "cbias/catalog.hpp"
#include "cbias/chat_client.hpp"
#include "cbias/transcript.hpp"
#include "json.hpp"

namespace cbias {

enum class Verdict : std::uint8_t { correct, incorrect, unjudgeable };
enum class Label : std::uint8_t { compatible, incompatible, unjudgeable };

std::string_view verdict_name(Verdict v);
std::string_view label_name(Label l);
std::optional<Verdict> parse_verdict(std::string_view s);
std::optional<Label> parse_label(std::string_view s);

// Picks the DAX clause out of a free-text dual-goal announcement: an explicit
// "DAX rule -", "DAX:", "DAX is", "A DAX triple is" or "The DAX rule is"
// marker first, then the first of two clauses split by ";" or ", and", then
// the whole text.
std::string extract_dax_clause(std::string_view text);

// Lower-cases, drops punctuation other than what DSL numbers need and
// collapses spaces; used for alias lookups.
std::string normalise_phrase(std::string_view text);

// Optional model-backed fallback for free text.
class JudgeAdapter {
 public:
  virtual ~JudgeAdapter() = default;
  // Correctness of a free-text announcement against a named catalog rule.
  virtual std::optional<bool> wason_correct(std::string_view announcement, std::string_view target_name,
                                            bool dual_goal) = 0;
  virtual std::optional<bool> blicket_correct(std::string_view announcement, const BlicketRule& target) = 0;
  // Translation of a free-text hypothesis into something executable.
  virtual std::optional<RuleExpr> translate_wason(std::string_view hypothesis) = 0;
  virtual std::optional<BlicketRule> translate_blicket(std::string_view hypothesis, int num_objects) = 0;
};

class LlmJudgeAdapter : public JudgeAdapter {
 public:
  explicit LlmJudgeAdapter(EndpointConfig config, int repair_cap = 3);

  std::optional<bool> wason_correct(std::string_view announcement, std::string_view target_name,
                                    bool dual_goal) override;
  std::optional<bool> blicket_correct(std::string_view announcement, const BlicketRule& target) override;
  std::optional<RuleExpr> translate_wason(std::string_view hypothesis) override;
  std::optional<BlicketRule> translate_blicket(std::string_view hypothesis, int num_objects) override;

  int calls() const noexcept { return calls_.load(); }

 private:
  std::string ask(const std::vector<ChatMessage>& messages);
  ChatClient client_;
  int repair_cap_;
  std::atomic<int> calls_{0};
};

// "YES"/"NO" or "True"/"False" as the first word of a reply.
std::optional<bool> parse_binary_reply(std::string_view reply);
// Guidance text for a catalog rule (shipped stubs, non-authoritative).
std::string rule_guidance(std::string_view rule_name);

struct JudgedTurn {
  int turn{0};
  Verdict verdict{Verdict::unjudgeable};  // of this turn's announcement
  std::optional<Label> label;             // of this turn's probe, if it has one
  std::string hypothesis;                 // executable form used, if any
};

struct JudgedEpisode {
  std::string episode_id;
  Task task{Task::wason};
  Protocol protocol{Protocol::baseline};
  EpisodeStatus status{EpisodeStatus::complete};
  std::vector<JudgedTurn> turns;
  std::optional<int> t_star;
  // Token counts of accepted outputs, by turn.
  std::vector<std::int64_t> guess_tokens;
  std::vector<std::int64_t> test_tokens;
  bool token_proxy{true};  // word counts rather than provider counts
  int unjudgeable_guesses{0};
  int unjudgeable_tests{0};
};

inline constexpr std::string_view kJudgedSchema = "cbias.judged/1";

nlohmann::json to_json(const JudgedEpisode& e);
JudgedEpisode judged_from_json(const nlohmann::json& j);  // throws SchemaMismatch

// Header line with the episode fields, then one line per turn.
void write_judged(const std::filesystem::path& path, const JudgedEpisode& e);
JudgedEpisode read_judged(const std::filesystem::path& path);

class Judge {
 public:
  explicit Judge(const Catalog& catalog, JudgeAdapter* adapter = nullptr);

  // Wason: DSL first, then catalog names and aliases, then the adapter.
  std::optional<RuleExpr> resolve_wason(std::string_view text) const;
  std::optional<BlicketRule> resolve_blicket(std::string_view announcement_text, std::optional<ObjectSet> relevant,
                                             int num_objects) const;

  Verdict judge_wason(std::string_view announcement, const RuleExpr& target, std::string_view target_name,
                      bool dual_goal) const;
  Verdict judge_blicket(std::string_view rule_text, std::optional<ObjectSet> relevant, const BlicketRule& target,
                        int num_objects) const;

  Label classify_probe(const std::optional<RuleExpr>& hypothesis, const Triple& probe) const;
  Label classify_placement(const std::optional<BlicketRule>& hypothesis, ObjectSet placed) const;

  JudgedEpisode judge(const Transcript& transcript) const;

 private:
  std::optional<RuleExpr> resolve_wason_local(std::string_view text) const;
  std::optional<BlicketRule> resolve_blicket_local(std::string_view rule_text, std::optional<ObjectSet> relevant) const;

  const Catalog& catalog_;
  JudgeAdapter* adapter_;
  std::vector<std::pair<std::string, std::string>> aliases_;  // normalised phrase -> rule name
};

}  // namespace cbias
