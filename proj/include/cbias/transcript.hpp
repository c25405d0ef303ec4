#pragma once

// Episode transcripts on disk: header line, one line per accepted turn, and a
// terminal status line. docs/formats.md describes the fields.

#include <filesystem>
#include <string>
#include <vector>

#include "cbias/episode.hpp"
#include "json.hpp"

namespace cbias {

inline constexpr std::string_view kTranscriptSchema = "cbias.transcript/1";

struct Transcript {
  EpisodeSpec spec;        // protocol field holds the protocol actually run
  nlohmann::json run;      // agent descriptor, config hash, seeds, limits
  std::string initial_prompt;
  std::vector<TurnRecord> turns;
  EpisodeStatus status{EpisodeStatus::running};
  std::string status_detail;
  int tests{0};
};

Transcript make_transcript(const Episode& episode, nlohmann::json run);

nlohmann::json turn_to_json(const TurnRecord& t);
TurnRecord turn_from_json(const nlohmann::json& j);

std::string serialize_transcript(const Transcript& t);
Transcript parse_transcript(const std::vector<nlohmann::json>& lines);  // throws SchemaMismatch
Transcript read_transcript(const std::filesystem::path& path);
void write_transcript(const std::filesystem::path& path, const Transcript& t);

// All "*.jsonl" files in a directory, sorted by file name.
std::vector<std::filesystem::path> list_jsonl(const std::filesystem::path& dir);

// Recomputes feedback for every test turn from the hidden rule.
struct ReplayMismatch {
  int turn{0};
  Feedback recorded{Feedback::none};
  Feedback expected{Feedback::none};
};
std::vector<ReplayMismatch> verify_feedback(const Transcript& t);
Feedback expected_feedback(const EpisodeSpec& spec, const TurnRecord& test_turn);

}  // namespace cbias
