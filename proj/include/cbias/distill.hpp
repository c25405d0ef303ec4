#pragma once

// Next-turn training records built from teacher transcripts.

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbias/transcript.hpp"
#include "json.hpp"

namespace cbias {

inline constexpr std::string_view kDistillSchema = "cbias.distill/1";

class IncompleteTranscript : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DistillRecord {
  std::string episode_id;
  int turn{0};
  std::vector<ChatMessage> messages;  // student view, ending with "Turn - Test"
  std::string target;                 // teacher output, verbatim
  std::string teacher_protocol;
};

nlohmann::json to_json(const DistillRecord& r);

// One record per test turn. Throws IncompleteTranscript unless the episode
// finished all of its turns.
std::vector<DistillRecord> distill_episode(const Transcript& t);

// Student-side rendering of one accepted guess: dual-goal two-line
// announcements collapse to a single "Announce: <DAX clause>".
std::string student_guess_text(const TurnRecord& guess, Protocol teacher);

struct DistillCounts {
  std::size_t records{0};
  std::size_t episodes{0};
  std::size_t skipped_incomplete{0};
};

// Streams records as JSON lines.
class DistillWriter {
 public:
  explicit DistillWriter(std::ostream& out) : out_(out) {}
  void add(const Transcript& t);
  const DistillCounts& counts() const noexcept { return counts_; }

 private:
  std::ostream& out_;
  DistillCounts counts_;
};

}  // namespace cbias
