#include "cbias/distill.hpp"

#include <cctype>

namespace cbias {

using nlohmann::json;

json to_json(const DistillRecord& r) {
  json messages = json::array();
  for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return {{"schema", kDistillSchema},
          {"episode_id", r.episode_id},
          {"turn", r.turn},
          {"teacher_protocol", r.teacher_protocol},
          {"messages", messages},
          {"target", r.target}};
}

namespace {

std::string trimmed(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

// The student only ever sees YES/NO (or ON/OFF).
Feedback student_feedback(Feedback f) {
  if (f == Feedback::dax) return Feedback::yes;
  if (f == Feedback::med) return Feedback::no;
  return f;
}

}  // namespace

std::string student_guess_text(const TurnRecord& guess, Protocol teacher) {
  if (teacher == Protocol::dual_goal) return "Announce: " + guess.announcement;
  return trimmed(strip_think(guess.raw));
}

std::vector<DistillRecord> distill_episode(const Transcript& t) {
  if (t.status != EpisodeStatus::complete) {
    throw IncompleteTranscript(t.spec.id + ": status " + std::string(status_name(t.status)));
  }
  if (t.tests != t.spec.turn_budget) {
    throw IncompleteTranscript(t.spec.id + ": " + std::to_string(t.tests) + " of " +
                               std::to_string(t.spec.turn_budget) + " tests");
  }
  std::vector<ChatMessage> history{{"user", render_initial_prompt(t.spec, Protocol::baseline)}};
  std::vector<DistillRecord> out;
  for (const auto& rec : t.turns) {
    if (rec.kind == TurnKind::guess) {
      history.push_back({"assistant", student_guess_text(rec, t.spec.protocol)});
      history.push_back({"user", "Turn - Test"});
      continue;
    }
    out.push_back(DistillRecord{t.spec.id, rec.turn, history, rec.raw, std::string(protocol_name(t.spec.protocol))});
    history.push_back({"assistant", trimmed(strip_think(rec.raw))});
    history.push_back({"user", std::string(feedback_word(student_feedback(rec.feedback))) + ". Turn - Announce"});
  }
  return out;
}

void DistillWriter::add(const Transcript& t) {
  std::vector<DistillRecord> records;
  try {
    records = distill_episode(t);
  } catch (const IncompleteTranscript&) {
    ++counts_.skipped_incomplete;
    return;
  }
  for (const auto& r : records) out_ << to_json(r).dump() << '\n';
  counts_.records += records.size();
  ++counts_.episodes;
}

}  // namespace cbias
