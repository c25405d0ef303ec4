#include "cbias/episode.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "cbias/assets.hpp"

namespace cbias {

std::string_view feedback_word(Feedback f) {
  switch (f) {
    case Feedback::none: return "";
    case Feedback::yes: return "YES";
    case Feedback::no: return "NO";
    case Feedback::dax: return "DAX";
    case Feedback::med: return "MED";
    case Feedback::on: return "ON";
    case Feedback::off: return "OFF";
  }
  return "";
}

std::optional<Feedback> parse_feedback_word(std::string_view w) {
  for (auto f : {Feedback::none, Feedback::yes, Feedback::no, Feedback::dax, Feedback::med, Feedback::on,
                 Feedback::off}) {
    if (feedback_word(f) == w) return f;
  }
  return std::nullopt;
}

std::optional<bool> feedback_truth(Feedback f) {
  switch (f) {
    case Feedback::yes:
    case Feedback::dax:
    case Feedback::on: return true;
    case Feedback::no:
    case Feedback::med:
    case Feedback::off: return false;
    case Feedback::none: return std::nullopt;
  }
  return std::nullopt;
}

std::string_view status_name(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::running: return "running";
    case EpisodeStatus::complete: return "complete";
    case EpisodeStatus::format_failure: return "format_failure";
    case EpisodeStatus::transport_failure: return "transport_failure";
    case EpisodeStatus::budget_exceeded: return "budget_exceeded";
  }
  return "?";
}

std::optional<EpisodeStatus> parse_status(std::string_view s) {
  for (auto st : {EpisodeStatus::running, EpisodeStatus::complete, EpisodeStatus::format_failure,
                  EpisodeStatus::transport_failure, EpisodeStatus::budget_exceeded}) {
    if (status_name(st) == s) return st;
  }
  return std::nullopt;
}

std::string_view turn_kind_name(TurnKind k) { return k == TurnKind::guess ? "guess" : "test"; }

std::string strip_think(std::string_view text) {
  constexpr std::string_view open_tag = "<think>";
  constexpr std::string_view close_tag = "</think>";
  const auto first_open = text.find(open_tag);
  const auto first_close = text.find(close_tag);
  if (first_close != std::string_view::npos && (first_open == std::string_view::npos || first_close < first_open)) {
    text.remove_prefix(first_close + close_tag.size());
  }
  std::string out;
  for (;;) {
    const auto open = text.find(open_tag);
    if (open == std::string_view::npos) {
      out += text;
      break;
    }
    out += text.substr(0, open);
    const auto close = text.find(close_tag, open);
    if (close == std::string_view::npos) break;
    text.remove_prefix(close + close_tag.size());
  }
  return out;
}

std::int64_t count_words(std::string_view text) {
  std::int64_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

constexpr std::string_view kAnnounceTurn = "Turn - Announce";
constexpr std::string_view kTestTurn = "Turn - Test";

std::string object_states(int num_objects, ObjectSet placed) {
  std::string out;
  for (int i = 0; i < num_objects; ++i) {
    if (i > 0) out += (i % 2 == 0) ? ",\n" : ", ";
    out += "object " + std::to_string(i) + " is on the " +
           ((placed & (ObjectSet{1} << i)) ? "device" : "floor");
  }
  return out + ".";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> nonempty_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto line = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (!line.empty()) lines.emplace_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return lines;
}

std::string flatten(std::string_view text) {
  std::string out;
  for (unsigned char c : trim(text)) {
    if (std::isspace(c)) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

}  // namespace

std::string render_initial_prompt(const EpisodeSpec& spec) { return render_initial_prompt(spec, spec.protocol); }

std::string render_initial_prompt(const EpisodeSpec& spec, Protocol protocol) {
  if (spec.task() == Task::wason) {
    const auto name = "prompts/wason_" + std::string(protocol_name(protocol)) + ".txt";
    return fill_template(asset(name), {{"initial_triple", to_string(spec.wason().initial)}});
  }
  if (protocol == Protocol::dual_goal) throw std::invalid_argument("the blicket task has no dual-goal prompt");
  const auto& b = spec.blicket();
  const auto name = "prompts/blicket_" + std::string(protocol_name(protocol)) + ".txt";
  return fill_template(asset(name), {{"num_objects", std::to_string(b.num_objects)},
                                     {"object_states", object_states(b.num_objects, b.initial_placement)},
                                     {"device_state", b.initial_on ? "on" : "off"}});
}

// ---------------------------------------------------------------------------
// Output grammars

std::optional<ParsedGuess> parse_guess(std::string_view text, Task task, Protocol protocol, int num_objects) {
  const std::string clean = strip_think(text);
  if (task == Task::blicket) {
    static const std::regex form(R"(^Announce:\s*(relevant\s*=.*)$)");
    const std::string flat = flatten(clean);
    std::smatch m;
    if (!std::regex_match(flat, m, form)) return std::nullopt;
    const auto h = parse_blicket_hypothesis(m[1].str(), num_objects);
    if (!h) return std::nullopt;
    return ParsedGuess{h->rule_text, {}, h->relevant};
  }
  const auto lines = nonempty_lines(clean);
  if (protocol == Protocol::dual_goal) {
    static const std::regex dax(R"(^Announce:\s*DAX rule\s*-\s*(\S.*)$)");
    static const std::regex med(R"(^Announce:\s*MED rule\s*-\s*(\S.*)$)");
    std::smatch d;
    std::smatch m;
    if (lines.size() != 2 || !std::regex_match(lines[0], d, dax) || !std::regex_match(lines[1], m, med)) {
      return std::nullopt;
    }
    return ParsedGuess{std::string(trim(d[1].str())), std::string(trim(m[1].str())), std::nullopt};
  }
  static const std::regex single(R"(^Announce:\s*(\S.*)$)");
  std::smatch m;
  if (lines.size() != 1 || !std::regex_match(lines[0], m, single)) return std::nullopt;
  return ParsedGuess{std::string(trim(m[1].str())), {}, std::nullopt};
}

std::optional<Triple> parse_check(std::string_view text) {
  static const std::regex form(R"(^Check:\s*\[\s*(-?\d{1,4})\s*,\s*(-?\d{1,4})\s*,\s*(-?\d{1,4})\s*\]$)");
  const auto lines = nonempty_lines(strip_think(text));
  std::smatch m;
  if (lines.size() != 1 || !std::regex_match(lines[0], m, form)) return std::nullopt;
  const Triple t{std::stoi(m[1].str()), std::stoi(m[2].str()), std::stoi(m[3].str())};
  if (!t.in_domain()) return std::nullopt;
  return t;
}

std::optional<ObjectSet> parse_test_objects(std::string_view text, int num_objects) {
  static const std::regex form(R"(^Test:\s*\[([^\]]*)\]$)");
  const std::string flat = flatten(strip_think(text));
  std::smatch m;
  if (!std::regex_match(flat, m, form)) return std::nullopt;
  try {
    return parse_object_list(m[1].str(), num_objects);
  } catch (const ObjectListError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Episode

Episode::Episode(EpisodeSpec spec, EngineOptions options) : spec_(std::move(spec)), options_(options) {
  if (spec_.turn_budget < 1) throw std::invalid_argument("turn budget must be positive");
  if (spec_.task() == Task::wason) target_ = parse_rule(spec_.wason().target_source);
  initial_prompt_ = render_initial_prompt(spec_);
  current_instruction_ = initial_prompt_;
  pending_instruction_ = initial_prompt_;
}

std::string Episode::feedback_instruction(Feedback f) const {
  return std::string(feedback_word(f)) + ". " + std::string(kAnnounceTurn);
}

std::string Episode::retry_instruction() const {
  std::string fmt;
  if (phase_ == Phase::awaiting_guess) {
    if (spec_.task() == Task::blicket) {
      fmt = "output exactly one line:\n  Announce: relevant=[object A, object B, object C]; rule=<one short description "
            "of the rule>";
    } else if (spec_.protocol == Protocol::dual_goal) {
      fmt = "output exactly two lines:\n  Announce: DAX rule - <one short sentence>\n  Announce: MED rule - <one "
            "short sentence>";
    } else {
      fmt = "output exactly one line:\n  Announce: <one short sentence naming the rule>";
    }
  } else if (spec_.task() == Task::blicket) {
    fmt = "output exactly one line:\n  Test: [object A, object B, object C]\n  (object ids 0 to " +
          std::to_string(spec_.blicket().num_objects - 1) + ")";
  } else {
    fmt = "output exactly one line:\n  Check: [a,b,c]\n  (integers from " + std::to_string(kDomainMin) + " to " +
          std::to_string(kDomainMax) + ")";
  }
  const auto turn = phase_ == Phase::awaiting_guess ? kAnnounceTurn : kTestTurn;
  return "Your last reply did not follow the required format. For " + std::string(turn) + ", " + fmt + "\n" +
         std::string(turn);
}

Episode::Step Episode::submit(std::string_view raw, std::int64_t tokens) {
  if (phase_ == Phase::done) throw EpisodeFinished("episode " + spec_.id + " is over");

  const bool blicket = spec_.task() == Task::blicket;
  const int objects = blicket ? spec_.blicket().num_objects : 0;
  TurnRecord rec;
  rec.turn = turn_;
  rec.instruction = current_instruction_;
  rec.raw = std::string(raw);
  rec.tokens = tokens;

  bool ok = false;
  if (phase_ == Phase::awaiting_guess) {
    rec.kind = TurnKind::guess;
    if (auto g = parse_guess(raw, spec_.task(), spec_.protocol, objects)) {
      rec.announcement = std::move(g->announcement);
      rec.med = std::move(g->med);
      rec.relevant = g->relevant;
      ok = true;
    }
  } else {
    rec.kind = TurnKind::test;
    if (blicket) {
      if (auto p = parse_test_objects(raw, objects)) {
        rec.placement = *p;
        const bool on = eval_blicket(spec_.blicket().target, *p);
        rec.feedback = on ? Feedback::on : Feedback::off;
        ok = true;
      }
    } else if (auto t = parse_check(raw)) {
      rec.probe = *t;
      const bool yes = eval_rule(target_, *t);
      if (spec_.protocol == Protocol::dual_goal) {
        rec.feedback = yes ? Feedback::dax : Feedback::med;
      } else {
        rec.feedback = yes ? Feedback::yes : Feedback::no;
      }
      ok = true;
    }
  }

  if (!ok) {
    ++pending_retries_;
    pending_rejected_.emplace_back(raw);
    if (pending_retries_ >= options_.retry_cap) {
      abort(EpisodeStatus::format_failure, "turn " + std::to_string(turn_) + ": " +
                                               std::to_string(pending_retries_) + " malformed outputs");
      throw RetryLimitExceeded("episode " + spec_.id + ": retry cap reached on turn " + std::to_string(turn_));
    }
    pending_instruction_ = retry_instruction();
    return Step{false, Feedback::none, pending_instruction_};
  }

  rec.retries = pending_retries_;
  rec.rejected = std::move(pending_rejected_);
  pending_rejected_.clear();
  pending_retries_ = 0;
  const Feedback fb = rec.feedback;
  history_.push_back(std::move(rec));

  if (phase_ == Phase::awaiting_guess) {
    phase_ = Phase::awaiting_test;
    current_instruction_ = std::string(kTestTurn);
  } else {
    ++completed_tests_;
    if (completed_tests_ >= spec_.turn_budget) {
      phase_ = Phase::done;
      status_ = EpisodeStatus::complete;
      current_instruction_ = std::string(feedback_word(fb)) + ".";
      pending_instruction_.clear();
      return Step{true, fb, current_instruction_};
    }
    ++turn_;
    phase_ = Phase::awaiting_guess;
    current_instruction_ = feedback_instruction(fb);
  }
  pending_instruction_ = current_instruction_;
  return Step{true, fb, pending_instruction_};
}

void Episode::abort(EpisodeStatus status, std::string detail) {
  phase_ = Phase::done;
  status_ = status;
  status_detail_ = std::move(detail);
  pending_instruction_.clear();
}

std::vector<ChatMessage> Episode::visible_messages() const {
  std::vector<ChatMessage> msgs;
  msgs.push_back({"user", initial_prompt_});
  for (std::size_t i = 0; i < history_.size(); ++i) {
    const auto& rec = history_[i];
    msgs.push_back({"assistant", std::string(trim(strip_think(rec.raw)))});
    std::string next;
    if (rec.kind == TurnKind::guess) {
      next = std::string(kTestTurn);
    } else if (i + 1 == history_.size() && phase_ == Phase::done && status_ == EpisodeStatus::complete) {
      next = std::string(feedback_word(rec.feedback)) + ".";
    } else {
      next = feedback_instruction(rec.feedback);
    }
    msgs.push_back({"user", next});
  }
  if (phase_ != Phase::done && pending_retries_ > 0) msgs.back().content = pending_instruction_;
  return msgs;
}

}  // namespace cbias
