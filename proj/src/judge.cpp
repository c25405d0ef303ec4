#include "cbias/judge.hpp"

#include <algorithm>
#include <cctype>

#include "cbias/assets.hpp"
#include "cbias/io.hpp"
#include "cbias/truth_table.hpp"

namespace cbias {

using nlohmann::json;

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::correct: return "correct";
    case Verdict::incorrect: return "incorrect";
    case Verdict::unjudgeable: return "unjudgeable";
  }
  return "?";
}

std::string_view label_name(Label l) {
  switch (l) {
    case Label::compatible: return "compatible";
    case Label::incompatible: return "incompatible";
    case Label::unjudgeable: return "unjudgeable";
  }
  return "?";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  for (auto v : {Verdict::correct, Verdict::incorrect, Verdict::unjudgeable}) {
    if (verdict_name(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view s) {
  for (auto l : {Label::compatible, Label::incompatible, Label::unjudgeable}) {
    if (label_name(l) == s) return l;
  }
  return std::nullopt;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string clause(std::string_view s) {
  s = trim(s);
  while (!s.empty() && (s.back() == '.' || s.back() == ';' || s.back() == ',')) s.remove_suffix(1);
  return std::string(trim(s));
}

}  // namespace

std::string extract_dax_clause(std::string_view text) {
  const std::string low = lower(text);
  static constexpr std::string_view markers[] = {"the dax rule is", "a dax triple is", "dax rule -", "dax:",
                                                 "dax is"};
  for (auto marker : markers) {
    const auto pos = low.find(marker);
    if (pos == std::string::npos) continue;
    const auto start = pos + marker.size();
    auto end = low.find_first_of(";.,", start);
    const auto med = low.find("med", start);
    if (med != std::string::npos && (end == std::string::npos || med < end)) {
      end = med;
      // Drop a dangling "Announce:" before the MED clause.
      const auto ann = low.rfind("announce", med);
      if (ann != std::string::npos && ann >= start) end = ann;
    }
    return clause(text.substr(start, end == std::string::npos ? std::string_view::npos : end - start));
  }
  if (const auto semi = text.find(';'); semi != std::string_view::npos) return clause(text.substr(0, semi));
  if (const auto comma_and = low.find(", and"); comma_and != std::string::npos) {
    return clause(text.substr(0, comma_and));
  }
  return clause(text);
}

std::string normalise_phrase(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    const bool digit_next = i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]));
    const bool prev_alnum = i > 0 && std::isalnum(static_cast<unsigned char>(text[i - 1]));
    if (std::isalnum(c)) {
      out += static_cast<char>(std::tolower(c));
    } else if (c == '-' && digit_next && !prev_alnum) {
      out += '-';
    } else if (!out.empty() && out.back() != ' ') {
      out += ' ';
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// ---------------------------------------------------------------------------
// Judged episodes on disk

json to_json(const JudgedEpisode& e) {
  json turns = json::array();
  for (const auto& t : e.turns) {
    json jt = {{"turn", t.turn}, {"verdict", verdict_name(t.verdict)}};
    if (t.label) jt["label"] = label_name(*t.label);
    if (!t.hypothesis.empty()) jt["hypothesis"] = t.hypothesis;
    turns.push_back(std::move(jt));
  }
  return {{"schema", kJudgedSchema},
          {"episode_id", e.episode_id},
          {"task", task_name(e.task)},
          {"protocol", protocol_name(e.protocol)},
          {"status", status_name(e.status)},
          {"t_star", e.t_star ? json(*e.t_star) : json(nullptr)},
          {"guess_tokens", e.guess_tokens},
          {"test_tokens", e.test_tokens},
          {"token_proxy", e.token_proxy},
          {"unjudgeable_guesses", e.unjudgeable_guesses},
          {"unjudgeable_tests", e.unjudgeable_tests},
          {"turns", turns}};
}

JudgedEpisode judged_from_json(const json& j) {
  check_schema(j, kJudgedSchema, "judged episode");
  try {
    JudgedEpisode e;
    e.episode_id = j.at("episode_id").get<std::string>();
    const auto task = j.at("task").get<std::string>();
    if (task == "wason") {
      e.task = Task::wason;
    } else if (task == "blicket") {
      e.task = Task::blicket;
    } else {
      throw SchemaMismatch("unknown task " + task);
    }
    const auto protocol = parse_protocol(j.at("protocol").get<std::string>());
    const auto status = parse_status(j.at("status").get<std::string>());
    if (!protocol || !status) throw SchemaMismatch("bad protocol or status in " + e.episode_id);
    e.protocol = *protocol;
    e.status = *status;
    if (!j.at("t_star").is_null()) e.t_star = j["t_star"].get<int>();
    e.guess_tokens = j.at("guess_tokens").get<std::vector<std::int64_t>>();
    e.test_tokens = j.at("test_tokens").get<std::vector<std::int64_t>>();
    e.token_proxy = j.value("token_proxy", true);
    e.unjudgeable_guesses = j.value("unjudgeable_guesses", 0);
    e.unjudgeable_tests = j.value("unjudgeable_tests", 0);
    for (const auto& jt : j.at("turns")) {
      JudgedTurn t;
      t.turn = jt.at("turn").get<int>();
      const auto v = parse_verdict(jt.at("verdict").get<std::string>());
      if (!v) throw SchemaMismatch("bad verdict in " + e.episode_id);
      t.verdict = *v;
      if (jt.contains("label")) {
        const auto l = parse_label(jt["label"].get<std::string>());
        if (!l) throw SchemaMismatch("bad label in " + e.episode_id);
        t.label = *l;
      }
      t.hypothesis = jt.value("hypothesis", "");
      e.turns.push_back(std::move(t));
    }
    return e;
  } catch (const json::exception& ex) {
    throw SchemaMismatch(std::string("malformed judged episode: ") + ex.what());
  }
}

void write_judged(const std::filesystem::path& path, const JudgedEpisode& e) {
  json header = to_json(e);
  const json turns = header["turns"];
  header.erase("turns");
  header["kind"] = "header";
  std::string out = header.dump() + "\n";
  for (auto t : turns) {
    t["kind"] = "turn";
    out += t.dump() + "\n";
  }
  write_text_file(path, out);
}

JudgedEpisode read_judged(const std::filesystem::path& path) {
  const auto lines = read_jsonl(path);
  if (lines.empty()) throw SchemaMismatch(path.string() + ": empty file");
  json j = lines.front();
  j.erase("kind");
  j["turns"] = json::array();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    json t = lines[i];
    t.erase("kind");
    j["turns"].push_back(std::move(t));
  }
  try {
    return judged_from_json(j);
  } catch (const SchemaMismatch& e) {
    throw SchemaMismatch(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Judge

Judge::Judge(const Catalog& catalog, JudgeAdapter* adapter) : catalog_(catalog), adapter_(adapter) {
  for (const auto& r : catalog_.rules()) aliases_.emplace_back(normalise_phrase(r.name), r.name);
  const std::string_view text = asset("judge/aliases.txt");
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto arrow = line.find("=>");
    if (arrow == std::string_view::npos) throw CatalogError("bad alias line: " + std::string(line));
    const std::string name(trim(line.substr(arrow + 2)));
    catalog_.rule(name);  // must exist
    aliases_.emplace_back(normalise_phrase(line.substr(0, arrow)), name);
  }
}

std::optional<RuleExpr> Judge::resolve_wason_local(std::string_view text) const {
  const std::string src = clause(text);
  if (src.empty()) return std::nullopt;
  try {
    return parse_rule(src);
  } catch (const RuleError&) {
  }
  const auto key = normalise_phrase(src);
  for (const auto& [phrase, name] : aliases_) {
    if (phrase == key) return catalog_.rule(name).expr;
  }
  return std::nullopt;
}

std::optional<RuleExpr> Judge::resolve_wason(std::string_view text) const {
  if (auto r = resolve_wason_local(text)) return r;
  if (adapter_) return adapter_->translate_wason(text);
  return std::nullopt;
}

std::optional<BlicketRule> Judge::resolve_blicket_local(std::string_view rule_text,
                                                        std::optional<ObjectSet> relevant) const {
  if (!relevant) return std::nullopt;
  return to_blicket_rule(BlicketHypothesis{*relevant, std::string(rule_text)});
}

std::optional<BlicketRule> Judge::resolve_blicket(std::string_view announcement_text,
                                                  std::optional<ObjectSet> relevant, int num_objects) const {
  if (auto r = resolve_blicket_local(announcement_text, relevant)) return r;
  if (!adapter_) return std::nullopt;
  std::string full(announcement_text);
  if (relevant) full = "relevant=" + format_objects(*relevant) + "; rule=" + full;
  return adapter_->translate_blicket(full, num_objects);
}

namespace {

// A hypothesis that cannot be evaluated everywhere is not a total rule, so it
// cannot equal a catalog target.
bool same_extension(const RuleExpr& x, const RuleExpr& y) {
  try {
    return *truth_table(x) == *truth_table(y);
  } catch (const EvalGuardError&) {
    return false;
  }
}

}  // namespace

Verdict Judge::judge_wason(std::string_view announcement, const RuleExpr& target, std::string_view target_name,
                           bool dual_goal) const {
  std::string text(announcement);
  if (dual_goal && lower(text).find("dax") != std::string::npos) text = extract_dax_clause(text);
  if (auto h = resolve_wason_local(text)) return same_extension(*h, target) ? Verdict::correct : Verdict::incorrect;
  if (adapter_) {
    if (auto v = adapter_->wason_correct(announcement, target_name, dual_goal)) {
      return *v ? Verdict::correct : Verdict::incorrect;
    }
  }
  return Verdict::unjudgeable;
}

Verdict Judge::judge_blicket(std::string_view rule_text, std::optional<ObjectSet> relevant,
                             const BlicketRule& target, int num_objects) const {
  if (auto h = resolve_blicket_local(rule_text, relevant)) {
    return h->relevant == target.relevant && blicket_equivalent(*h, target, num_objects) ? Verdict::correct
                                                                                         : Verdict::incorrect;
  }
  if (adapter_) {
    std::string full(rule_text);
    if (relevant) full = "relevant=" + format_objects(*relevant) + "; rule=" + full;
    if (auto v = adapter_->blicket_correct(full, target)) return *v ? Verdict::correct : Verdict::incorrect;
  }
  return Verdict::unjudgeable;
}

Label Judge::classify_probe(const std::optional<RuleExpr>& hypothesis, const Triple& probe) const {
  if (!hypothesis) return Label::unjudgeable;
  try {
    return eval_rule(*hypothesis, probe) ? Label::compatible : Label::incompatible;
  } catch (const EvalGuardError&) {
    return Label::unjudgeable;
  }
}

Label Judge::classify_placement(const std::optional<BlicketRule>& hypothesis, ObjectSet placed) const {
  if (!hypothesis) return Label::unjudgeable;
  return eval_blicket(*hypothesis, placed) ? Label::compatible : Label::incompatible;
}

JudgedEpisode Judge::judge(const Transcript& transcript) const {
  const auto& spec = transcript.spec;
  JudgedEpisode e;
  e.episode_id = spec.id;
  e.task = spec.task();
  e.protocol = spec.protocol;
  e.status = transcript.status;
  if (transcript.run.is_object() && transcript.run.contains("agent")) {
    e.token_proxy = transcript.run["agent"].value("kind", "") != "llm";
  }

  const bool dual = spec.protocol == Protocol::dual_goal;
  std::optional<RuleExpr> target;
  if (e.task == Task::wason) target = parse_rule(spec.wason().target_source);

  std::optional<RuleExpr> wason_h;
  std::optional<BlicketRule> blicket_h;
  bool announced = false;

  const auto slot = [&](int turn) -> JudgedTurn& {
    if (e.turns.empty() || e.turns.back().turn != turn) {
      e.turns.push_back(JudgedTurn{turn, Verdict::unjudgeable, std::nullopt, {}});
      e.guess_tokens.resize(static_cast<std::size_t>(turn), 0);
      e.test_tokens.resize(static_cast<std::size_t>(turn), 0);
    }
    return e.turns.back();
  };

  for (const auto& rec : transcript.turns) {
    auto& jt = slot(rec.turn);
    const auto at = static_cast<std::size_t>(rec.turn - 1);
    if (rec.kind == TurnKind::guess) {
      e.guess_tokens[at] += rec.tokens;
      announced = true;
      if (e.task == Task::wason) {
        jt.verdict = judge_wason(rec.announcement, *target, spec.wason().target_name, dual);
        std::string text = rec.announcement;
        if (dual && lower(text).find("dax") != std::string::npos) text = extract_dax_clause(text);
        wason_h = resolve_wason(text);
        jt.hypothesis = wason_h ? wason_h->canonical() : "";
      } else {
        const int n = spec.blicket().num_objects;
        jt.verdict = judge_blicket(rec.announcement, rec.relevant, spec.blicket().target, n);
        blicket_h = resolve_blicket(rec.announcement, rec.relevant, n);
        jt.hypothesis = blicket_h ? format_blicket_hypothesis(*blicket_h) : "";
      }
      if (jt.verdict == Verdict::unjudgeable) ++e.unjudgeable_guesses;
      if (jt.verdict == Verdict::correct && !e.t_star) e.t_star = rec.turn;
    } else {
      e.test_tokens[at] += rec.tokens;
      if (!announced) continue;
      if (e.task == Task::wason) {
        jt.label = rec.probe ? classify_probe(wason_h, *rec.probe) : Label::unjudgeable;
      } else {
        jt.label = rec.placement ? classify_placement(blicket_h, *rec.placement) : Label::unjudgeable;
      }
      if (*jt.label == Label::unjudgeable) ++e.unjudgeable_tests;
    }
  }
  return e;
}

}  // namespace cbias
