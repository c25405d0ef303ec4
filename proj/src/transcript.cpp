#include "cbias/transcript.hpp"

#include <algorithm>

#include "cbias/io.hpp"

namespace cbias {

using nlohmann::json;

namespace {

json ids(ObjectSet s) { return object_ids(s); }

ObjectSet from_ids(const json& j) {
  ObjectSet s = 0;
  for (const auto& v : j) {
    const int id = v.get<int>();
    if (id < 0 || id >= kMaxObjects) throw SchemaMismatch("object id out of range: " + std::to_string(id));
    s |= ObjectSet{1} << id;
  }
  return s;
}

}  // namespace

json turn_to_json(const TurnRecord& t) {
  json j = {{"type", turn_kind_name(t.kind)}, {"turn", t.turn},       {"instruction", t.instruction},
            {"raw", t.raw},                   {"tokens", t.tokens},   {"retries", t.retries}};
  if (t.kind == TurnKind::guess) {
    j["announcement"] = t.announcement;
    if (!t.med.empty()) j["med"] = t.med;
    if (t.relevant) j["relevant"] = ids(*t.relevant);
  } else {
    if (t.probe) j["probe"] = {t.probe->a, t.probe->b, t.probe->c};
    if (t.placement) j["placement"] = ids(*t.placement);
    j["feedback"] = feedback_word(t.feedback);
  }
  if (!t.rejected.empty()) j["rejected"] = t.rejected;
  return j;
}

TurnRecord turn_from_json(const json& j) {
  try {
    TurnRecord t;
    const auto type = j.at("type").get<std::string>();
    if (type == "guess") {
      t.kind = TurnKind::guess;
    } else if (type == "test") {
      t.kind = TurnKind::test;
    } else {
      throw SchemaMismatch("unknown turn type " + type);
    }
    t.turn = j.at("turn").get<int>();
    t.instruction = j.value("instruction", "");
    t.raw = j.at("raw").get<std::string>();
    t.tokens = j.value("tokens", std::int64_t{0});
    t.retries = j.value("retries", 0);
    t.announcement = j.value("announcement", "");
    t.med = j.value("med", "");
    if (j.contains("relevant")) t.relevant = from_ids(j["relevant"]);
    if (j.contains("probe")) {
      const auto& p = j["probe"];
      t.probe = Triple{p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<int>()};
    }
    if (j.contains("placement")) t.placement = from_ids(j["placement"]);
    if (j.contains("feedback")) {
      const auto fb = parse_feedback_word(j["feedback"].get<std::string>());
      if (!fb) throw SchemaMismatch("unknown feedback " + j["feedback"].get<std::string>());
      t.feedback = *fb;
    }
    if (j.contains("rejected")) t.rejected = j["rejected"].get<std::vector<std::string>>();
    return t;
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("malformed turn: ") + e.what());
  }
}

Transcript make_transcript(const Episode& episode, json run) {
  Transcript t;
  t.spec = episode.spec();
  t.run = std::move(run);
  t.initial_prompt = episode.initial_prompt();
  t.turns = episode.history();
  t.status = episode.status();
  t.status_detail = episode.status_detail();
  t.tests = episode.completed_tests();
  return t;
}

std::string serialize_transcript(const Transcript& t) {
  std::string out;
  const json header = {{"schema", kTranscriptSchema},
                       {"kind", "header"},
                       {"episode", to_json(t.spec)},
                       {"run", t.run},
                       {"initial_prompt", t.initial_prompt}};
  out += header.dump() + "\n";
  for (const auto& turn : t.turns) {
    json line = turn_to_json(turn);
    line["kind"] = "turn";
    out += line.dump() + "\n";
  }
  if (t.status != EpisodeStatus::running) {
    const json status = {
        {"kind", "status"}, {"status", status_name(t.status)}, {"detail", t.status_detail}, {"tests", t.tests}};
    out += status.dump() + "\n";
  }
  return out;
}

Transcript parse_transcript(const std::vector<json>& lines) {
  if (lines.empty()) throw SchemaMismatch("empty transcript");
  check_schema(lines.front(), kTranscriptSchema, "transcript");
  Transcript t;
  try {
    const auto& h = lines.front();
    t.spec = episode_from_json(h.at("episode"));
    t.run = h.value("run", json::object());
    t.initial_prompt = h.value("initial_prompt", "");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto& line = lines[i];
      const auto kind = line.value("kind", "");
      if (kind == "turn") {
        t.turns.push_back(turn_from_json(line));
      } else if (kind == "status") {
        const auto st = parse_status(line.at("status").get<std::string>());
        if (!st) throw SchemaMismatch("unknown status " + line["status"].get<std::string>());
        t.status = *st;
        t.status_detail = line.value("detail", "");
        t.tests = line.value("tests", 0);
      } else {
        throw SchemaMismatch("unknown line kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("malformed transcript: ") + e.what());
  } catch (const CatalogError& e) {
    throw SchemaMismatch(std::string("malformed episode header: ") + e.what());
  }
  if (t.status == EpisodeStatus::running) {
    t.tests = static_cast<int>(std::count_if(t.turns.begin(), t.turns.end(),
                                             [](const TurnRecord& r) { return r.kind == TurnKind::test; }));
  }
  return t;
}

Transcript read_transcript(const std::filesystem::path& path) {
  try {
    return parse_transcript(read_jsonl(path));
  } catch (const SchemaMismatch& e) {
    throw SchemaMismatch(path.string() + ": " + e.what());
  }
}

void write_transcript(const std::filesystem::path& path, const Transcript& t) {
  write_text_file(path, serialize_transcript(t));
}

std::vector<std::filesystem::path> list_jsonl(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw MissingInput("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Feedback expected_feedback(const EpisodeSpec& spec, const TurnRecord& test_turn) {
  if (spec.task() == Task::blicket) {
    if (!test_turn.placement) throw SchemaMismatch("test turn without placement");
    return eval_blicket(spec.blicket().target, *test_turn.placement) ? Feedback::on : Feedback::off;
  }
  if (!test_turn.probe) throw SchemaMismatch("test turn without probe");
  const bool yes = eval_rule(parse_rule(spec.wason().target_source), *test_turn.probe);
  if (spec.protocol == Protocol::dual_goal) return yes ? Feedback::dax : Feedback::med;
  return yes ? Feedback::yes : Feedback::no;
}

std::vector<ReplayMismatch> verify_feedback(const Transcript& t) {
  std::vector<ReplayMismatch> out;
  for (const auto& turn : t.turns) {
    if (turn.kind != TurnKind::test) continue;
    const auto want = expected_feedback(t.spec, turn);
    if (want != turn.feedback) out.push_back({turn.turn, turn.feedback, want});
  }
  return out;
}

}  // namespace cbias
