#include <filesystem>

#include "cbias/io.hpp"
#include "cbias/transcript.hpp"
#include "doctest.h"

using namespace cbias;

namespace {

Transcript sample() {
  EpisodeSpec s;
  s.id = "wason-test-g7-t01-r1";
  s.turn_budget = 2;
  s.setup = WasonSetup{{-1, -81, -91}, "All end with 1", "a % 10 == 1 and b % 10 == 1 and c % 10 == 1", 7};
  Episode ep(s);
  ep.submit("<think>odd?</think>Announce: all odd", 4);
  ep.submit("bad", 1);
  ep.submit("Check: [1,3,5]", 3);
  ep.submit("Announce: all end with 1", 5);
  ep.submit("Check: [11,21,-9]", 3);
  return make_transcript(ep, {{"agent", "test"}});
}

}  // namespace

TEST_CASE("transcript round trip") {
  const auto t = sample();
  CHECK(t.status == EpisodeStatus::complete);
  CHECK(t.tests == 2);
  const auto text = serialize_transcript(t);
  std::vector<nlohmann::json> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    lines.push_back(nlohmann::json::parse(text.substr(start, end - start)));
    start = end + 1;
  }
  REQUIRE(lines.size() == 6u);
  CHECK(lines.front()["schema"] == kTranscriptSchema);
  CHECK(lines.back()["kind"] == "status");

  const auto back = parse_transcript(lines);
  CHECK(serialize_transcript(back) == text);
  CHECK(back.turns[1].rejected == std::vector<std::string>{"bad"});
  CHECK(back.turns[1].probe == Triple{1, 3, 5});
  CHECK(back.turns[1].feedback == Feedback::no);
  CHECK(back.turns[3].feedback == Feedback::yes);
  CHECK(back.initial_prompt == t.initial_prompt);
  CHECK(to_json(back.spec) == to_json(t.spec));

  lines.front()["schema"] = "cbias.transcript/0";
  CHECK_THROWS_AS(parse_transcript(lines), SchemaMismatch);
}

TEST_CASE("blicket turns survive serialization") {
  TurnRecord r;
  r.kind = TurnKind::test;
  r.turn = 4;
  r.placement = 0b0101;
  r.feedback = Feedback::on;
  r.raw = "Test: [object 0, object 2]";
  const auto back = turn_from_json(turn_to_json(r));
  CHECK(back.placement == ObjectSet{0b0101});
  CHECK(back.feedback == Feedback::on);
  CHECK(turn_to_json(back) == turn_to_json(r));
}

TEST_CASE("replay detects tampered feedback") {
  auto t = sample();
  CHECK(verify_feedback(t).empty());
  t.turns[1].feedback = Feedback::yes;
  const auto bad = verify_feedback(t);
  REQUIRE(bad.size() == 1u);
  CHECK(bad[0].turn == 1);
  CHECK(bad[0].recorded == Feedback::yes);
  CHECK(bad[0].expected == Feedback::no);
}

TEST_CASE("files and directory listing") {
  const auto dir = std::filesystem::temp_directory_path() / "cbias_transcript_test";
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(list_jsonl(dir), MissingInput);
  std::filesystem::create_directories(dir);
  const auto t = sample();
  write_transcript(dir / "b.jsonl", t);
  write_transcript(dir / "a.jsonl", t);
  write_text_file(dir / "notes.txt", "x");
  const auto files = list_jsonl(dir);
  REQUIRE(files.size() == 2u);
  CHECK(files[0].filename() == "a.jsonl");
  CHECK(serialize_transcript(read_transcript(files[1])) == serialize_transcript(t));
  CHECK_THROWS_AS(read_transcript(dir / "missing.jsonl"), MissingInput);
  std::filesystem::remove_all(dir);
}
