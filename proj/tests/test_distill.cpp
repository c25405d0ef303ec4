#include <sstream>

#include "cbias/distill.hpp"
#include "cbias/runner.hpp"
#include "doctest.h"

using namespace cbias;

namespace {

EpisodeSpec spec(Protocol protocol, int budget = 2) {
  EpisodeSpec s;
  s.id = "distill-e";
  s.protocol = protocol;
  s.turn_budget = budget;
  s.setup = WasonSetup{{2, 4, 6}, "All even", "a % 2 == 0 and b % 2 == 0 and c % 2 == 0", 1};
  return s;
}

Transcript play(const EpisodeSpec& s, std::vector<std::string> lines) {
  ScriptedLinesAgent agent(std::move(lines));
  return run_episode(s, agent);
}

}  // namespace

TEST_CASE("one record per test turn with the student's view") {
  const auto t = play(spec(Protocol::baseline),
                      {"<think>hm</think>Announce: all even", "Check: [2,2,2]", "Announce: all even ",
                       "<think>try odd</think>Check: [1,2,2]"});
  const auto recs = distill_episode(t);
  REQUIRE(recs.size() == 2u);
  CHECK(recs[0].turn == 1);
  CHECK(recs[0].target == "Check: [2,2,2]");
  REQUIRE(recs[0].messages.size() == 3u);
  CHECK(recs[0].messages[0].content == render_initial_prompt(t.spec, Protocol::baseline));
  CHECK(recs[0].messages[1].content == "Announce: all even");
  CHECK(recs[0].messages[2].content == "Turn - Test");

  CHECK(recs[1].target == "<think>try odd</think>Check: [1,2,2]");
  REQUIRE(recs[1].messages.size() == 7u);
  CHECK(recs[1].messages[3].content == "Check: [2,2,2]");
  CHECK(recs[1].messages[4].content == "YES. Turn - Announce");
  CHECK(recs[1].messages[5].content == "Announce: all even");
  CHECK(recs[1].messages.back().content == "Turn - Test");

  const auto j = to_json(recs[1]);
  CHECK(j["schema"] == kDistillSchema);
  CHECK(j["teacher_protocol"] == "baseline");
  CHECK(j["messages"].size() == 7u);
}

TEST_CASE("dual goal teachers are mapped onto the baseline view") {
  const auto t = play(spec(Protocol::dual_goal),
                      {"Announce: DAX rule - all even\nAnnounce: MED rule - not all even", "Check: [2,2,3]",
                       "Announce: DAX rule - all even\nAnnounce: MED rule - not all even", "Check: [2,2,2]"});
  const auto recs = distill_episode(t);
  REQUIRE(recs.size() == 2u);
  CHECK(recs[0].messages[0].content == render_initial_prompt(t.spec, Protocol::baseline));
  CHECK(recs[0].messages[1].content == "Announce: all even");
  CHECK(recs[1].messages[4].content == "NO. Turn - Announce");
  CHECK(recs[1].teacher_protocol == "dual_goal");
  for (const auto& m : recs[1].messages) {
    CHECK(m.content.find("DAX") == std::string::npos);
    CHECK(m.content.find("MED") == std::string::npos);
  }
}

TEST_CASE("think in opposites teachers keep their raw outputs") {
  const auto t = play(spec(Protocol::think_in_opposites, 1), {"Announce: all even", "Check: [3,3,3]"});
  const auto recs = distill_episode(t);
  REQUIRE(recs.size() == 1u);
  CHECK(recs[0].messages[0].content == render_initial_prompt(t.spec, Protocol::baseline));
  CHECK(recs[0].messages[0].content != t.initial_prompt);
}

TEST_CASE("incomplete transcripts are skipped") {
  auto t = play(spec(Protocol::baseline), {"Announce: x", "bad", "bad", "bad", "bad", "bad"});
  CHECK(t.status == EpisodeStatus::format_failure);
  CHECK_THROWS_AS(distill_episode(t), IncompleteTranscript);

  auto short_run = play(spec(Protocol::baseline, 1), {"Announce: x", "Check: [1,1,1]"});
  short_run.spec.turn_budget = 2;
  CHECK_THROWS_AS(distill_episode(short_run), IncompleteTranscript);

  std::ostringstream out;
  DistillWriter w(out);
  w.add(t);
  w.add(play(spec(Protocol::baseline, 3), {"Announce: x", "Check: [1,1,1]", "Announce: x", "Check: [1,1,2]",
                                           "Announce: x", "Check: [2,2,2]"}));
  CHECK(w.counts().records == 3u);
  CHECK(w.counts().episodes == 1u);
  CHECK(w.counts().skipped_incomplete == 1u);
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    CHECK(nlohmann::json::parse(line)["target"].is_string());
    ++n;
  }
  CHECK(n == 3);
}
