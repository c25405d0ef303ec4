#include <map>

#include "cbias/agents.hpp"
#include "cbias/runner.hpp"
#include "doctest.h"
#include "support/catalog_oracle.hpp"

using namespace cbias;

namespace {

EpisodeSpec wason_episode(const std::string& target, Triple initial = {2, 4, 6}, int group = 1) {
  const auto& rule = Catalog::builtin().rule(target);
  EpisodeSpec s;
  s.id = "wason-unit-" + target;
  s.turn_budget = 8;
  s.setup = WasonSetup{initial, rule.name, rule.expr.source(), group};
  return s;
}

ScriptedAgent agent(const EpisodeSpec& s, Strategy strategy, std::vector<std::string> pool = {}) {
  ScriptedOptions o;
  o.strategy = strategy;
  o.wason_pool = std::move(pool);
  return ScriptedAgent(Catalog::builtin(), s, o);
}

// Lexicographically first triple satisfying `pred`, by direct scan.
template <typename Pred>
Triple first_triple(Pred pred) {
  for (std::size_t i = 0; i < kDomainSize; ++i) {
    const auto t = Triple::from_index(i);
    if (pred(t.a, t.b, t.c)) return t;
  }
  FAIL("no triple found");
  return {};
}

}  // namespace

TEST_CASE("confirming probes are the first positive instance of the hypothesis") {
  const auto s = wason_episode("All even");
  auto even = agent(s, Strategy::confirm, {"All even"});
  CHECK(even.choose_probe(0) == Triple{-98, -98, -98});
  auto asc = agent(s, Strategy::confirm, {"Ascending"});
  CHECK(asc.choose_probe(0) == Triple{-99, -98, -97});
}

TEST_CASE("falsifying probes separate the hypothesis from the alternatives") {
  const auto s = wason_episode("All even");
  auto a = agent(s, Strategy::falsify, {"At least one even", "All even"});
  // Candidates are ordered by name, so "All even" is the hypothesis.
  REQUIRE(a.current_hypothesis() == 0u);
  const auto& r = oracle::rules();
  const auto want = first_triple([&](int x, int y, int z) {
    return !r.at("All even")(x, y, z) && r.at("At least one even")(x, y, z);
  });
  CHECK(a.choose_probe(0) == want);
  CHECK(want == Triple{-99, -99, -98});

  // Without alternatives the first negative instance is used.
  auto lone = agent(s, Strategy::falsify, {"All even"});
  CHECK(lone.choose_probe(0) == Triple{-99, -99, -99});
}

TEST_CASE("eliminating probes split the viable pool as evenly as possible") {
  const auto s = wason_episode("All even");
  auto a = agent(s, Strategy::eliminate);
  const auto& g = Catalog::builtin().group(1);
  const auto probe = a.choose_probe(*a.current_hypothesis());
  int yes = 0;
  for (const auto& name : g.rules) yes += oracle::rules().at(name)(probe.a, probe.b, probe.c) ? 1 : 0;
  CHECK(yes == 2);
  // It is the first triple with a 2:2 split.
  const auto want = first_triple([&](int x, int y, int z) {
    int n = 0;
    for (const auto& name : g.rules) n += oracle::rules().at(name)(x, y, z) ? 1 : 0;
    return n == 2;
  });
  CHECK(probe == want);
}

TEST_CASE("elimination narrows the pool to the hidden rule") {
  const auto s = wason_episode("Exactly two equal", {2, 4, 4});
  auto a = agent(s, Strategy::eliminate, {"All even", "Exactly two equal", "At least one even", "Ascending"});
  Episode ep(s);
  while (ep.phase() != Phase::done) ep.submit(a.act(public_view(ep)).text, 1);
  const auto& last_guess = ep.history()[ep.history().size() - 2];
  CHECK(last_guess.announcement == Catalog::builtin().rule("Exactly two equal").expr.source());
}

TEST_CASE("scripted wason agents emit legal lines and are deterministic") {
  const auto& cat = Catalog::builtin();
  const auto ds = build_wason_dataset(cat).test;
  for (auto strategy : {Strategy::confirm, Strategy::falsify, Strategy::eliminate}) {
    for (std::size_t i = 0; i < ds.size(); i += 9) {
      CAPTURE(ds[i].id);
      AgentSpec spec;
      spec.kind = std::string(strategy_name(strategy));
      auto a1 = make_agent(spec, cat, ds[i], 7);
      auto a2 = make_agent(spec, cat, ds[i], 7);
      const auto t1 = run_episode(ds[i], *a1);
      const auto t2 = run_episode(ds[i], *a2);
      CHECK(t1.status == EpisodeStatus::complete);
      CHECK(serialize_transcript(t1) == serialize_transcript(t2));
      for (const auto& rec : t1.turns) CHECK(rec.retries == 0);
    }
  }
}

TEST_CASE("dual goal announcements") {
  auto s = wason_episode("All even");
  s.protocol = Protocol::dual_goal;
  auto a = agent(s, Strategy::confirm, {"All even"});
  Episode ep(s);
  const auto reply = a.act(public_view(ep));
  CHECK(reply.text == "Announce: DAX rule - " + Catalog::builtin().rule("All even").expr.source() +
                          "\nAnnounce: MED rule - not (" + Catalog::builtin().rule("All even").expr.source() + ")");
  CHECK(ep.submit(reply.text, reply.tokens).accepted);
}

TEST_CASE("agents never see the hidden rule") {
  auto s1 = wason_episode("All even");
  auto s2 = s1;
  s2.setup = WasonSetup{{2, 4, 6}, "Ascending", Catalog::builtin().rule("Ascending").expr.source(), 1};
  auto a1 = agent(s1, Strategy::eliminate);
  auto a2 = agent(s2, Strategy::eliminate);
  Episode e1(s1);
  Episode e2(s2);
  CHECK(a1.act(public_view(e1)).text == a2.act(public_view(e2)).text);
  const auto v = public_view(e1);
  for (const auto& m : v.messages) CHECK(m.content.find("a % 2") == std::string::npos);
}

TEST_CASE("blicket pool and strategies") {
  BlicketPool pool(4, 2);
  CHECK(pool.candidates().size() == 3u * (4 + 6));
  CHECK(pool.candidates()[0] == BlicketRule{0b0001, BlicketKind::conjunctive, 0});
  pool.observe(0b0001, false);
  for (auto i : pool.viable_indices()) CHECK_FALSE(eval_blicket(pool.candidates()[i], 0b0001));

  EpisodeSpec s;
  s.id = "blicket-unit";
  s.turn_budget = 16;
  BlicketSetup b;
  b.num_objects = 4;
  b.target = {0b0110, BlicketKind::exclusive, 0};
  b.initial_placement = 0;
  b.config = "n4-k2-XOR";
  s.setup = b;

  ScriptedOptions o;
  o.strategy = Strategy::confirm;
  ScriptedAgent confirm(Catalog::builtin(), s, o);
  CHECK(confirm.choose_placement(0) == 0b0001u);

  o.strategy = Strategy::eliminate;
  ScriptedAgent elim(Catalog::builtin(), s, o);
  Episode ep(s);
  while (ep.phase() != Phase::done) ep.submit(elim.act(public_view(ep)).text, 1);
  CHECK(ep.status() == EpisodeStatus::complete);
  const auto& final_guess = ep.history()[ep.history().size() - 2];
  CHECK(final_guess.relevant == ObjectSet{0b0110});
  CHECK(final_guess.announcement == "xor");
}

TEST_CASE("empty pool falls back to the last viable hypothesis") {
  const auto s = wason_episode("Ascending");
  auto a = agent(s, Strategy::confirm, {"All even"});
  Episode ep(s);
  while (ep.phase() != Phase::done) {
    const auto reply = a.act(public_view(ep));
    CHECK(ep.submit(reply.text, reply.tokens).accepted);
  }
  CHECK(ep.status() == EpisodeStatus::complete);
  for (const auto& rec : ep.history()) {
    if (rec.kind == TurnKind::guess) CHECK(rec.announcement == Catalog::builtin().rule("All even").expr.source());
  }
}

TEST_CASE("scripted lines agent") {
  ScriptedLinesAgent a({"Announce: x", "Check: [1,2,3]"});
  PublicView v;
  CHECK(a.act(v).text == "Announce: x");
  CHECK(a.act(v).tokens == 2);
  CHECK_THROWS_AS(a.act(v), std::out_of_range);
}
