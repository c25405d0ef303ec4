#include "cbias/metrics.hpp"
#include "doctest.h"

using namespace cbias;

namespace {

constexpr auto C = Label::compatible;
constexpr auto I = Label::incompatible;
constexpr auto U = Label::unjudgeable;

// One turn per label; the announcement on turn t_star is correct, others
// incorrect. Guesses cost 10 tokens and tests 2.
JudgedEpisode episode(const std::string& id, std::vector<Label> labels, std::optional<int> t_star,
                      EpisodeStatus status = EpisodeStatus::complete) {
  JudgedEpisode e;
  e.episode_id = id;
  e.status = status;
  e.t_star = t_star;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int turn = static_cast<int>(i) + 1;
    e.turns.push_back({turn, t_star == turn ? Verdict::correct : Verdict::incorrect, labels[i], {}});
    e.guess_tokens.push_back(10);
    e.test_tokens.push_back(2);
  }
  return e;
}

}  // namespace

TEST_CASE("ratios are pooled over probes, not averaged over episodes") {
  // Per-episode ratios 1 and 0 would average to 0.5; pooling gives 1:4.
  const auto r = compute_metrics({episode("a", {I, C}, std::nullopt), episode("b", {C, C, C}, std::nullopt)});
  CHECK(r.ic_uns.incompatible == 1);
  CHECK(r.ic_uns.compatible == 4);
  CHECK(*r.ic_uns.value() == doctest::Approx(0.25));
  CHECK(*r.ic_all.value() == doctest::Approx(0.25));
  CHECK_FALSE(r.ic_sol.value());
  CHECK(*r.task_success == 0.0);
  CHECK_FALSE(r.turns_until_success);
}

TEST_CASE("solved episodes count probes up to the first correct announcement") {
  // Turn 2 is correct; the incompatible probe on turn 3 is past t_star.
  const auto e = episode("s", {C, C, I}, 2);
  const auto c = episode_counts(e);
  CHECK(c.solved);
  CHECK(c.ic.compatible == 2);
  CHECK(c.ic.incompatible == 0);
  CHECK(c.model_turns == 4);
  CHECK(c.tokens == 24);

  const auto r = compute_metrics({e, episode("f", {C, I, I}, 1), episode("u", {I, I}, std::nullopt)});
  CHECK(r.solved == 2);
  CHECK(*r.task_success == doctest::Approx(2.0 / 3));
  CHECK(*r.first_guess == doctest::Approx(1.0 / 3));
  CHECK(*r.turns_until_success == doctest::Approx(1.5));
  CHECK(*r.tests_before_success == doctest::Approx(0.5));
  CHECK(r.ic_sol.compatible == 3);
  CHECK(r.ic_sol.incompatible == 0);
  CHECK(r.ic_uns.incompatible == 2);
  CHECK(r.ic_all.incompatible == 2);
  CHECK(r.ic_all.compatible == 3);
}

TEST_CASE("tokens per turn pool tokens over model turns") {
  // Solved: turns 1..2 -> 4 model turns, 24 tokens. Unsolved: 3 turns -> 36 / 6.
  const auto r = compute_metrics({episode("s", {C, C, C}, 2), episode("u", {I, C, C}, std::nullopt)});
  CHECK(*r.tokens_sol == doctest::Approx(6.0));
  CHECK(*r.tokens_uns == doctest::Approx(6.0));
  CHECK(*r.tokens_all == doctest::Approx(60.0 / 10));

  auto skewed = episode("k", {C}, std::nullopt);
  skewed.guess_tokens[0] = 100;
  const auto r2 = compute_metrics({skewed, episode("u", {I, C, C}, std::nullopt)});
  // (102 + 36) / (2 + 6), not the mean of 51 and 6.
  CHECK(*r2.tokens_uns == doctest::Approx(138.0 / 8));
}

TEST_CASE("failed episodes are excluded and counted") {
  const auto r = compute_metrics({episode("ok", {C, I}, std::nullopt),
                                  episode("ff", {I, I, I}, std::nullopt, EpisodeStatus::format_failure),
                                  episode("tf", {I}, 1, EpisodeStatus::transport_failure),
                                  episode("tf2", {I}, 1, EpisodeStatus::transport_failure)});
  CHECK(r.episodes == 1u);
  CHECK(r.excluded.at("format_failure") == 1u);
  CHECK(r.excluded.at("transport_failure") == 2u);
  CHECK(r.ic_all.incompatible == 1);
  CHECK(r.ic_all.compatible == 1);
  CHECK(*r.task_success == 0.0);
}

TEST_CASE("unjudgeable probes and turns without a test") {
  auto e = episode("x", {U, C, I}, std::nullopt);
  e.turns.push_back({4, Verdict::incorrect, std::nullopt, {}});
  e.guess_tokens.push_back(10);
  e.test_tokens.push_back(0);
  e.unjudgeable_guesses = 1;
  const auto c = episode_counts(e);
  CHECK(c.unjudgeable_tests == 1);
  CHECK(c.ic.compatible == 1);
  CHECK(c.ic.incompatible == 1);
  CHECK(c.model_turns == 7);
  const auto r = compute_metrics({e});
  CHECK(r.unjudgeable_tests == 1);
  CHECK(r.unjudgeable_guesses == 1);
}

TEST_CASE("empty input and rendering") {
  const auto r = compute_metrics({});
  CHECK_FALSE(r.task_success);
  CHECK_FALSE(r.tokens_all);
  const auto text = render_report(r, "empty");
  CHECK(text.find("task success          --") != std::string::npos);
  CHECK(to_json(r)["task_success"].is_null());

  const auto full = compute_metrics({episode("a", {I, C}, std::nullopt), episode("b", {C, C, C}, std::nullopt)});
  CHECK(render_report(full).find("I:C all               0.250 (1:4)") != std::string::npos);
  CHECK(to_json(full)["ic"]["all"]["value"].get<double>() == doctest::Approx(0.25));

  const auto points = render_points({episode("a", {I, C}, std::nullopt)});
  CHECK(points.starts_with("episode_id\tstatus\tsolved\tt_star\tincompatible\tcompatible\tratio\n"));
  CHECK(points.find("a\tcomplete\t") != std::string::npos);
}
