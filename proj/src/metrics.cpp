#include "cbias/metrics.hpp"

#include <cstdio>
#include <sstream>

namespace cbias {

using nlohmann::json;

EpisodeCounts episode_counts(const JudgedEpisode& e) {
  EpisodeCounts c;
  c.episode_id = e.episode_id;
  c.t_star = e.t_star;
  c.solved = e.t_star.has_value();
  for (const auto& t : e.turns) {
    if (c.solved && t.turn > *e.t_star) break;
    const auto at = static_cast<std::size_t>(t.turn - 1);
    if (at < e.guess_tokens.size()) c.tokens += e.guess_tokens[at];
    ++c.model_turns;
    if (!t.label) continue;
    if (at < e.test_tokens.size()) c.tokens += e.test_tokens[at];
    ++c.model_turns;
    switch (*t.label) {
      case Label::compatible: ++c.ic.compatible; break;
      case Label::incompatible: ++c.ic.incompatible; break;
      case Label::unjudgeable: ++c.unjudgeable_tests; break;
    }
  }
  return c;
}

MetricReport compute_metrics(const std::vector<JudgedEpisode>& episodes) {
  MetricReport r;
  std::size_t first_guess = 0;
  std::int64_t t_star_sum = 0;
  std::int64_t tokens_sol = 0, turns_sol = 0, tokens_uns = 0, turns_uns = 0;
  for (const auto& e : episodes) {
    if (e.status != EpisodeStatus::complete) {
      ++r.excluded[std::string(status_name(e.status))];
      continue;
    }
    ++r.episodes;
    r.token_proxy = r.token_proxy || e.token_proxy;
    r.unjudgeable_guesses += e.unjudgeable_guesses;
    const auto c = episode_counts(e);
    r.unjudgeable_tests += c.unjudgeable_tests;
    if (c.solved) {
      ++r.solved;
      if (*c.t_star == 1) ++first_guess;
      t_star_sum += *c.t_star;
      r.ic_sol += c.ic;
      tokens_sol += c.tokens;
      turns_sol += c.model_turns;
    } else {
      r.ic_uns += c.ic;
      tokens_uns += c.tokens;
      turns_uns += c.model_turns;
    }
  }
  r.ic_all = r.ic_sol;
  r.ic_all += r.ic_uns;
  const auto ratio = [](double num, double den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return num / den;
  };
  const auto n = static_cast<double>(r.episodes);
  const auto s = static_cast<double>(r.solved);
  r.task_success = ratio(s, n);
  r.first_guess = ratio(static_cast<double>(first_guess), n);
  r.turns_until_success = ratio(static_cast<double>(t_star_sum), s);
  r.tests_before_success = ratio(static_cast<double>(t_star_sum) - s, s);
  r.tokens_sol = ratio(static_cast<double>(tokens_sol), static_cast<double>(turns_sol));
  r.tokens_uns = ratio(static_cast<double>(tokens_uns), static_cast<double>(turns_uns));
  r.tokens_all =
      ratio(static_cast<double>(tokens_sol + tokens_uns), static_cast<double>(turns_sol + turns_uns));
  return r;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json ratio_json(const PooledRatio& p) {
  return {{"incompatible", p.incompatible}, {"compatible", p.compatible}, {"value", opt(p.value())}};
}

std::string fmt(const std::optional<double>& v, int digits = 3) {
  if (!v) return "--";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

std::string fmt_ratio(const PooledRatio& p) {
  return fmt(p.value()) + " (" + std::to_string(p.incompatible) + ":" + std::to_string(p.compatible) + ")";
}

}  // namespace

json to_json(const MetricReport& r) {
  return {{"episodes", r.episodes},
          {"solved", r.solved},
          {"excluded", r.excluded},
          {"unjudgeable_guesses", r.unjudgeable_guesses},
          {"unjudgeable_tests", r.unjudgeable_tests},
          {"task_success", opt(r.task_success)},
          {"first_guess", opt(r.first_guess)},
          {"turns_until_success", opt(r.turns_until_success)},
          {"tests_before_success", opt(r.tests_before_success)},
          {"tokens_per_turn", {{"sol", opt(r.tokens_sol)}, {"uns", opt(r.tokens_uns)}, {"all", opt(r.tokens_all)}}},
          {"token_proxy", r.token_proxy},
          {"ic", {{"sol", ratio_json(r.ic_sol)}, {"uns", ratio_json(r.ic_uns)}, {"all", ratio_json(r.ic_all)}}}};
}

std::string render_report(const MetricReport& r, const std::string& title) {
  std::ostringstream out;
  if (!title.empty()) out << title << "\n";
  out << "episodes              " << r.episodes << " (solved " << r.solved << ")\n";
  for (const auto& [status, count] : r.excluded) out << "excluded              " << count << " " << status << "\n";
  out << "task success          " << fmt(r.task_success) << "\n";
  out << "first guess           " << fmt(r.first_guess) << "\n";
  out << "turns until success   " << fmt(r.turns_until_success, 2) << "\n";
  out << "tests before success  " << fmt(r.tests_before_success, 2) << "\n";
  out << "tokens/turn sol       " << fmt(r.tokens_sol, 1) << "\n";
  out << "tokens/turn uns       " << fmt(r.tokens_uns, 1) << "\n";
  out << "tokens/turn all       " << fmt(r.tokens_all, 1) << (r.token_proxy ? "  (word counts)" : "") << "\n";
  out << "I:C sol               " << fmt_ratio(r.ic_sol) << "\n";
  out << "I:C uns               " << fmt_ratio(r.ic_uns) << "\n";
  out << "I:C all               " << fmt_ratio(r.ic_all) << "\n";
  if (r.unjudgeable_guesses || r.unjudgeable_tests) {
    out << "unjudgeable           " << r.unjudgeable_guesses << " guesses, " << r.unjudgeable_tests << " tests\n";
  }
  return out.str();
}

std::string render_points(const std::vector<JudgedEpisode>& episodes) {
  std::ostringstream out;
  out << "episode_id\tstatus\tsolved\tt_star\tincompatible\tcompatible\tratio\n";
  for (const auto& e : episodes) {
    const auto c = episode_counts(e);
    out << e.episode_id << '\t' << status_name(e.status) << '\t' << (c.solved ? 1 : 0) << '\t'
        << (c.t_star ? std::to_string(*c.t_star) : "") << '\t' << c.ic.incompatible << '\t' << c.ic.compatible
        << '\t' << fmt(c.ic.value(), 6) << '\n';
  }
  return out.str();
}

}  // namespace cbias
