#pragma once

// Episode-set metrics: task success, first-guess success, turns until
// success, tokens per turn and pooled incompatible:compatible ratios.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbias/judge.hpp"
#include "json.hpp"

namespace cbias {

struct PooledRatio {
  std::int64_t incompatible{0};
  std::int64_t compatible{0};

  std::optional<double> value() const {
    if (compatible == 0) return std::nullopt;
    return static_cast<double>(incompatible) / static_cast<double>(compatible);
  }
  PooledRatio& operator+=(const PooledRatio& o) {
    incompatible += o.incompatible;
    compatible += o.compatible;
    return *this;
  }
};

// Per-episode counts that feed the pooled views and the paired tests.
struct EpisodeCounts {
  std::string episode_id;
  bool solved{false};
  std::optional<int> t_star;
  PooledRatio ic;  // tests up to t_star when solved, all tests otherwise
  std::int64_t tokens{0};
  std::int64_t model_turns{0};
  int unjudgeable_tests{0};
};

EpisodeCounts episode_counts(const JudgedEpisode& e);

struct MetricReport {
  std::size_t episodes{0};  // included in the metrics
  std::size_t solved{0};
  std::map<std::string, std::size_t> excluded;  // by status
  std::int64_t unjudgeable_guesses{0};
  std::int64_t unjudgeable_tests{0};
  std::optional<double> task_success;
  std::optional<double> first_guess;
  std::optional<double> turns_until_success;   // mean t_star over solved
  std::optional<double> tests_before_success;  // mean (t_star - 1) over solved
  std::optional<double> tokens_sol;
  std::optional<double> tokens_uns;
  std::optional<double> tokens_all;
  PooledRatio ic_sol;
  PooledRatio ic_uns;
  PooledRatio ic_all;
  bool token_proxy{false};
};

// Episodes whose status is not "complete" are excluded and counted.
MetricReport compute_metrics(const std::vector<JudgedEpisode>& episodes);

nlohmann::json to_json(const MetricReport& r);
std::string render_report(const MetricReport& r, const std::string& title = {});

// One row per episode: id, solved, t_star, I, C, per-episode ratio.
std::string render_points(const std::vector<JudgedEpisode>& episodes);

}  // namespace cbias
