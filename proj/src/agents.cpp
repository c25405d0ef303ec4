#include "cbias/agents.hpp"

#include <algorithm>
#include <bit>

namespace cbias {

using nlohmann::json;

PublicView public_view(const Episode& episode) {
  const auto& spec = episode.spec();
  PublicView v;
  v.task = spec.task();
  v.protocol = spec.protocol;
  v.phase = episode.phase();
  v.turn = episode.turn();
  v.turn_budget = spec.turn_budget;
  if (v.task == Task::wason) {
    v.initial_triple = spec.wason().initial;
  } else {
    v.num_objects = spec.blicket().num_objects;
    v.initial_placement = spec.blicket().initial_placement;
    v.initial_on = spec.blicket().initial_on;
  }
  v.history = &episode.history();
  v.messages = episode.visible_messages();
  return v;
}

// ---------------------------------------------------------------------------
// Pools

WasonPool::WasonPool(std::vector<NamedRule> candidates) : candidates_(std::move(candidates)) {
  std::stable_sort(candidates_.begin(), candidates_.end(),
                   [](const NamedRule& x, const NamedRule& y) { return x.name < y.name; });
  viable_.assign(candidates_.size(), true);
}

void WasonPool::observe(const Triple& x, bool label) {
  const auto idx = x.index();
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    if (viable_[i] && candidates_[i].table->test(idx) != label) viable_[i] = false;
  }
}

std::vector<std::size_t> WasonPool::viable_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < viable_.size(); ++i) {
    if (viable_[i]) out.push_back(i);
  }
  return out;
}

BlicketPool::BlicketPool(int num_objects, int k_max) : num_objects_(num_objects) {
  if (num_objects < 1 || num_objects > kMaxObjects) throw std::invalid_argument("bad object count");
  k_max = std::clamp(k_max, 1, num_objects);
  for (int size = 1; size <= k_max; ++size) {
    for (ObjectSet mask = 1; mask < (ObjectSet{1} << num_objects); ++mask) {
      if (std::popcount(mask) != size) continue;
      for (auto kind : {BlicketKind::conjunctive, BlicketKind::disjunctive, BlicketKind::exclusive}) {
        candidates_.push_back(BlicketRule{mask, kind, 0});
      }
    }
  }
  viable_.assign(candidates_.size(), true);
}

void BlicketPool::observe(ObjectSet placed, bool on) {
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    if (viable_[i] && eval_blicket(candidates_[i], placed) != on) viable_[i] = false;
  }
}

std::vector<std::size_t> BlicketPool::viable_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < viable_.size(); ++i) {
    if (viable_[i]) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scripted agents

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::confirm: return "confirm";
    case Strategy::falsify: return "falsify";
    case Strategy::eliminate: return "eliminate";
  }
  return "?";
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<NamedRule> pool_rules(const Catalog& catalog, const EpisodeSpec& spec, const ScriptedOptions& options) {
  std::vector<std::string> names = options.wason_pool;
  if (names.empty()) {
    const auto& g = catalog.group(spec.wason().group_id);
    names.assign(g.rules.begin(), g.rules.end());
  }
  std::vector<NamedRule> out;
  for (const auto& name : names) {
    if (std::any_of(out.begin(), out.end(), [&](const NamedRule& r) { return r.name == name; })) continue;
    const auto& rule = catalog.rule(name);
    out.push_back(NamedRule{rule.name, rule.expr.source(), truth_table(rule.expr)});
  }
  return out;
}

// Lowest placement mask (empty set first) on which `want(mask)` holds.
template <typename Pred>
std::optional<ObjectSet> first_placement(int num_objects, Pred want) {
  for (ObjectSet mask = 0; mask < (ObjectSet{1} << num_objects); ++mask) {
    if (want(mask)) return mask;
  }
  return std::nullopt;
}

}  // namespace

ScriptedAgent::ScriptedAgent(const Catalog& catalog, const EpisodeSpec& spec, ScriptedOptions options)
    : options_(std::move(options)), task_(spec.task()), rng_(options_.seed, fnv1a(spec.id)) {
  if (task_ == Task::wason) {
    wason_.emplace(pool_rules(catalog, spec, options_));
  } else {
    blicket_.emplace(spec.blicket().num_objects, options_.blicket_k_max);
  }
}

json ScriptedAgent::describe() const {
  json j = {{"kind", "scripted"}, {"strategy", strategy_name(options_.strategy)}, {"seed", options_.seed}};
  if (wason_) {
    json names = json::array();
    for (const auto& c : wason_->candidates()) names.push_back(c.name);
    j["pool"] = names;
  } else {
    j["blicket_k_max"] = options_.blicket_k_max;
  }
  return j;
}

std::optional<std::size_t> ScriptedAgent::current_hypothesis() const {
  const auto& v = wason_ ? wason_->viable() : blicket_->viable();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i]) return i;
  }
  return std::nullopt;
}

void ScriptedAgent::sync(const PublicView& view) {
  if (!view.history) return;
  const auto& h = *view.history;
  for (; observed_ < h.size(); ++observed_) {
    const auto& rec = h[observed_];
    if (rec.kind != TurnKind::test) continue;
    const auto truth = feedback_truth(rec.feedback);
    if (!truth) continue;
    if (wason_ && rec.probe) wason_->observe(*rec.probe, *truth);
    if (blicket_ && rec.placement) blicket_->observe(*rec.placement, *truth);
  }
}

AgentReply ScriptedAgent::act(const PublicView& view) {
  sync(view);
  std::string text = view.phase == Phase::awaiting_guess ? announce_line(view) : test_line(view);
  const auto tokens = count_words(text);
  return AgentReply{std::move(text), tokens};
}

std::string ScriptedAgent::announce_line(const PublicView& view) {
  if (auto h = current_hypothesis()) last_viable_ = h;
  // With an empty pool the last viable hypothesis is repeated.
  announced_ = last_viable_.value_or(0);
  if (blicket_) return "Announce: " + format_blicket_hypothesis(blicket_->candidates().at(*announced_));
  const auto& src = wason_->candidates().at(*announced_).source;
  if (view.protocol == Protocol::dual_goal) {
    return "Announce: DAX rule - " + src + "\nAnnounce: MED rule - not (" + src + ")";
  }
  return "Announce: " + src;
}

std::string ScriptedAgent::test_line(const PublicView& view) {
  if (!announced_) announced_ = current_hypothesis().value_or(0);
  if (blicket_) return "Test: " + format_objects(choose_placement(*announced_));
  (void)view;
  const Triple t = choose_probe(*announced_);
  return "Check: [" + std::to_string(t.a) + "," + std::to_string(t.b) + "," + std::to_string(t.c) + "]";
}

Triple ScriptedAgent::choose_probe(std::size_t hypothesis) {
  const auto viable = wason_->viable_indices();
  if (viable.empty()) {
    // PoolEmpty: the target lies outside the configured pool.
    return Triple{kDomainMin + static_cast<int>(rng_.bounded(kDomainWidth)),
                  kDomainMin + static_cast<int>(rng_.bounded(kDomainWidth)),
                  kDomainMin + static_cast<int>(rng_.bounded(kDomainWidth))};
  }
  const auto& candidates = wason_->candidates();
  const TruthTable& h = *candidates.at(hypothesis).table;
  const auto pick = [](std::optional<std::size_t> i) { return Triple::from_index(*i); };
  const auto confirm = [&] {
    if (auto i = h.first_set()) return pick(i);
    return pick(h.first_clear());
  };

  switch (options_.strategy) {
    case Strategy::confirm: return confirm();
    case Strategy::falsify: {
      TruthTable others;
      bool any = false;
      for (auto i : viable) {
        if (i == hypothesis) continue;
        any = true;
        auto& w = others.words();
        const auto& src = candidates[i].table->words();
        for (std::size_t k = 0; k < w.size(); ++k) w[k] |= src[k];
      }
      if (any) {
        others &= ~h;
        if (auto i = others.first_set()) return pick(i);
      }
      if (auto i = h.first_clear()) return pick(i);
      return confirm();
    }
    case Strategy::eliminate: {
      const std::size_t n = viable.size();
      const std::size_t target = n / 2;
      std::size_t best_split = 0;
      std::optional<std::size_t> best;
      std::vector<const std::uint64_t*> words;
      for (auto i : viable) words.push_back(candidates[i].table->words().data());
      for (std::size_t w = 0; w < TruthTable::kWords && best_split < target; ++w) {
        std::uint64_t any = 0;
        std::uint64_t all = ~std::uint64_t{0};
        for (const auto* p : words) {
          any |= p[w];
          all &= p[w];
        }
        std::uint64_t mixed = any & ~all;
        while (mixed && best_split < target) {
          const int bit = std::countr_zero(mixed);
          mixed &= mixed - 1;
          std::size_t yes = 0;
          for (const auto* p : words) yes += (p[w] >> bit) & 1u;
          const std::size_t split = std::min(yes, n - yes);
          if (split > best_split) {
            best_split = split;
            best = w * 64 + static_cast<std::size_t>(bit);
          }
        }
      }
      if (best) return pick(best);
      return confirm();  // viable candidates are all equivalent
    }
  }
  return confirm();
}

ObjectSet ScriptedAgent::choose_placement(std::size_t hypothesis) {
  const int n = blicket_->num_objects();
  const auto viable = blicket_->viable_indices();
  if (viable.empty()) return rng_.bounded(ObjectSet{1} << n);
  const auto& candidates = blicket_->candidates();
  const BlicketRule& h = candidates.at(hypothesis);
  const auto confirm = [&] {
    if (auto m = first_placement(n, [&](ObjectSet p) { return eval_blicket(h, p); })) return *m;
    return ObjectSet{0};
  };

  switch (options_.strategy) {
    case Strategy::confirm: return confirm();
    case Strategy::falsify: {
      auto m = first_placement(n, [&](ObjectSet p) {
        if (eval_blicket(h, p)) return false;
        return std::any_of(viable.begin(), viable.end(),
                           [&](std::size_t i) { return i != hypothesis && eval_blicket(candidates[i], p); });
      });
      if (!m) m = first_placement(n, [&](ObjectSet p) { return !eval_blicket(h, p); });
      return m ? *m : confirm();
    }
    case Strategy::eliminate: {
      std::size_t best_split = 0;
      std::optional<ObjectSet> best;
      for (ObjectSet p = 0; p < (ObjectSet{1} << n); ++p) {
        std::size_t yes = 0;
        for (auto i : viable) yes += eval_blicket(candidates[i], p) ? 1 : 0;
        const std::size_t split = std::min(yes, viable.size() - yes);
        if (split > best_split) {
          best_split = split;
          best = p;
        }
      }
      return best ? *best : confirm();
    }
  }
  return confirm();
}

ScriptedLinesAgent::ScriptedLinesAgent(std::vector<std::string> lines) : lines_(std::move(lines)) {}

AgentReply ScriptedLinesAgent::act(const PublicView&) {
  if (next_ >= lines_.size()) throw std::out_of_range("scripted lines exhausted");
  const auto& line = lines_[next_++];
  return AgentReply{line, count_words(line)};
}

json ScriptedLinesAgent::describe() const { return {{"kind", "lines"}, {"count", lines_.size()}}; }

LlmAgent::LlmAgent(EndpointConfig config) : client_(std::move(config)) {}

AgentReply LlmAgent::act(const PublicView& view) {
  const auto result = client_.complete(view.messages);
  std::string text = result.content;
  // Providers that split out the reasoning trace get it folded back so the
  // transcript keeps the raw output.
  if (!result.reasoning.empty()) text = "<think>" + result.reasoning + "</think>" + text;
  return AgentReply{std::move(text), result.completion_tokens};
}

json LlmAgent::describe() const {
  json j = to_json(client_.config());
  j["kind"] = "llm";
  return j;
}

}  // namespace cbias
