#include "cbias/runner.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "cbias/io.hpp"

namespace cbias {

using nlohmann::json;

namespace {

std::optional<Strategy> parse_strategy(std::string_view kind) {
  if (kind == "confirm") return Strategy::confirm;
  if (kind == "falsify") return Strategy::falsify;
  if (kind == "eliminate") return Strategy::eliminate;
  return std::nullopt;
}

}  // namespace

json to_json(const RunConfig& c) {
  json agent = {{"kind", c.agent.kind}, {"wason_pool", c.agent.wason_pool}, {"blicket_k_max", c.agent.blicket_k_max}};
  if (c.agent.kind == "llm") agent["endpoint"] = to_json(c.agent.endpoint);
  return {{"dataset", c.dataset},
          {"protocol", c.protocol ? json(protocol_name(*c.protocol)) : json(nullptr)},
          {"agent", agent},
          {"seed", c.seed},
          {"turn_budget", c.turn_budget},
          {"retry_cap", c.retry_cap},
          {"workers", c.workers},
          {"request_capacity", c.request_capacity},
          {"max_episode_tokens", c.max_episode_tokens},
          {"output_dir", c.output_dir}};
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
  RunConfig c;
  try {
    c.dataset = j.value("dataset", c.dataset);
    if (j.contains("protocol") && !j["protocol"].is_null()) {
      const auto name = j["protocol"].get<std::string>();
      c.protocol = parse_protocol(name);
      if (!c.protocol) throw std::invalid_argument("unknown protocol '" + name + "'");
    }
    if (j.contains("agent")) {
      const auto& a = j["agent"];
      c.agent.kind = a.value("kind", c.agent.kind);
      if (a.contains("wason_pool")) c.agent.wason_pool = a["wason_pool"].get<std::vector<std::string>>();
      c.agent.blicket_k_max = a.value("blicket_k_max", c.agent.blicket_k_max);
      if (a.contains("endpoint")) c.agent.endpoint = endpoint_from_json(a["endpoint"]);
    }
    c.seed = j.value("seed", c.seed);
    c.turn_budget = j.value("turn_budget", c.turn_budget);
    c.retry_cap = j.value("retry_cap", c.retry_cap);
    c.workers = j.value("workers", c.workers);
    c.request_capacity = j.value("request_capacity", c.request_capacity);
    c.max_episode_tokens = j.value("max_episode_tokens", c.max_episode_tokens);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("run config: ") + e.what());
  }
  if (c.agent.kind != "llm" && !parse_strategy(c.agent.kind)) {
    throw std::invalid_argument("unknown agent kind '" + c.agent.kind + "' (confirm, falsify, eliminate, llm)");
  }
  if (c.agent.kind == "llm" && (c.agent.endpoint.base_url.empty() || c.agent.endpoint.model.empty())) {
    throw std::invalid_argument("llm agent needs endpoint.base_url and endpoint.model");
  }
  if (c.turn_budget < 1) throw std::invalid_argument("turn_budget must be at least 1");
  if (c.retry_cap < 1) throw std::invalid_argument("retry_cap must be at least 1");
  if (c.workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (c.request_capacity < 1) throw std::invalid_argument("request_capacity must be at least 1");
  if (c.agent.blicket_k_max < 1) throw std::invalid_argument("blicket_k_max must be at least 1");
  return c;
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, const Catalog& catalog, const EpisodeSpec& episode,
                                  std::uint64_t seed) {
  if (spec.kind == "llm") return std::make_unique<LlmAgent>(spec.endpoint);
  const auto strategy = parse_strategy(spec.kind);
  if (!strategy) throw std::invalid_argument("unknown agent kind '" + spec.kind + "'");
  return std::make_unique<ScriptedAgent>(catalog, episode,
                                         ScriptedOptions{*strategy, spec.wason_pool, spec.blicket_k_max, seed});
}

Transcript run_episode(const EpisodeSpec& spec, Agent& agent, const RunOptions& options) {
  Episode ep(spec, EngineOptions{options.retry_cap});
  std::int64_t spent = 0;
  while (ep.phase() != Phase::done) {
    AgentReply reply;
    try {
      reply = agent.act(public_view(ep));
    } catch (const TransportError& e) {
      ep.abort(EpisodeStatus::transport_failure, e.what());
      break;
    }
    spent += reply.tokens;
    try {
      ep.submit(reply.text, reply.tokens);
    } catch (const RetryLimitExceeded&) {
      break;
    }
    if (options.max_episode_tokens > 0 && spent > options.max_episode_tokens && ep.phase() != Phase::done) {
      ep.abort(EpisodeStatus::budget_exceeded,
               std::to_string(spent) + " tokens exceed the limit of " + std::to_string(options.max_episode_tokens));
    }
  }
  return make_transcript(ep, options.run_header);
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

RunSummary run_dataset(const RunConfig& config, const Catalog& catalog, const std::vector<EpisodeSpec>& episodes,
                       const std::function<void(std::size_t, std::size_t)>& progress) {
  const std::filesystem::path out(config.output_dir);
  const auto dir = out / "transcripts";
  std::filesystem::create_directories(dir);
  set_request_capacity(config.request_capacity);

  std::vector<EpisodeSpec> specs = episodes;
  for (auto& s : specs) {
    if (config.protocol) s.protocol = *config.protocol;
    s.turn_budget = config.turn_budget;
    if (s.task() == Task::blicket && s.protocol == Protocol::dual_goal) {
      throw std::invalid_argument(s.id + ": the blicket task has no dual-goal protocol");
    }
  }

  const json config_json = to_json(config);
  // Where the output goes and how many threads produce it do not change it.
  json hashed = config_json;
  for (const auto* key : {"output_dir", "workers", "request_capacity"}) hashed.erase(key);
  const auto hash = config_hash(hashed);
  RunSummary summary;
  summary.episodes = specs.size();
  std::mutex mu;
  std::size_t done = 0;

  parallel_for(specs.size(), config.workers, [&](std::size_t i) {
    const auto& spec = specs[i];
    auto agent = make_agent(config.agent, catalog, spec, config.seed);
    RunOptions opts;
    opts.retry_cap = config.retry_cap;
    opts.max_episode_tokens = config.max_episode_tokens;
    opts.run_header = {{"agent", agent->describe()},
                       {"config_hash", hash},
                       {"seed", config.seed},
                       {"turn_budget", config.turn_budget},
                       {"retry_cap", config.retry_cap},
                       {"max_episode_tokens", config.max_episode_tokens}};
    const auto t = run_episode(spec, *agent, opts);
    write_transcript(dir / (spec.id + ".jsonl"), t);
    std::lock_guard lock(mu);
    ++summary.by_status[std::string(status_name(t.status))];
    ++done;
    if (progress) progress(done, specs.size());
  });

  const json run = {{"schema", "cbias.run/1"},
                    {"config", config_json},
                    {"config_hash", hash},
                    {"episodes", summary.episodes},
                    {"by_status", summary.by_status}};
  write_text_file(out / "run.json", run.dump(2) + "\n");
  return summary;
}

}  // namespace cbias
