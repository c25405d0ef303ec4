// Command-line front end: generate, run, judge, metrics, stats,
// export-distill and replay.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cbias/catalog.hpp"
#include "cbias/distill.hpp"
#include "cbias/io.hpp"
#include "cbias/judge.hpp"
#include "cbias/metrics.hpp"
#include "cbias/permutation.hpp"
#include "cbias/runner.hpp"
#include "cbias/transcript.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cbias;

namespace {

enum Exit : int {
  kOk = 0,
  kValidation = 2,
  kTransport = 3,
  kFormatFailures = 4,
  kMissingInput = 5,
  kReplayMismatch = 6,
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Protocol protocol_arg(const std::string& name) {
  const auto p = parse_protocol(name);
  if (!p) throw ValidationError("unknown protocol '" + name + "' (baseline, dual_goal, think_in_opposites)");
  return *p;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    if (first == std::string::npos) continue;
    out.push_back(item.substr(first, item.find_last_not_of(' ') - first + 1));
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string task{"all"};
  std::string out{"data"};
  std::uint64_t seed{kDefaultSeed};
  std::string protocol{"baseline"};
  std::vector<int> groups;
  std::size_t train_triples{100};
  std::size_t validation_triples{2};
  std::size_t blicket_per_config{16};
};

int cmd_generate(const GenerateArgs& a) {
  if (a.task != "all" && a.task != "wason" && a.task != "blicket") {
    throw ValidationError("unknown task '" + a.task + "' (wason, blicket, all)");
  }
  const auto protocol = protocol_arg(a.protocol);
  const auto& catalog = Catalog::builtin();
  for (int id : a.groups) {
    try {
      catalog.group(id);
    } catch (const CatalogError&) {
      throw ValidationError("unknown group id " + std::to_string(id));
    }
  }
  const fs::path out(a.out);
  const json base = {{"seed", a.seed}, {"protocol", protocol_name(protocol)}};

  if (a.task != "blicket") {
    std::printf("%-6s %-11s %10s %10s\n", "group", "split", "feasible", "published");
    for (const auto& g : catalog.groups()) {
      if (!a.groups.empty() && std::find(a.groups.begin(), a.groups.end(), g.id) == a.groups.end()) continue;
      const auto fs_count = enumerate_feasible(catalog, g).count();
      std::printf("%-6d %-11s %10zu %10s\n", g.id, std::string(split_name(g.split)).c_str(), fs_count,
                  g.published_feasible ? std::to_string(*g.published_feasible).c_str() : "-");
    }
    const auto ds = build_wason_dataset(catalog, {a.seed, a.train_triples, a.validation_triples, protocol});
    const auto keep = [&](std::vector<EpisodeSpec> v) {
      if (a.groups.empty()) return v;
      std::erase_if(v, [&](const EpisodeSpec& s) {
        return std::find(a.groups.begin(), a.groups.end(), s.wason().group_id) == a.groups.end();
      });
      return v;
    };
    const std::pair<const char*, std::vector<EpisodeSpec>> splits[] = {
        {"train", keep(ds.train)}, {"validation", keep(ds.validation)}, {"test", keep(ds.test)}};
    for (const auto& [name, episodes] : splits) {
      json header = base;
      header["task"] = "wason";
      header["split"] = name;
      header["train_triples"] = a.train_triples;
      header["validation_triples"] = a.validation_triples;
      const auto path = out / ("wason_" + std::string(name) + ".jsonl");
      write_dataset(path.string(), header, episodes);
      std::printf("wrote %zu episodes to %s\n", episodes.size(), path.string().c_str());
    }
  }
  if (a.task != "wason") {
    if (protocol == Protocol::dual_goal) throw ValidationError("the blicket task has no dual-goal protocol");
    const auto episodes = build_blicket_dataset({a.seed, a.blicket_per_config, protocol});
    json header = base;
    header["task"] = "blicket";
    header["per_config"] = a.blicket_per_config;
    const auto path = out / "blicket.jsonl";
    write_dataset(path.string(), header, episodes);
    std::printf("wrote %zu episodes to %s\n", episodes.size(), path.string().c_str());
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  std::string config_file;
  std::string dataset;
  std::string agent;
  std::string protocol;
  std::string out;
  std::string pool;
  std::optional<std::uint64_t> seed;
  std::optional<int> turn_budget;
  std::optional<int> retry_cap;
  std::optional<unsigned> workers;
  std::optional<int> k_max;
  std::optional<int> request_capacity;
  std::optional<std::int64_t> max_episode_tokens;
  std::string base_url;
  std::string model;
  std::string api_key_env;
  std::optional<int> max_tokens;
  std::optional<double> temperature;
  bool quiet{false};
};

RunConfig build_run_config(const RunArgs& a) {
  json j = json::object();
  if (!a.config_file.empty()) {
    try {
      j = json::parse(read_text_file(a.config_file));
    } catch (const json::parse_error& e) {
      throw ValidationError(a.config_file + ": " + e.what());
    }
  }
  RunConfig c;
  try {
    c = run_config_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (!a.dataset.empty()) c.dataset = a.dataset;
  if (!a.agent.empty()) c.agent.kind = a.agent;
  if (!a.protocol.empty()) c.protocol = protocol_arg(a.protocol);
  if (!a.out.empty()) c.output_dir = a.out;
  if (!a.pool.empty()) c.agent.wason_pool = split_list(a.pool);
  if (a.seed) c.seed = *a.seed;
  if (a.turn_budget) c.turn_budget = *a.turn_budget;
  if (a.retry_cap) c.retry_cap = *a.retry_cap;
  if (a.workers) c.workers = *a.workers;
  if (a.k_max) c.agent.blicket_k_max = *a.k_max;
  if (a.request_capacity) c.request_capacity = *a.request_capacity;
  if (a.max_episode_tokens) c.max_episode_tokens = *a.max_episode_tokens;
  auto& ep = c.agent.endpoint;
  if (!a.base_url.empty()) ep.base_url = a.base_url;
  if (!a.model.empty()) ep.model = a.model;
  if (!a.api_key_env.empty()) ep.api_key_env = a.api_key_env;
  if (a.max_tokens) ep.max_tokens = *a.max_tokens;
  if (a.temperature) ep.temperature = *a.temperature;
  // Re-validate the merged result.
  try {
    c = run_config_from_json(to_json(c));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (c.dataset.empty()) throw ValidationError("no dataset given (--dataset or \"dataset\" in the config)");
  for (const auto& name : c.agent.wason_pool) {
    if (!Catalog::builtin().find_rule(name)) throw ValidationError("unknown rule in pool: '" + name + "'");
  }
  return c;
}

int cmd_run(const RunArgs& a) {
  const auto config = build_run_config(a);
  const auto ds = read_dataset(config.dataset);
  const auto summary = run_dataset(config, Catalog::builtin(), ds.episodes, [&](std::size_t done, std::size_t n) {
    if (!a.quiet && (done % 50 == 0 || done == n)) std::fprintf(stderr, "\r%zu/%zu episodes", done, n);
    if (!a.quiet && done == n) std::fprintf(stderr, "\n");
  });
  std::printf("%zu episodes written to %s\n", summary.episodes, (fs::path(config.output_dir) / "transcripts").c_str());
  for (const auto& [status, n] : summary.by_status) std::printf("  %-18s %zu\n", status.c_str(), n);
  const auto count = [&](const char* s) {
    const auto it = summary.by_status.find(s);
    return it == summary.by_status.end() ? std::size_t{0} : it->second;
  };
  if (2 * count("transport_failure") > summary.episodes) return kTransport;
  if (2 * count("format_failure") > summary.episodes) return kFormatFailures;
  return kOk;
}

// ---------------------------------------------------------------------------
// judge / metrics

json read_run_header(const fs::path& run) {
  const auto path = run / "run.json";
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaMismatch(path.string() + ": " + e.what());
  }
  check_schema(j, "cbias.run/1", path);
  return j;
}

struct JudgeArgs {
  std::string run;
  unsigned workers{1};
  std::string base_url;
  std::string model;
  std::string api_key_env{"OPENAI_API_KEY"};
  int repair_cap{3};
};

int cmd_judge(const JudgeArgs& a) {
  const fs::path run(a.run);
  const auto header = read_run_header(run);
  const auto files = list_jsonl(run / "transcripts");
  const auto expected = header.value("episodes", std::size_t{0});
  if (files.size() != expected) {
    throw SchemaMismatch("partial run in " + run.string() + ": run.json lists " + std::to_string(expected) +
                         " episodes, found " + std::to_string(files.size()) + " transcripts");
  }
  std::unique_ptr<LlmJudgeAdapter> adapter;
  if (!a.base_url.empty()) {
    EndpointConfig ep;
    ep.base_url = a.base_url;
    ep.model = a.model;
    ep.api_key_env = a.api_key_env;
    ep.temperature = 0.0;
    adapter = std::make_unique<LlmJudgeAdapter>(ep, a.repair_cap);
  }
  const Judge judge(Catalog::builtin(), adapter.get());
  const auto out = run / "judged";
  fs::create_directories(out);
  std::mutex mu;
  std::int64_t unjudgeable = 0;
  parallel_for(files.size(), a.workers, [&](std::size_t i) {
    const auto t = read_transcript(files[i]);
    const auto e = judge.judge(t);
    write_judged(out / files[i].filename(), e);
    std::lock_guard lock(mu);
    unjudgeable += e.unjudgeable_guesses + e.unjudgeable_tests;
  });
  std::printf("judged %zu episodes into %s (%lld unjudgeable items)\n", files.size(), out.c_str(),
              static_cast<long long>(unjudgeable));
  if (adapter) std::printf("judge model calls: %d\n", adapter->calls());
  return kOk;
}

std::vector<JudgedEpisode> read_judged_dir(const fs::path& run) {
  std::vector<JudgedEpisode> out;
  for (const auto& f : list_jsonl(run / "judged")) out.push_back(read_judged(f));
  if (out.empty()) throw MissingInput("no judged episodes in " + (run / "judged").string() + " (run judge first)");
  return out;
}

int cmd_metrics(const std::string& run_dir) {
  const fs::path run(run_dir);
  const auto episodes = read_judged_dir(run);
  const auto report = compute_metrics(episodes);
  const auto text = render_report(report, run.string());
  write_text_file(run / "report.txt", text);
  write_text_file(run / "report.json", to_json(report).dump(2) + "\n");
  write_text_file(run / "points.tsv", render_points(episodes));
  std::fputs(text.c_str(), stdout);
  return kOk;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
  std::string a;
  std::string b;
  std::uint64_t n_perm{50'000};
  std::uint64_t seed{kDefaultSeed};
  bool two_sided{false};
  unsigned workers{1};
};

int cmd_stats(const StatsArgs& args) {
  const auto load = [](const std::string& dir) {
    std::map<std::string, JudgedEpisode> m;
    for (auto& e : read_judged_dir(dir)) m.emplace(e.episode_id, std::move(e));
    return m;
  };
  const auto a = load(args.a);
  const auto b = load(args.b);

  std::vector<double> success_a, success_b, first_a, first_b;
  std::vector<PooledRatio> ic_a, ic_b;
  std::size_t unpaired = 0;
  std::size_t excluded = 0;
  for (const auto& [id, ea] : a) {
    const auto it = b.find(id);
    if (it == b.end()) {
      ++unpaired;
      continue;
    }
    const auto& eb = it->second;
    if (ea.status != EpisodeStatus::complete || eb.status != EpisodeStatus::complete) {
      ++excluded;
      continue;
    }
    const auto ca = episode_counts(ea);
    const auto cb = episode_counts(eb);
    success_a.push_back(ca.solved);
    success_b.push_back(cb.solved);
    first_a.push_back(ca.t_star == 1);
    first_b.push_back(cb.t_star == 1);
    ic_a.push_back(ca.ic);
    ic_b.push_back(cb.ic);
  }
  for (const auto& [id, eb] : b) unpaired += a.count(id) ? 0 : 1;
  if (success_a.empty()) throw SchemaMismatch("no complete episodes are shared by the two runs");

  PermutationOptions opt;
  opt.n_perm = args.n_perm;
  opt.seed = args.seed;
  opt.alternative = args.two_sided ? Alternative::two_sided : Alternative::greater;
  opt.workers = args.workers;

  std::printf("pairs %zu (unpaired %zu, excluded %zu), %llu permutations, seed %llu, %s\n", success_a.size(),
              unpaired, excluded, static_cast<unsigned long long>(opt.n_perm),
              static_cast<unsigned long long>(opt.seed), std::string(alternative_name(opt.alternative)).c_str());
  std::printf("%-14s %10s %10s %10s %10s\n", "metric", "A", "B", "delta", "p");
  const auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const auto row = [&](const char* name, const std::vector<double>& x, const std::vector<double>& y) {
    const auto r = permutation_test(x, y, opt);
    std::printf("%-14s %10s %10s %+10.4f %10s\n", name, fixed(mean(x), 4).c_str(), fixed(mean(y), 4).c_str(),
                r.delta_obs, fixed(r.p_value, 5).c_str());
  };
  row("task_success", success_a, success_b);
  row("first_guess", first_a, first_b);
  PooledRatio pa, pb;
  for (const auto& r : ic_a) pa += r;
  for (const auto& r : ic_b) pb += r;
  if (const auto r = permutation_test_ratio(ic_a, ic_b, opt)) {
    std::printf("%-14s %10s %10s %+10.4f %10s\n", "ic", fixed(*pa.value(), 4).c_str(), fixed(*pb.value(), 4).c_str(),
                r->delta_obs, fixed(r->p_value, 5).c_str());
  } else {
    std::printf("%-14s %10s %10s %10s %10s   (no compatible tests on one side: %lld:%lld vs %lld:%lld)\n", "ic", "--",
                "--", "--", "--", static_cast<long long>(pa.incompatible), static_cast<long long>(pa.compatible),
                static_cast<long long>(pb.incompatible), static_cast<long long>(pb.compatible));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// export-distill

int cmd_export(const std::string& run_dir, const std::string& out_path, const std::string& split) {
  std::optional<Split> want;
  if (!split.empty()) {
    want = parse_split(split);
    if (!want) throw ValidationError("unknown split '" + split + "' (train, validation, test)");
  }
  const auto files = list_jsonl(fs::path(run_dir) / "transcripts");
  if (files.empty()) throw MissingInput("no transcripts in " + run_dir);
  const fs::path out(out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  auto tmp = out;
  tmp += ".tmp";
  DistillCounts counts;
  {
    std::ofstream stream(tmp, std::ios::binary | std::ios::trunc);
    if (!stream) throw std::runtime_error("cannot write " + tmp.string());
    DistillWriter writer(stream);
    for (const auto& f : files) {
      const auto t = read_transcript(f);
      if (want && t.spec.split != *want) continue;
      writer.add(t);
    }
    counts = writer.counts();
  }
  fs::rename(tmp, out);
  std::printf("%zu records from %zu episodes written to %s\n", counts.records, counts.episodes, out.c_str());
  if (counts.skipped_incomplete) std::printf("skipped %zu incomplete transcripts\n", counts.skipped_incomplete);
  return kOk;
}

// ---------------------------------------------------------------------------
// replay

std::string describe_probe(const TurnRecord& t) {
  if (t.probe) return to_string(*t.probe);
  if (t.placement) return format_objects(*t.placement);
  return "?";
}

int cmd_replay(const std::string& run_dir, const std::string& episode, const std::string& file) {
  fs::path path;
  if (!file.empty()) {
    path = file;
  } else {
    if (run_dir.empty() || episode.empty()) throw ValidationError("replay needs --transcript or --run with --episode");
    path = fs::path(run_dir) / "transcripts" / (episode + ".jsonl");
  }
  const auto t = read_transcript(path);
  const auto mismatches = verify_feedback(t);
  std::printf("episode %s (%s, %s, %d-test budget)\n", t.spec.id.c_str(), std::string(task_name(t.spec.task())).c_str(),
              std::string(protocol_name(t.spec.protocol)).c_str(), t.spec.turn_budget);
  if (t.spec.task() == Task::wason) {
    std::printf("hidden rule: %s := %s\n", t.spec.wason().target_name.c_str(), t.spec.wason().target_source.c_str());
  } else {
    std::printf("hidden rule: %s\n", format_blicket_hypothesis(t.spec.blicket().target).c_str());
  }
  for (const auto& rec : t.turns) {
    if (rec.kind == TurnKind::guess) {
      std::string text = rec.announcement;
      if (!rec.med.empty()) text += "  | MED: " + rec.med;
      if (rec.relevant) text = "relevant=" + format_objects(*rec.relevant) + "; rule=" + text;
      std::printf("%3d  announce  %s%s\n", rec.turn, text.c_str(),
                  rec.retries ? (" (" + std::to_string(rec.retries) + " retries)").c_str() : "");
    } else {
      const auto want = expected_feedback(t.spec, rec);
      const bool ok = want == rec.feedback;
      std::printf("%3d  test      %-24s %-4s %s\n", rec.turn, describe_probe(rec).c_str(),
                  std::string(feedback_word(rec.feedback)).c_str(),
                  ok ? "ok" : ("MISMATCH, expected " + std::string(feedback_word(want))).c_str());
    }
  }
  std::printf("status: %s%s\n", std::string(status_name(t.status)).c_str(),
              t.status_detail.empty() ? "" : (" (" + t.status_detail + ")").c_str());
  if (!mismatches.empty()) {
    std::printf("%zu feedback mismatches\n", mismatches.size());
    return kReplayMismatch;
  }
  std::printf("all feedback verified\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confirmation-bias episode simulator and evaluation harness"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write Wason and Blicket episode datasets");
  generate->add_option("--task", gen.task, "wason, blicket or all")->capture_default_str();
  generate->add_option("--out", gen.out, "Output directory")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Sampling seed")->capture_default_str();
  generate->add_option("--protocol", gen.protocol, "Protocol recorded in the episodes")->capture_default_str();
  generate->add_option("--group", gen.groups, "Restrict Wason output to these group ids");
  generate->add_option("--train-triples", gen.train_triples, "Initial triples per training group")->capture_default_str();
  generate->add_option("--validation-triples", gen.validation_triples, "Initial triples per validation group")
      ->capture_default_str();
  generate->add_option("--blicket-per-config", gen.blicket_per_config, "Blicket episodes per configuration")
      ->capture_default_str();

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Play every episode of a dataset with one agent");
  run->add_option("--config", ra.config_file, "Run config JSON; flags override its fields");
  run->add_option("--dataset", ra.dataset, "Dataset file from generate");
  run->add_option("--agent", ra.agent, "confirm, falsify, eliminate or llm");
  run->add_option("--protocol", ra.protocol, "Override the dataset protocol");
  run->add_option("--out", ra.out, "Run directory");
  run->add_option("--pool", ra.pool, "Comma-separated rule names for the scripted Wason pool");
  run->add_option("--seed", ra.seed, "Agent seed");
  run->add_option("--turn-budget", ra.turn_budget, "Tests per episode");
  run->add_option("--retry-cap", ra.retry_cap, "Malformed outputs tolerated per turn");
  run->add_option("--workers", ra.workers, "Episodes run in parallel");
  run->add_option("--k-max", ra.k_max, "Largest relevant set in the scripted Blicket pool");
  run->add_option("--request-capacity", ra.request_capacity, "Concurrent model requests");
  run->add_option("--max-episode-tokens", ra.max_episode_tokens, "Abort an episode past this many tokens");
  run->add_option("--base-url", ra.base_url, "Chat-completions endpoint, e.g. http://localhost:8000/v1");
  run->add_option("--model", ra.model, "Model name sent to the endpoint");
  run->add_option("--api-key-env", ra.api_key_env, "Environment variable holding the API key");
  run->add_option("--max-tokens", ra.max_tokens, "Completion token cap per request");
  run->add_option("--temperature", ra.temperature, "Sampling temperature");
  run->add_flag("--quiet", ra.quiet, "No progress output");

  JudgeArgs ja;
  auto* judge = app.add_subcommand("judge", "Label announcements and probes of a run");
  judge->add_option("--run", ja.run, "Run directory")->required();
  judge->add_option("--workers", ja.workers, "Episodes judged in parallel")->capture_default_str();
  judge->add_option("--judge-base-url", ja.base_url, "Optional endpoint for free-text announcements");
  judge->add_option("--judge-model", ja.model, "Judge model name");
  judge->add_option("--judge-api-key-env", ja.api_key_env, "Environment variable holding the judge key")
      ->capture_default_str();
  judge->add_option("--repair-cap", ja.repair_cap, "Translation attempts per hypothesis")->capture_default_str();

  std::string metrics_run;
  auto* metrics = app.add_subcommand("metrics", "Compute the metric report of a judged run");
  metrics->add_option("--run", metrics_run, "Run directory")->required();

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "Paired permutation tests between two judged runs");
  stats->add_option("--a", sa.a, "Run directory of condition A")->required();
  stats->add_option("--b", sa.b, "Run directory of condition B")->required();
  stats->add_option("--n-perm", sa.n_perm, "Permutations")->capture_default_str();
  stats->add_option("--seed", sa.seed, "Permutation seed")->capture_default_str();
  stats->add_flag("--two-sided", sa.two_sided, "Compare |delta| instead of delta");
  stats->add_option("--workers", sa.workers, "Threads")->capture_default_str();

  std::string export_run, export_out, export_split;
  auto* exporter = app.add_subcommand("export-distill", "Write next-turn training records from a teacher run");
  exporter->add_option("--run", export_run, "Teacher run directory")->required();
  exporter->add_option("--out", export_out, "Output JSONL file")->required();
  exporter->add_option("--split", export_split, "Only episodes of this split");

  std::string replay_run, replay_episode, replay_file;
  auto* replay = app.add_subcommand("replay", "Print a transcript and re-check its feedback");
  replay->add_option("--run", replay_run, "Run directory");
  replay->add_option("--episode", replay_episode, "Episode id");
  replay->add_option("--transcript", replay_file, "Transcript file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*run) return cmd_run(ra);
    if (*judge) return cmd_judge(ja);
    if (*metrics) return cmd_metrics(metrics_run);
    if (*stats) return cmd_stats(sa);
    if (*exporter) return cmd_export(export_run, export_out, export_split);
    if (*replay) return cmd_replay(replay_run, replay_episode, replay_file);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const MissingInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kMissingInput;
  } catch (const SchemaMismatch& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kMissingInput;
  } catch (const CatalogError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kMissingInput;
  } catch (const TransportError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kTransport;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kOk;
}
