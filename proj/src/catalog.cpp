#include "cbias/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "cbias/assets.hpp"
#include "cbias/io.hpp"
#include "cbias/pcg.hpp"
#include "cbias/truth_table.hpp"

namespace cbias {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view name) {
  for (auto s : {Split::train, Split::validation, Split::test}) {
    if (split_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view task_name(Task t) { return t == Task::wason ? "wason" : "blicket"; }

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::baseline: return "baseline";
    case Protocol::dual_goal: return "dual_goal";
    case Protocol::think_in_opposites: return "think_in_opposites";
  }
  return "?";
}

std::optional<Protocol> parse_protocol(std::string_view name) {
  for (auto p : {Protocol::baseline, Protocol::dual_goal, Protocol::think_in_opposites}) {
    if (protocol_name(p) == name) return p;
  }
  if (name == "tio") return Protocol::think_in_opposites;
  if (name == "dual-goal") return Protocol::dual_goal;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Catalog text format

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
bool to_number(std::string_view s, T& out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Catalog Catalog::parse(std::string_view text) {
  Catalog cat;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) {
    throw CatalogError("catalog line " + std::to_string(line_no) + ": " + what);
  };

  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const auto raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.starts_with("rule ")) {
      const auto sep = line.find(":=");
      if (sep == std::string_view::npos) fail("expected 'rule <name> := <dsl>'");
      CatalogRule r;
      r.name = std::string(trim(line.substr(5, sep - 5)));
      if (r.name.empty()) fail("empty rule name");
      if (cat.find_rule(r.name)) fail("duplicate rule '" + r.name + "'");
      try {
        r.expr = parse_rule(trim(line.substr(sep + 2)));
      } catch (const RuleError& e) {
        fail("rule '" + r.name + "': " + e.what());
      }
      cat.rules_.push_back(std::move(r));
    } else if (line.starts_with("group ")) {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) fail("expected ':' in group line");
      std::istringstream head{std::string(line.substr(6, colon - 6))};
      RuleGroup g;
      std::string split;
      std::string published;
      head >> g.id >> split;
      if (!head || g.id <= 0) fail("bad group header");
      head >> published;  // optional
      const auto sp = parse_split(split);
      if (!sp) fail("unknown split '" + split + "'");
      g.split = *sp;
      if (!published.empty()) {
        std::size_t n = 0;
        if (!published.starts_with("published=") || !to_number(std::string_view(published).substr(10), n)) {
          fail("bad published count '" + published + "'");
        }
        g.published_feasible = n;
      }
      const auto names = split_on(line.substr(colon + 1), '|');
      if (names.size() != 4) fail("a group needs exactly 4 rules");
      int humans = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        auto name = names[i];
        if (name.starts_with('*')) {
          name = trim(name.substr(1));
          g.human_rule_index = static_cast<int>(i);
          ++humans;
        }
        if (!cat.find_rule(name)) fail("unknown rule '" + std::string(name) + "'");
        g.rules[i] = std::string(name);
      }
      if (humans > 1) fail("more than one human rule");
      for (const auto& other : cat.groups_) {
        if (other.id == g.id) fail("duplicate group " + std::to_string(g.id));
      }
      cat.groups_.push_back(std::move(g));
    } else if (line.starts_with("fixture ")) {
      const auto colon = line.find(':');
      int gid = 0;
      if (colon == std::string_view::npos || !to_number(line.substr(8, colon - 8), gid)) fail("bad fixture line");
      const auto parts = split_on(line.substr(colon + 1), ',');
      Triple t;
      if (parts.size() != 3 || !to_number(parts[0], t.a) || !to_number(parts[1], t.b) ||
          !to_number(parts[2], t.c)) {
        fail("a fixture needs three integers");
      }
      if (!t.in_domain()) fail("fixture outside the domain");
      auto it = std::find_if(cat.groups_.begin(), cat.groups_.end(), [&](const RuleGroup& g) { return g.id == gid; });
      if (it == cat.groups_.end()) fail("fixture for unknown group " + std::to_string(gid));
      it->fixtures.push_back(t);
    } else {
      fail("unrecognised line");
    }
  }
  return cat;
}

const Catalog& Catalog::builtin() {
  static const Catalog cat = parse(asset("catalog.txt"));
  return cat;
}

const CatalogRule* Catalog::find_rule(std::string_view name) const noexcept {
  for (const auto& r : rules_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const CatalogRule& Catalog::rule(std::string_view name) const {
  if (const auto* r = find_rule(name)) return *r;
  throw CatalogError("unknown rule '" + std::string(name) + "'");
}

const RuleGroup& Catalog::group(int id) const {
  for (const auto& g : groups_) {
    if (g.id == id) return g;
  }
  throw CatalogError("unknown rule group " + std::to_string(id));
}

// ---------------------------------------------------------------------------
// Feasible sets

FeasibleSet enumerate_feasible(const Catalog& catalog, const RuleGroup& group) {
  TruthTable all = *truth_table(catalog.rule(group.rules[0]).expr);
  for (std::size_t i = 1; i < group.rules.size(); ++i) all &= *truth_table(catalog.rule(group.rules[i]).expr);
  FeasibleSet fs;
  fs.group_id = group.id;
  fs.members.reserve(all.count());
  for (auto idx = all.first_set(); idx; idx = all.first_set(*idx + 1)) fs.members.push_back(Triple::from_index(*idx));
  return fs;
}

std::vector<Triple> sample_initial_triples(const FeasibleSet& fs, std::size_t n, std::uint64_t seed) {
  return sample_initial_triples(fs, n, seed, static_cast<std::uint64_t>(fs.group_id));
}

std::vector<Triple> sample_initial_triples(const FeasibleSet& fs, std::size_t n, std::uint64_t seed,
                                           std::uint64_t stream) {
  if (n > fs.count()) {
    throw InsufficientFeasible("group " + std::to_string(fs.group_id) + " has " + std::to_string(fs.count()) +
                               " feasible triples, " + std::to_string(n) + " requested");
  }
  Pcg32 rng(seed, stream);
  return sample_without_replacement(fs.members, n, rng);
}

// ---------------------------------------------------------------------------
// Episode JSON

namespace {

nlohmann::json triple_json(const Triple& t) { return nlohmann::json::array({t.a, t.b, t.c}); }

Triple triple_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw CatalogError("expected [a, b, c]");
  return Triple{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

nlohmann::json ids_json(ObjectSet s) { return object_ids(s); }

ObjectSet ids_from(const nlohmann::json& j) {
  ObjectSet s = 0;
  for (const auto& v : j) {
    const int id = v.get<int>();
    if (id < 0 || id >= kMaxObjects) throw CatalogError("object id out of range");
    s |= ObjectSet{1} << id;
  }
  return s;
}

}  // namespace

nlohmann::json to_json(const EpisodeSpec& spec) {
  nlohmann::json j;
  j["episode_id"] = spec.id;
  j["task"] = task_name(spec.task());
  j["split"] = split_name(spec.split);
  j["protocol"] = protocol_name(spec.protocol);
  j["turn_budget"] = spec.turn_budget;
  if (spec.task() == Task::wason) {
    const auto& w = spec.wason();
    j["group"] = w.group_id;
    j["initial"] = triple_json(w.initial);
    j["target"] = {{"name", w.target_name}, {"source", w.target_source}};
  } else {
    const auto& b = spec.blicket();
    j["config"] = b.config;
    j["num_objects"] = b.num_objects;
    j["initial_placement"] = ids_json(b.initial_placement);
    j["initial_on"] = b.initial_on;
    j["target"] = {{"relevant", ids_json(b.target.relevant)}, {"kind", kind_name(b.target.kind)}};
    if (b.target.kind == BlicketKind::at_least) j["target"]["threshold"] = b.target.threshold;
  }
  return j;
}

EpisodeSpec episode_from_json(const nlohmann::json& j) {
  try {
    EpisodeSpec spec;
    spec.id = j.at("episode_id").get<std::string>();
    const auto split = parse_split(j.at("split").get<std::string>());
    const auto protocol = parse_protocol(j.at("protocol").get<std::string>());
    if (!split || !protocol) throw CatalogError("bad split or protocol");
    spec.split = *split;
    spec.protocol = *protocol;
    spec.turn_budget = j.value("turn_budget", kDefaultTurnBudget);
    const auto task = j.at("task").get<std::string>();
    if (task == "wason") {
      WasonSetup w;
      w.group_id = j.at("group").get<int>();
      w.initial = triple_from(j.at("initial"));
      w.target_name = j.at("target").at("name").get<std::string>();
      w.target_source = j.at("target").at("source").get<std::string>();
      spec.setup = w;
    } else if (task == "blicket") {
      BlicketSetup b;
      b.config = j.value("config", "");
      b.num_objects = j.at("num_objects").get<int>();
      if (b.num_objects < 1 || b.num_objects > kMaxObjects) throw CatalogError("num_objects out of range");
      b.initial_placement = ids_from(j.at("initial_placement"));
      b.initial_on = j.at("initial_on").get<bool>();
      const auto kind = parse_kind_name(j.at("target").at("kind").get<std::string>());
      if (!kind) throw CatalogError("unknown blicket rule kind");
      b.target.relevant = ids_from(j.at("target").at("relevant"));
      b.target.kind = *kind;
      b.target.threshold = j.at("target").value("threshold", 0);
      spec.setup = b;
    } else {
      throw CatalogError("unknown task '" + task + "'");
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw CatalogError(std::string("malformed episode record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Dataset builders

namespace {

std::string padded(std::size_t n, int width = 2) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%0*zu", width, n);
  return buf;
}

void add_wason_episodes(const Catalog& catalog, const RuleGroup& g, Split split, const std::vector<Triple>& triples,
                        Protocol protocol, std::vector<EpisodeSpec>& out) {
  for (std::size_t t = 0; t < triples.size(); ++t) {
    for (std::size_t r = 0; r < g.rules.size(); ++r) {
      EpisodeSpec spec;
      spec.id = "wason-" + std::string(split_name(split)) + "-g" + std::to_string(g.id) + "-t" +
                padded(t + 1, triples.size() >= 100 ? 3 : 2) + "-r" + std::to_string(r + 1);
      spec.split = split;
      spec.protocol = protocol;
      const auto& rule = catalog.rule(g.rules[r]);
      spec.setup = WasonSetup{triples[t], rule.name, rule.expr.source(), g.id};
      out.push_back(std::move(spec));
    }
  }
}

}  // namespace

WasonDataset build_wason_dataset(const Catalog& catalog, const WasonDatasetOptions& options) {
  WasonDataset ds;
  for (const auto& g : catalog.groups()) {
    switch (g.split) {
      case Split::train: {
        const auto fs = enumerate_feasible(catalog, g);
        add_wason_episodes(catalog, g, g.split, sample_initial_triples(fs, options.train_triples, options.seed),
                           options.protocol, ds.train);
        break;
      }
      case Split::validation: {
        const auto fs = enumerate_feasible(catalog, g);
        add_wason_episodes(catalog, g, g.split,
                           sample_initial_triples(fs, options.validation_triples, options.seed), options.protocol,
                           ds.validation);
        break;
      }
      case Split::test:
        add_wason_episodes(catalog, g, g.split, g.fixtures, options.protocol, ds.test);
        break;
    }
  }
  return ds;
}

std::vector<EpisodeSpec> build_blicket_dataset(const BlicketDatasetOptions& options) {
  std::vector<EpisodeSpec> out;
  std::uint64_t stream = 0;
  for (int n : {4, 8}) {
    for (int k : {2, 3}) {
      for (auto kind : {BlicketKind::conjunctive, BlicketKind::disjunctive, BlicketKind::exclusive}) {
        const std::string config = "n" + std::to_string(n) + "-k" + std::to_string(k) + "-" +
                                   std::string(kind_label(kind));
        // All (blicket subset, initial placement) pairs, subsets and
        // placements in increasing bitmask order.
        std::vector<std::pair<ObjectSet, ObjectSet>> pairs;
        const ObjectSet end = ObjectSet{1} << n;
        for (ObjectSet subset = 0; subset < end; ++subset) {
          if (object_count(subset) != k) continue;
          for (ObjectSet placement = 0; placement < end; ++placement) pairs.emplace_back(subset, placement);
        }
        Pcg32 rng(options.seed, stream++);
        const auto chosen = sample_without_replacement(pairs, options.per_config, rng);
        for (std::size_t i = 0; i < chosen.size(); ++i) {
          BlicketSetup b;
          b.num_objects = n;
          b.target = BlicketRule{chosen[i].first, kind, 0};
          b.initial_placement = chosen[i].second;
          b.initial_on = eval_blicket(b.target, b.initial_placement);
          b.config = config;
          EpisodeSpec spec;
          spec.id = "blicket-" + config + "-e" + padded(i + 1);
          std::transform(spec.id.begin(), spec.id.end(), spec.id.begin(),
                         [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
          spec.split = Split::test;
          spec.protocol = options.protocol;
          spec.setup = b;
          out.push_back(std::move(spec));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset files

void write_dataset(const std::string& path, const nlohmann::json& header, const std::vector<EpisodeSpec>& episodes) {
  nlohmann::json h = header;
  h["schema"] = kDatasetSchema;
  h["count"] = episodes.size();
  std::string text = h.dump() + "\n";
  for (const auto& e : episodes) text += to_json(e).dump() + "\n";
  write_text_file(path, text);
}

DatasetFile read_dataset(const std::string& path) {
  auto lines = read_jsonl(path);
  if (lines.empty()) throw SchemaMismatch(path + ": empty dataset file");
  check_schema(lines.front(), kDatasetSchema, path);
  DatasetFile ds;
  ds.header = lines.front();
  for (std::size_t i = 1; i < lines.size(); ++i) ds.episodes.push_back(episode_from_json(lines[i]));
  if (ds.header.contains("count") && ds.header["count"].get<std::size_t>() != ds.episodes.size()) {
    throw SchemaMismatch(path + ": header promises " + ds.header["count"].dump() + " episodes, file has " +
                         std::to_string(ds.episodes.size()) + " (partial write?)");
  }
  return ds;
}

std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cbias
