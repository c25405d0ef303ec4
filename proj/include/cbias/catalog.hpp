#pragma once

// Published rule catalog, feasible sets and episode datasets.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cbias/blicket.hpp"
#include "cbias/rule_dsl.hpp"
#include "json.hpp"

namespace cbias {

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Split : std::uint8_t { train, validation, test };
std::string_view split_name(Split s);
std::optional<Split> parse_split(std::string_view name);

struct CatalogRule {
  std::string name;
  RuleExpr expr;
};

struct RuleGroup {
  int id{0};
  Split split{Split::train};
  std::array<std::string, 4> rules;
  int human_rule_index{0};
  std::optional<std::size_t> published_feasible;
  std::vector<Triple> fixtures;
};

class Catalog {
 public:
  // Parses the text format of assets/catalog.txt. Throws CatalogError with a
  // line number on malformed input, unknown rule names or bad DSL.
  static Catalog parse(std::string_view text);
  // The catalog compiled into the library.
  static const Catalog& builtin();

  const std::vector<CatalogRule>& rules() const noexcept { return rules_; }
  const std::vector<RuleGroup>& groups() const noexcept { return groups_; }

  const CatalogRule* find_rule(std::string_view name) const noexcept;
  const CatalogRule& rule(std::string_view name) const;  // throws CatalogError
  const RuleGroup& group(int id) const;                   // throws CatalogError

 private:
  std::vector<CatalogRule> rules_;
  std::vector<RuleGroup> groups_;
};

struct FeasibleSet {
  int group_id{0};
  std::vector<Triple> members;  // lexicographic (a, b, c)

  std::size_t count() const noexcept { return members.size(); }
};

FeasibleSet enumerate_feasible(const Catalog& catalog, const RuleGroup& group);

class InsufficientFeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform sample without replacement. The PCG stream defaults to the group id
// so groups draw independent sequences from one seed.
std::vector<Triple> sample_initial_triples(const FeasibleSet& fs, std::size_t n, std::uint64_t seed);
std::vector<Triple> sample_initial_triples(const FeasibleSet& fs, std::size_t n, std::uint64_t seed,
                                           std::uint64_t stream);

// ---------------------------------------------------------------------------
// Episodes

enum class Task : std::uint8_t { wason, blicket };
enum class Protocol : std::uint8_t { baseline, dual_goal, think_in_opposites };

std::string_view task_name(Task t);
std::string_view protocol_name(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

inline constexpr int kDefaultTurnBudget = 45;
inline constexpr std::uint64_t kDefaultSeed = 1337;

struct WasonSetup {
  Triple initial;
  std::string target_name;
  std::string target_source;
  int group_id{0};
};

struct BlicketSetup {
  int num_objects{4};
  ObjectSet initial_placement{0};
  bool initial_on{false};
  BlicketRule target;
  std::string config;  // e.g. "n4-k2-AND"
};

struct EpisodeSpec {
  std::string id;
  Split split{Split::test};
  Protocol protocol{Protocol::baseline};
  int turn_budget{kDefaultTurnBudget};
  std::variant<WasonSetup, BlicketSetup> setup;

  Task task() const noexcept { return std::holds_alternative<WasonSetup>(setup) ? Task::wason : Task::blicket; }
  const WasonSetup& wason() const { return std::get<WasonSetup>(setup); }
  const BlicketSetup& blicket() const { return std::get<BlicketSetup>(setup); }
};

nlohmann::json to_json(const EpisodeSpec& spec);
EpisodeSpec episode_from_json(const nlohmann::json& j);  // throws CatalogError

struct WasonDataset {
  std::vector<EpisodeSpec> train;
  std::vector<EpisodeSpec> validation;
  std::vector<EpisodeSpec> test;
};

struct WasonDatasetOptions {
  std::uint64_t seed{kDefaultSeed};
  std::size_t train_triples{100};
  std::size_t validation_triples{2};
  Protocol protocol{Protocol::baseline};
};

// Train and validation triples are sampled from each group's feasible set;
// test triples are the catalog fixtures. Each triple yields one episode per
// group rule.
WasonDataset build_wason_dataset(const Catalog& catalog, const WasonDatasetOptions& options = {});

struct BlicketDatasetOptions {
  std::uint64_t seed{kDefaultSeed};
  std::size_t per_config{16};
  Protocol protocol{Protocol::baseline};
};

std::vector<EpisodeSpec> build_blicket_dataset(const BlicketDatasetOptions& options = {});

// ---------------------------------------------------------------------------
// Dataset files: a header line followed by one episode per line.

inline constexpr std::string_view kDatasetSchema = "cbias.dataset/1";

struct DatasetFile {
  nlohmann::json header;
  std::vector<EpisodeSpec> episodes;
};

void write_dataset(const std::string& path, const nlohmann::json& header, const std::vector<EpisodeSpec>& episodes);
DatasetFile read_dataset(const std::string& path);  // throws CatalogError

// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

}  // namespace cbias
