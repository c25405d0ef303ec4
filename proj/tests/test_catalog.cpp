#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "cbias/catalog.hpp"
#include "cbias/io.hpp"
#include "cbias/truth_table.hpp"
#include "doctest.h"
#include "support/catalog_oracle.hpp"

using namespace cbias;

TEST_CASE("builtin catalog shape") {
  const auto& cat = Catalog::builtin();
  CHECK(cat.rules().size() == 40u);
  REQUIRE(cat.groups().size() == 10u);
  std::map<Split, int> per_split;
  for (const auto& g : cat.groups()) {
    ++per_split[g.split];
    CHECK(g.human_rule_index == 0);
    CHECK(g.published_feasible.has_value());
    CHECK(g.fixtures.size() == (g.split == Split::test ? 5u : 0u));
  }
  CHECK(per_split[Split::train] == 4);
  CHECK(per_split[Split::validation] == 2);
  CHECK(per_split[Split::test] == 4);
  CHECK(cat.group(7).rules[3] == "Descending");
  CHECK_THROWS_AS(cat.group(11), CatalogError);
  CHECK_THROWS_AS(cat.rule("No such rule"), CatalogError);
}

TEST_CASE("every catalog rule matches its native implementation on the whole domain") {
  const auto& rules = oracle::rules();
  REQUIRE(rules.size() == 40u);
  for (const auto& r : Catalog::builtin().rules()) {
    CAPTURE(r.name);
    const auto it = rules.find(r.name);
    REQUIRE(it != rules.end());
    const auto want = oracle::table(it->second);
    const auto got = truth_table(r.expr);
    CHECK(got->words() == want);
  }
}

TEST_CASE("feasible set sizes") {
  // Counted by a separate brute-force enumeration of the native predicates.
  const std::map<int, std::size_t> want = {{1, 1629}, {2, 550},  {3, 10660},  {4, 12529}, {5, 60},
                                           {6, 6762}, {7, 120},  {8, 176715}, {9, 2925},  {10, 118}};
  const auto& cat = Catalog::builtin();
  for (const auto& g : cat.groups()) {
    CAPTURE(g.id);
    const auto fs = enumerate_feasible(cat, g);
    CHECK(fs.count() == want.at(g.id));
    CHECK(std::is_sorted(fs.members.begin(), fs.members.end()));
  }
}

TEST_CASE("fixtures satisfy all rules of their group") {
  const auto& cat = Catalog::builtin();
  for (const auto& g : cat.groups()) {
    for (const auto& t : g.fixtures) {
      for (const auto& name : g.rules) {
        CAPTURE(name);
        CAPTURE(to_string(t));
        CHECK(eval_rule(cat.rule(name).expr, t));
        CHECK(oracle::rules().at(name)(t.a, t.b, t.c));
      }
    }
  }
}

TEST_CASE("catalog parse errors name the line") {
  const std::string good = "rule R1 := a > 0\nrule R2 := b > 0\nrule R3 := c > 0\nrule R4 := a > b\n";
  CHECK(Catalog::parse(good + "group 1 train : R1 | R2 | R3 | R4\n").groups().size() == 1u);
  CHECK_THROWS_WITH_AS(Catalog::parse(good + "group 1 train : R1 | R2 | R3 | R5\n"),
                       doctest::Contains("line 5"), CatalogError);
  CHECK_THROWS_WITH_AS(Catalog::parse("rule X := a >\n"), doctest::Contains("line 1"), CatalogError);
  CHECK_THROWS_AS(Catalog::parse(good + "group 1 train : R1 | R2 | R3\n"), CatalogError);
  CHECK_THROWS_AS(Catalog::parse(good + "group 1 holiday : R1 | R2 | R3 | R4\n"), CatalogError);
  CHECK_THROWS_AS(Catalog::parse(good + "fixture 3 : 1, 2, 3\n"), CatalogError);
  CHECK_THROWS_AS(Catalog::parse("what is this\n"), CatalogError);
  CHECK_THROWS_AS(Catalog::parse("rule A := a > 0\nrule A := a > 1\n"), CatalogError);
}

TEST_CASE("initial triple sampling") {
  const auto& cat = Catalog::builtin();
  const auto fs = enumerate_feasible(cat, cat.group(5));
  const auto s1 = sample_initial_triples(fs, 20, 1337);
  CHECK(s1 == sample_initial_triples(fs, 20, 1337));
  CHECK(s1 != sample_initial_triples(fs, 20, 1338));
  CHECK(std::set<Triple>(s1.begin(), s1.end()).size() == 20u);
  CHECK_THROWS_AS(sample_initial_triples(fs, 61, 1337), InsufficientFeasible);
  CHECK(sample_initial_triples(fs, 60, 1337).size() == 60u);
}

TEST_CASE("wason dataset") {
  const auto& cat = Catalog::builtin();
  const auto ds = build_wason_dataset(cat);
  CHECK(ds.train.size() == 1600u);
  CHECK(ds.validation.size() == 16u);
  CHECK(ds.test.size() == 80u);

  std::set<std::string> ids;
  for (const auto* split : {&ds.train, &ds.validation, &ds.test}) {
    for (const auto& e : *split) {
      ids.insert(e.id);
      const auto& w = e.wason();
      const auto& g = cat.group(w.group_id);
      CHECK(e.split == g.split);
      CHECK(e.turn_budget == 45);
      for (const auto& name : g.rules) CHECK(eval_rule(cat.rule(name).expr, w.initial));
    }
  }
  CHECK(ids.size() == 1696u);
  CHECK(ds.test.front().id == "wason-test-g7-t01-r1");
  CHECK(ds.train.front().id == "wason-train-g1-t001-r1");
  CHECK(ds.test.front().wason().target_name == "All end with 1");

  const auto again = build_wason_dataset(cat);
  for (std::size_t i = 0; i < ds.train.size(); i += 97) CHECK(to_json(ds.train[i]) == to_json(again.train[i]));
}

TEST_CASE("blicket dataset") {
  const auto eps = build_blicket_dataset();
  REQUIRE(eps.size() == 192u);
  std::map<std::string, std::set<std::pair<ObjectSet, ObjectSet>>> per_config;
  for (const auto& e : eps) {
    const auto& b = e.blicket();
    CHECK(b.initial_on == eval_blicket(b.target, b.initial_placement));
    CHECK(object_count(b.target.relevant) == (b.config.find("-k2-") != std::string::npos ? 2 : 3));
    per_config[b.config].insert({b.target.relevant, b.initial_placement});
  }
  CHECK(per_config.size() == 12u);
  for (const auto& [config, pairs] : per_config) {
    CAPTURE(config);
    CHECK(pairs.size() == 16u);
  }
  CHECK(eps.front().id == "blicket-n4-k2-and-e01");
}

TEST_CASE("episode json round trip and dataset files") {
  const auto& cat = Catalog::builtin();
  auto eps = build_wason_dataset(cat).test;
  const auto blicket = build_blicket_dataset();
  eps.insert(eps.end(), blicket.begin(), blicket.begin() + 5);
  for (const auto& e : eps) CHECK(to_json(episode_from_json(to_json(e))) == to_json(e));

  const auto dir = std::filesystem::temp_directory_path() / "cbias_dataset_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "ds.jsonl").string();
  write_dataset(path, {{"note", "x"}}, eps);
  const auto back = read_dataset(path);
  REQUIRE(back.episodes.size() == eps.size());
  CHECK(back.header["note"] == "x");
  CHECK(to_json(back.episodes.back()) == to_json(eps.back()));

  write_text_file(dir / "bad.jsonl", "{\"schema\":\"cbias.dataset/0\"}\n");
  CHECK_THROWS(read_dataset((dir / "bad.jsonl").string()));
  CHECK_THROWS_AS(read_dataset((dir / "missing.jsonl").string()), MissingInput);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config hash") {
  const auto h = config_hash({{"a", 1}, {"b", "x"}});
  CHECK(h.size() == 16u);
  CHECK(h == config_hash({{"b", "x"}, {"a", 1}}));
  CHECK(h != config_hash({{"a", 2}, {"b", "x"}}));
  // FNV-1a 64 of "{}".
  CHECK(config_hash(nlohmann::json::object()) == "08f44b07b5901a25");
}
