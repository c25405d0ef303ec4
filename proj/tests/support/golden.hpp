#pragma once

// Golden prompt and interaction files under tests/golden. An interaction is a
// sequence of "[model] ..." and "[environment] ..." blocks separated by blank
// lines; model blocks may span several lines.

#include <string>
#include <vector>

#include "cbias/catalog.hpp"

namespace golden {

struct Block {
  bool model{false};
  std::string text;
};

std::string dir();
std::vector<std::string> names();  // "wason_baseline", ...
std::vector<Block> read_interaction(const std::string& name);
std::string read_prompt(const std::string& name);

// The episode the example interaction was recorded against.
cbias::EpisodeSpec spec_for(const std::string& name);

struct Check {
  bool ok{true};
  std::string detail;
};

Check check_prompt(const std::string& name);
// Feeds every model block to a fresh episode and compares each environment
// block with the instruction the engine produced.
Check check_interaction(const std::string& name);

}  // namespace golden
