#include "cbias/blicket.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <regex>
#include <sstream>

namespace cbias {

bool eval_blicket(const BlicketRule& rule, ObjectSet placed) noexcept {
  const int present = std::popcount(rule.relevant & placed);
  switch (rule.kind) {
    case BlicketKind::conjunctive: return (rule.relevant & placed) == rule.relevant;
    case BlicketKind::disjunctive: return present >= 1;
    case BlicketKind::exclusive: return present == 1;
    case BlicketKind::at_least: return present >= rule.threshold;
  }
  return false;
}

bool blicket_equivalent(const BlicketRule& x, const BlicketRule& y, int num_objects) noexcept {
  const ObjectSet end = ObjectSet{1} << num_objects;
  for (ObjectSet s = 0; s < end; ++s) {
    if (eval_blicket(x, s) != eval_blicket(y, s)) return false;
  }
  return true;
}

std::string_view kind_name(BlicketKind kind) {
  switch (kind) {
    case BlicketKind::conjunctive: return "conjunctive";
    case BlicketKind::disjunctive: return "disjunctive";
    case BlicketKind::exclusive: return "xor";
    case BlicketKind::at_least: return "at_least";
  }
  return "?";
}

std::optional<BlicketKind> parse_kind_name(std::string_view name) {
  for (auto k : {BlicketKind::conjunctive, BlicketKind::disjunctive, BlicketKind::exclusive, BlicketKind::at_least}) {
    if (kind_name(k) == name || kind_label(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view kind_label(BlicketKind kind) {
  switch (kind) {
    case BlicketKind::conjunctive: return "AND";
    case BlicketKind::disjunctive: return "OR";
    case BlicketKind::exclusive: return "XOR";
    case BlicketKind::at_least: return "AT_LEAST";
  }
  return "?";
}

int object_count(ObjectSet s) noexcept { return std::popcount(s); }

std::vector<int> object_ids(ObjectSet s) {
  std::vector<int> ids;
  for (int i = 0; i < kMaxObjects; ++i) {
    if (s & (ObjectSet{1} << i)) ids.push_back(i);
  }
  return ids;
}

std::string format_objects(ObjectSet s) {
  std::string out = "[";
  bool first = true;
  for (int id : object_ids(s)) {
    if (!first) out += ", ";
    first = false;
    out += "object " + std::to_string(id);
  }
  return out + "]";
}

ObjectSet parse_object_list(std::string_view body, int num_objects) {
  static const std::regex item(R"(^\s*object\s+(\d+)\s*$)", std::regex::icase);
  ObjectSet out = 0;
  std::string text(body);
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) return 0;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::smatch m;
    if (!std::regex_match(part, m, item)) throw ObjectListError("not an object name: '" + part + "'");
    if (m[1].length() > 3) throw ObjectListError("object id out of range: " + m[1].str());
    const int id = std::stoi(m[1].str());
    if (id >= num_objects) throw ObjectListError("object id out of range: " + std::to_string(id));
    const ObjectSet bit = ObjectSet{1} << id;
    if (out & bit) throw ObjectListError("object listed twice: " + std::to_string(id));
    out |= bit;
  }
  if (!text.empty() && text.back() == ',') throw ObjectListError("trailing comma");
  return out;
}

namespace {

std::string lower_words(std::string_view text) {
  std::string out;
  bool space = true;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      out += static_cast<char>(std::tolower(c));
      space = false;
    } else if (!space) {
      out += ' ';
      space = true;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return " " + out + " ";
}

bool has(const std::string& hay, std::string_view phrase) {
  return hay.find(" " + std::string(phrase) + " ") != std::string::npos;
}

std::optional<int> number_word(std::string_view w) {
  static constexpr std::array<std::string_view, 9> words = {"one", "two",   "three", "four", "five",
                                                              "six", "seven", "eight", "nine"};
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (w == words[i]) return static_cast<int>(i) + 1;
  }
  if (!w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); }) &&
      w.size() < 3) {
    return std::stoi(std::string(w));
  }
  return std::nullopt;
}

}  // namespace

std::optional<RecognisedKind> recognise_kind(std::string_view description) {
  const std::string s = lower_words(description);

  for (auto p : {"xor", "exactly one", "one and only one", "only one", "but not both", "exclusive or", "exclusive"}) {
    if (has(s, p)) return RecognisedKind{BlicketKind::exclusive, 0};
  }
  for (auto lead : {"at least ", "two or more", "three or more"}) {
    const auto pos = s.find(std::string(" ") + lead);
    if (pos == std::string::npos) continue;
    if (std::string_view(lead) == "two or more") return RecognisedKind{BlicketKind::at_least, 2};
    if (std::string_view(lead) == "three or more") return RecognisedKind{BlicketKind::at_least, 3};
    const auto start = pos + 1 + std::string_view(lead).size();
    const auto end = s.find(' ', start);
    if (auto n = number_word(s.substr(start, end - start))) {
      if (*n == 1) return RecognisedKind{BlicketKind::disjunctive, 0};
      return RecognisedKind{BlicketKind::at_least, *n};
    }
  }
  for (auto p : {"disjunctive", "or", "any", "either", "any one", "at least one"}) {
    if (has(s, p)) return RecognisedKind{BlicketKind::disjunctive, 0};
  }
  for (auto p : {"conjunctive", "and", "all", "both", "together", "every", "each"}) {
    if (has(s, p)) return RecognisedKind{BlicketKind::conjunctive, 0};
  }
  return std::nullopt;
}

std::optional<BlicketHypothesis> parse_blicket_hypothesis(std::string_view text, int num_objects) {
  static const std::regex form(R"(^\s*relevant\s*=\s*\[([^\]]*)\]\s*;\s*rule\s*=\s*(.*\S)\s*$)", std::regex::icase);
  std::string flat(text);
  std::replace_if(flat.begin(), flat.end(), [](unsigned char c) { return std::isspace(c); }, ' ');
  std::smatch m;
  if (!std::regex_match(flat, m, form)) return std::nullopt;
  try {
    BlicketHypothesis h;
    h.relevant = parse_object_list(m[1].str(), num_objects);
    std::string rule = m[2].str();
    // Collapse runs of spaces left by line breaks.
    std::string collapsed;
    for (char c : rule) {
      if (c == ' ' && !collapsed.empty() && collapsed.back() == ' ') continue;
      collapsed += c;
    }
    h.rule_text = collapsed;
    return h;
  } catch (const ObjectListError&) {
    return std::nullopt;
  }
}

std::optional<BlicketRule> to_blicket_rule(const BlicketHypothesis& h) {
  const auto kind = recognise_kind(h.rule_text);
  if (!kind) return std::nullopt;
  return BlicketRule{h.relevant, kind->kind, kind->threshold};
}

std::string format_blicket_hypothesis(const BlicketRule& rule) {
  std::string kind;
  if (rule.kind == BlicketKind::at_least) {
    kind = "at least " + std::to_string(rule.threshold);
  } else {
    kind = std::string(kind_name(rule.kind));
  }
  return "relevant=" + format_objects(rule.relevant) + "; rule=" + kind;
}

}  // namespace cbias
