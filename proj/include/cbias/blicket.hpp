#pragma once

// Blicket detector rules over small sets of numbered objects.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cbias {

// Bit i set <=> "object i" is in the set.
using ObjectSet = std::uint32_t;

inline constexpr int kMaxObjects = 16;

enum class BlicketKind : std::uint8_t {
  conjunctive,  // every relevant object present
  disjunctive,  // at least one relevant object present
  exclusive,    // exactly one relevant object present ("xor")
  at_least,     // at least `threshold` relevant objects present (announced hypotheses only)
};

struct BlicketRule {
  ObjectSet relevant{0};
  BlicketKind kind{BlicketKind::conjunctive};
  int threshold{0};  // used by at_least

  friend bool operator==(const BlicketRule&, const BlicketRule&) = default;
};

bool eval_blicket(const BlicketRule& rule, ObjectSet placed) noexcept;

// True when both rules light the device on exactly the same placements of
// objects 0..num_objects-1.
bool blicket_equivalent(const BlicketRule& x, const BlicketRule& y, int num_objects) noexcept;

std::string_view kind_name(BlicketKind kind);  // "conjunctive", "disjunctive", "xor", "at_least"
std::optional<BlicketKind> parse_kind_name(std::string_view name);
// "AND" / "OR" / "XOR" as used for dataset configurations.
std::string_view kind_label(BlicketKind kind);

int object_count(ObjectSet s) noexcept;
std::vector<int> object_ids(ObjectSet s);

// "[object 0, object 2]"; "[]" for the empty set.
std::string format_objects(ObjectSet s);

class ObjectListError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses the inside of "[object 0, object 2]" (brackets excluded). Whitespace
// is flexible; every id must be below num_objects; duplicates are rejected.
ObjectSet parse_object_list(std::string_view body, int num_objects);

// Maps a free-text rule description ("both of these objects must be on the
// device", "exactly one", "at least two of these", ...) to a kind. Returns
// nullopt when no phrase is recognised.
struct RecognisedKind {
  BlicketKind kind;
  int threshold{0};
};
std::optional<RecognisedKind> recognise_kind(std::string_view description);

// Full hypothesis from "relevant=[...]; rule=<text>".
struct BlicketHypothesis {
  ObjectSet relevant{0};
  std::string rule_text;
};
std::optional<BlicketHypothesis> parse_blicket_hypothesis(std::string_view text, int num_objects);
std::optional<BlicketRule> to_blicket_rule(const BlicketHypothesis& h);

// "relevant=[object 0, object 1]; rule=conjunctive"
std::string format_blicket_hypothesis(const BlicketRule& rule);

}  // namespace cbias
