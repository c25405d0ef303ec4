#pragma once

// Rule language for predicates over integer triples.
//
// Grammar reference: docs/grammar.md (version kGrammarVersion). Sources are
// parsed into an immutable RuleExpr that can be evaluated from any thread.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cbias {

inline constexpr std::string_view kGrammarVersion = "cbias-rule-dsl/1";

inline constexpr int kDomainMin = -99;
inline constexpr int kDomainMax = 100;
inline constexpr int kDomainWidth = kDomainMax - kDomainMin + 1;
inline constexpr std::size_t kDomainSize =
    static_cast<std::size_t>(kDomainWidth) * kDomainWidth * kDomainWidth;

struct Triple {
  int a{0};
  int b{0};
  int c{0};

  friend auto operator<=>(const Triple&, const Triple&) = default;

  bool in_domain() const noexcept;
  // Rank in lexicographic (a, b, c) order over the domain.
  std::size_t index() const noexcept;
  static Triple from_index(std::size_t index) noexcept;
};

// "[a, b, c]"
std::string to_string(const Triple& t);

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public RuleError {
 public:
  SyntaxError(std::size_t offset, std::string found, std::vector<std::string> expected);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& found() const noexcept { return found_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string found_;
  std::vector<std::string> expected_;
};

class UnknownIdentifier : public RuleError {
 public:
  UnknownIdentifier(std::size_t offset, std::string name);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::size_t offset_;
  std::string name_;
};

// Boolean used where an integer is required or the reverse, e.g. "a and 1".
class RuleTypeError : public RuleError {
 public:
  RuleTypeError(std::size_t offset, const std::string& what);

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Division or modulo by zero (or integer overflow) reached at evaluation time.
class EvalGuardError : public RuleError {
 public:
  explicit EvalGuardError(const std::string& what, std::optional<Triple> at = std::nullopt);

  const std::optional<Triple>& at() const noexcept { return at_; }

 private:
  std::optional<Triple> at_;
};

enum class NodeKind : std::uint8_t {
  Literal,
  Variable,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Not,
  InSet,
  Abs,
  LastDigit,
  IsPrime,
  IsCube,
  DistinctCount,
  Min,
  Max,
};

enum class ValueType : std::uint8_t { Int, Bool };

struct Node {
  NodeKind kind{NodeKind::Literal};
  ValueType type{ValueType::Int};
  std::int64_t value{0};             // literal value, or variable slot (0=a, 1=b, 2=c)
  std::vector<std::uint32_t> args;   // child node indices
  std::vector<std::int64_t> members; // InSet literal members, sorted and unique
  std::uint32_t offset{0};           // byte offset in the source

  // Offsets are ignored so that spacing does not affect rule equality.
  friend bool operator==(const Node& x, const Node& y) noexcept {
    return x.kind == y.kind && x.type == y.type && x.value == y.value && x.args == y.args && x.members == y.members;
  }
};

class RuleExpr {
 public:
  RuleExpr() = default;

  const std::string& source() const noexcept { return source_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::uint32_t root() const noexcept { return root_; }

  // True when some division or modulo has a divisor that is neither a
  // nonzero literal nor guarded by a preceding "<divisor> != 0" conjunct.
  bool partial() const noexcept { return partial_; }

  // Deterministic, fully parenthesised rendering that parses back to an
  // extensionally identical rule.
  std::string canonical() const;

  // Structural equality of the AST; the original text is not compared.
  friend bool operator==(const RuleExpr& lhs, const RuleExpr& rhs) noexcept {
    return lhs.root_ == rhs.root_ && lhs.nodes_ == rhs.nodes_;
  }

 private:
  friend RuleExpr parse_rule(std::string_view text);

  std::string source_;
  std::vector<Node> nodes_;
  std::uint32_t root_{0};
  bool partial_{false};
};

RuleExpr parse_rule(std::string_view text);

// Scalar evaluation of one triple.
bool eval_rule(const RuleExpr& rule, const Triple& x);

// Evaluates every c in the domain for fixed (a, b); out[i] is the value at
// c = kDomainMin + i. Agrees with eval_rule lane by lane, including which
// triple raises EvalGuardError first.
void eval_row(const RuleExpr& rule, int a, int b, std::span<std::uint8_t, kDomainWidth> out);

struct Equivalence {
  bool equivalent{true};
  std::optional<Triple> witness;  // lexicographically smallest disagreement
};

// Exhaustive comparison over the whole domain. Rows are partitioned across
// `workers` threads; the reported witness does not depend on the split.
Equivalence rules_equivalent(const RuleExpr& lhs, const RuleExpr& rhs, unsigned workers = 1);

// Number-theoretic helpers with the DSL's fixed semantics.
std::int64_t euclid_mod(std::int64_t n, std::int64_t m);
std::int64_t euclid_div(std::int64_t n, std::int64_t m);
bool is_prime(std::int64_t n);
bool is_cube(std::int64_t n);

}  // namespace cbias
