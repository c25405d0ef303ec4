#include "cbias/rule_dsl.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

namespace cbias {

// ---------------------------------------------------------------------------
// Triple

bool Triple::in_domain() const noexcept {
  auto ok = [](int v) { return v >= kDomainMin && v <= kDomainMax; };
  return ok(a) && ok(b) && ok(c);
}

std::size_t Triple::index() const noexcept {
  const auto w = static_cast<std::size_t>(kDomainWidth);
  return (static_cast<std::size_t>(a - kDomainMin) * w + static_cast<std::size_t>(b - kDomainMin)) * w +
         static_cast<std::size_t>(c - kDomainMin);
}

Triple Triple::from_index(std::size_t index) noexcept {
  const auto w = static_cast<std::size_t>(kDomainWidth);
  Triple t;
  t.c = static_cast<int>(index % w) + kDomainMin;
  index /= w;
  t.b = static_cast<int>(index % w) + kDomainMin;
  t.a = static_cast<int>(index / w) + kDomainMin;
  return t;
}

std::string to_string(const Triple& t) {
  std::ostringstream out;
  out << '[' << t.a << ", " << t.b << ", " << t.c << ']';
  return out.str();
}

// ---------------------------------------------------------------------------
// Errors

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::string found, std::vector<std::string> expected)
    : RuleError("syntax error at byte " + std::to_string(offset) + ": found " + found + ", expected one of {" +
                join(expected, ", ") + "}"),
      offset_(offset),
      found_(std::move(found)),
      expected_(std::move(expected)) {}

UnknownIdentifier::UnknownIdentifier(std::size_t offset, std::string name)
    : RuleError("unknown identifier '" + name + "' at byte " + std::to_string(offset)),
      offset_(offset),
      name_(std::move(name)) {}

RuleTypeError::RuleTypeError(std::size_t offset, const std::string& what)
    : RuleError("type error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

EvalGuardError::EvalGuardError(const std::string& what, std::optional<Triple> at)
    : RuleError(at ? what + " at " + to_string(*at) : what), at_(at) {}

// ---------------------------------------------------------------------------
// Number theory

std::int64_t euclid_mod(std::int64_t n, std::int64_t m) {
  if (m == 0) throw EvalGuardError("modulo by zero");
  const __int128 mm = m < 0 ? -static_cast<__int128>(m) : static_cast<__int128>(m);
  __int128 r = static_cast<__int128>(n) % mm;
  if (r < 0) r += mm;
  return static_cast<std::int64_t>(r);
}

std::int64_t euclid_div(std::int64_t n, std::int64_t m) {
  if (m == 0) throw EvalGuardError("division by zero");
  const __int128 r = euclid_mod(n, m);
  const __int128 q = (static_cast<__int128>(n) - r) / static_cast<__int128>(m);
  if (q > std::numeric_limits<std::int64_t>::max() || q < std::numeric_limits<std::int64_t>::min()) {
    throw EvalGuardError("integer overflow");
  }
  return static_cast<std::int64_t>(q);
}

namespace {

constexpr std::int64_t kSieveLimit = 1 << 21;

const std::vector<bool>& prime_sieve() {
  static const std::vector<bool> sieve = [] {
    std::vector<bool> s(static_cast<std::size_t>(kSieveLimit), true);
    s[0] = false;
    s[1] = false;
    for (std::int64_t i = 2; i * i < kSieveLimit; ++i) {
      if (!s[static_cast<std::size_t>(i)]) continue;
      for (std::int64_t j = i * i; j < kSieveLimit; j += i) s[static_cast<std::size_t>(j)] = false;
    }
    return s;
  }();
  return sieve;
}

}  // namespace

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  if (n < kSieveLimit) return prime_sieve()[static_cast<std::size_t>(n)];
  if (n % 2 == 0) return false;
  for (std::int64_t d = 3; d <= n / d; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

bool is_cube(std::int64_t n) {
  const auto guess = static_cast<std::int64_t>(std::llround(std::cbrt(static_cast<double>(n))));
  for (std::int64_t k = guess - 1; k <= guess + 1; ++k) {
    const __int128 cube = static_cast<__int128>(k) * k * k;
    if (cube == n) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { Int, Ident, Punct, End };

struct Token {
  Tok kind{Tok::End};
  std::string text;
  std::int64_t value{0};
  std::size_t offset{0};
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End:
      return "end of input";
    case Tok::Int:
      return "integer " + t.text;
    case Tok::Ident:
      return "'" + t.text + "'";
    case Tok::Punct:
      return "'" + t.text + "'";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view src) {
  static constexpr std::array<std::string_view, 8> kTwoChar = {"==", "!=", "<=", ">=", "//", "&&", "||", "**"};
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char ch = src[i];
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      ++i;
      continue;
    }
    Token tok;
    tok.offset = i;
    if (ch >= '0' && ch <= '9') {
      std::size_t j = i;
      while (j < src.size() && src[j] >= '0' && src[j] <= '9') ++j;
      tok.kind = Tok::Int;
      tok.text = std::string(src.substr(i, j - i));
      auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, tok.value);
      if (ec != std::errc{}) {
        throw SyntaxError(i, "integer literal " + tok.text + " (out of range)", {"integer in 64-bit range"});
      }
      i = j;
    } else if ((ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_') {
      std::size_t j = i;
      while (j < src.size() && ((src[j] >= 'a' && src[j] <= 'z') || (src[j] >= 'A' && src[j] <= 'Z') ||
                                (src[j] >= '0' && src[j] <= '9') || src[j] == '_')) {
        ++j;
      }
      tok.kind = Tok::Ident;
      tok.text = std::string(src.substr(i, j - i));
      i = j;
    } else {
      tok.kind = Tok::Punct;
      const auto two = src.substr(i, 2);
      if (std::find(kTwoChar.begin(), kTwoChar.end(), two) != kTwoChar.end()) {
        tok.text = std::string(two);
        i += 2;
      } else if (std::string_view("+-*%<>(){},").find(ch) != std::string_view::npos) {
        tok.text = std::string(1, ch);
        ++i;
      } else {
        throw SyntaxError(i, "character '" + std::string(1, ch) + "'",
                          {"integer", "identifier", "operator", "'('", "')'", "'{'", "'}'", "','"});
      }
      if (tok.text == "&&" || tok.text == "||" || tok.text == "**") {
        // Tokenised only so the error names the operator precisely.
        throw SyntaxError(tok.offset, "'" + tok.text + "'",
                          {tok.text == "&&" ? "'and'" : tok.text == "||" ? "'or'" : "'*'"});
      }
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.offset = src.size();
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

struct Builtin {
  std::string_view name;
  NodeKind kind;
  std::size_t min_args;
  std::size_t max_args;
  ValueType result;
};

constexpr std::array<Builtin, 7> kBuiltins = {{
    {"abs", NodeKind::Abs, 1, 1, ValueType::Int},
    {"last_digit", NodeKind::LastDigit, 1, 1, ValueType::Int},
    {"is_prime", NodeKind::IsPrime, 1, 1, ValueType::Bool},
    {"is_cube", NodeKind::IsCube, 1, 1, ValueType::Bool},
    {"distinct_count", NodeKind::DistinctCount, 1, 8, ValueType::Int},
    {"min", NodeKind::Min, 1, 8, ValueType::Int},
    {"max", NodeKind::Max, 1, 8, ValueType::Int},
}};

const Builtin* find_builtin(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

bool is_keyword(std::string_view s) {
  return s == "and" || s == "or" || s == "not" || s == "in" || s == "true" || s == "false";
}

const std::vector<std::string> kOperandStart = {"integer", "'a'", "'b'", "'c'", "builtin call", "'('",
                                                "'-'",     "'not'", "'true'", "'false'"};

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

  std::uint32_t parse_root(std::vector<Node>& nodes) {
    nodes_ = &nodes;
    const auto root = parse_or();
    if (peek().kind != Tok::End) {
      throw SyntaxError(peek().offset, describe(peek()),
                        {"'and'", "'or'", "comparison operator", "arithmetic operator", "end of input"});
    }
    if (type_of(root) != ValueType::Bool) {
      throw RuleTypeError(nodes[root].offset, "a rule must be a boolean expression");
    }
    return root;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  const Token& next() { return tokens_[pos_++]; }
  bool at_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
  bool at_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) throw SyntaxError(peek().offset, describe(peek()), {"'" + std::string(p) + "'"});
    ++pos_;
  }

  ValueType type_of(std::uint32_t idx) const { return (*nodes_)[idx].type; }

  std::uint32_t add(Node n) {
    nodes_->push_back(std::move(n));
    return static_cast<std::uint32_t>(nodes_->size() - 1);
  }

  std::uint32_t make(NodeKind kind, ValueType type, std::vector<std::uint32_t> args, std::size_t offset) {
    Node n;
    n.kind = kind;
    n.type = type;
    n.args = std::move(args);
    n.offset = static_cast<std::uint32_t>(offset);
    return add(std::move(n));
  }

  void require_bool(std::uint32_t idx, std::string_view op) const {
    if (type_of(idx) != ValueType::Bool) {
      throw RuleTypeError((*nodes_)[idx].offset, "operand of '" + std::string(op) + "' must be boolean");
    }
  }

  std::uint32_t parse_or() {
    auto lhs = parse_and();
    while (at_word("or")) {
      const auto off = next().offset;
      auto rhs = parse_and();
      require_bool(lhs, "or");
      require_bool(rhs, "or");
      lhs = make(NodeKind::Or, ValueType::Bool, {lhs, rhs}, off);
    }
    return lhs;
  }

  std::uint32_t parse_and() {
    auto lhs = parse_not();
    while (at_word("and")) {
      const auto off = next().offset;
      auto rhs = parse_not();
      require_bool(lhs, "and");
      require_bool(rhs, "and");
      lhs = make(NodeKind::And, ValueType::Bool, {lhs, rhs}, off);
    }
    return lhs;
  }

  std::uint32_t parse_not() {
    if (at_word("not")) {
      const auto off = next().offset;
      auto operand = parse_not();
      require_bool(operand, "not");
      return make(NodeKind::Not, ValueType::Bool, {operand}, off);
    }
    return parse_comparison();
  }

  static std::optional<NodeKind> comparison_kind(const Token& t) {
    if (t.kind != Tok::Punct) return std::nullopt;
    if (t.text == "==") return NodeKind::Eq;
    if (t.text == "!=") return NodeKind::Ne;
    if (t.text == "<") return NodeKind::Lt;
    if (t.text == "<=") return NodeKind::Le;
    if (t.text == ">") return NodeKind::Gt;
    if (t.text == ">=") return NodeKind::Ge;
    return std::nullopt;
  }

  std::uint32_t parse_comparison() {
    const auto first = parse_arith();
    if (at_word("in")) {
      const auto off = next().offset;
      expect_punct("{");
      std::vector<std::int64_t> members;
      while (true) {
        bool negative = false;
        if (at_punct("-")) {
          ++pos_;
          negative = true;
        }
        if (peek().kind != Tok::Int) throw SyntaxError(peek().offset, describe(peek()), {"integer"});
        const auto v = next().value;
        members.push_back(negative ? -v : v);
        if (at_punct(",")) {
          ++pos_;
          continue;
        }
        if (at_punct("}")) {
          ++pos_;
          break;
        }
        throw SyntaxError(peek().offset, describe(peek()), {"','", "'}'"});
      }
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      Node n;
      n.kind = NodeKind::InSet;
      n.type = ValueType::Bool;
      n.args = {first};
      n.members = std::move(members);
      n.offset = static_cast<std::uint32_t>(off);
      return add(std::move(n));
    }

    // Chains desugar Python-style: x < y <= z  ==>  (x < y) and (y <= z).
    std::uint32_t result = first;
    std::uint32_t left = first;
    bool have = false;
    while (auto kind = comparison_kind(peek())) {
      const auto off = next().offset;
      const auto right = parse_arith();
      const auto cmp = make(*kind, ValueType::Bool, {left, right}, off);
      result = have ? make(NodeKind::And, ValueType::Bool, {result, cmp}, off) : cmp;
      have = true;
      left = right;
    }
    return result;
  }

  std::uint32_t parse_arith() {
    auto lhs = parse_term();
    while (at_punct("+") || at_punct("-")) {
      const auto& op = next();
      auto rhs = parse_term();
      lhs = make(op.text == "+" ? NodeKind::Add : NodeKind::Sub, ValueType::Int, {lhs, rhs}, op.offset);
    }
    return lhs;
  }

  std::uint32_t parse_term() {
    auto lhs = parse_unary();
    while (at_punct("*") || at_punct("%") || at_punct("//")) {
      const auto& op = next();
      auto rhs = parse_unary();
      const NodeKind kind = op.text == "*" ? NodeKind::Mul : op.text == "%" ? NodeKind::Mod : NodeKind::Div;
      lhs = make(kind, ValueType::Int, {lhs, rhs}, op.offset);
    }
    return lhs;
  }

  std::uint32_t parse_unary() {
    if (at_punct("-")) {
      const auto off = next().offset;
      if (peek().kind == Tok::Int) {
        Node n;
        n.kind = NodeKind::Literal;
        n.type = ValueType::Int;
        n.value = -next().value;
        n.offset = static_cast<std::uint32_t>(off);
        return add(std::move(n));
      }
      const auto operand = parse_unary();
      return make(NodeKind::Neg, ValueType::Int, {operand}, off);
    }
    return parse_primary();
  }

  std::uint32_t parse_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      ++pos_;
      Node n;
      n.kind = NodeKind::Literal;
      n.type = ValueType::Int;
      n.value = t.value;
      n.offset = static_cast<std::uint32_t>(t.offset);
      return add(std::move(n));
    }
    if (at_punct("(")) {
      ++pos_;
      const auto inner = parse_or();
      expect_punct(")");
      return inner;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "true" || t.text == "false") {
        ++pos_;
        Node n;
        n.kind = NodeKind::Literal;
        n.type = ValueType::Bool;
        n.value = t.text == "true" ? 1 : 0;
        n.offset = static_cast<std::uint32_t>(t.offset);
        return add(std::move(n));
      }
      if (t.text == "a" || t.text == "b" || t.text == "c") {
        ++pos_;
        Node n;
        n.kind = NodeKind::Variable;
        n.type = ValueType::Int;
        n.value = t.text[0] - 'a';
        n.offset = static_cast<std::uint32_t>(t.offset);
        return add(std::move(n));
      }
      if (const Builtin* b = find_builtin(t.text)) {
        const auto off = t.offset;
        ++pos_;
        expect_punct("(");
        std::vector<std::uint32_t> args;
        if (!at_punct(")")) {
          args.push_back(parse_or());
          while (at_punct(",")) {
            ++pos_;
            args.push_back(parse_or());
          }
        }
        expect_punct(")");
        if (args.size() < b->min_args || args.size() > b->max_args) {
          throw RuleTypeError(off, std::string(b->name) + " takes " + std::to_string(b->min_args) +
                                       (b->min_args == b->max_args ? "" : ".." + std::to_string(b->max_args)) +
                                       " argument(s), got " + std::to_string(args.size()));
        }
        return make(b->kind, b->result, std::move(args), off);
      }
      if (is_keyword(t.text)) throw SyntaxError(t.offset, describe(t), kOperandStart);
      throw UnknownIdentifier(t.offset, t.text);
    }
    throw SyntaxError(t.offset, describe(t), kOperandStart);
  }

  std::vector<Token> tokens_;
  std::size_t pos_{0};
  std::vector<Node>* nodes_{nullptr};
};

// ---------------------------------------------------------------------------
// Static guard analysis

bool same_subtree(const std::vector<Node>& nodes, std::uint32_t x, std::uint32_t y) {
  if (x == y) return true;
  const Node& p = nodes[x];
  const Node& q = nodes[y];
  if (p.kind != q.kind || p.value != q.value || p.members != q.members || p.args.size() != q.args.size()) {
    return false;
  }
  for (std::size_t i = 0; i < p.args.size(); ++i) {
    if (!same_subtree(nodes, p.args[i], q.args[i])) return false;
  }
  return true;
}

bool is_zero_literal(const Node& n) { return n.kind == NodeKind::Literal && n.value == 0; }

// Divisors proven nonzero when `idx` evaluates true.
void collect_nonzero_facts(const std::vector<Node>& nodes, std::uint32_t idx, std::vector<std::uint32_t>& facts) {
  const Node& n = nodes[idx];
  if (n.kind == NodeKind::And) {
    collect_nonzero_facts(nodes, n.args[0], facts);
    collect_nonzero_facts(nodes, n.args[1], facts);
  } else if (n.kind == NodeKind::Ne) {
    if (is_zero_literal(nodes[n.args[1]])) facts.push_back(n.args[0]);
    if (is_zero_literal(nodes[n.args[0]])) facts.push_back(n.args[1]);
  }
}

bool has_unguarded_division(const std::vector<Node>& nodes, std::uint32_t idx, std::vector<std::uint32_t>& facts) {
  const Node& n = nodes[idx];
  if (n.kind == NodeKind::And) {
    if (has_unguarded_division(nodes, n.args[0], facts)) return true;
    const auto mark = facts.size();
    collect_nonzero_facts(nodes, n.args[0], facts);
    const bool bad = has_unguarded_division(nodes, n.args[1], facts);
    facts.resize(mark);
    return bad;
  }
  for (auto child : n.args) {
    if (has_unguarded_division(nodes, child, facts)) return true;
  }
  if (n.kind == NodeKind::Div || n.kind == NodeKind::Mod) {
    const Node& divisor = nodes[n.args[1]];
    if (divisor.kind == NodeKind::Literal) return divisor.value == 0;
    const bool guarded = std::any_of(facts.begin(), facts.end(),
                                     [&](std::uint32_t f) { return same_subtree(nodes, f, n.args[1]); });
    return !guarded;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Rendering

std::string_view op_text(NodeKind k) {
  switch (k) {
    case NodeKind::Add: return "+";
    case NodeKind::Sub: return "-";
    case NodeKind::Mul: return "*";
    case NodeKind::Div: return "//";
    case NodeKind::Mod: return "%";
    case NodeKind::Eq: return "==";
    case NodeKind::Ne: return "!=";
    case NodeKind::Lt: return "<";
    case NodeKind::Le: return "<=";
    case NodeKind::Gt: return ">";
    case NodeKind::Ge: return ">=";
    case NodeKind::And: return "and";
    case NodeKind::Or: return "or";
    case NodeKind::Abs: return "abs";
    case NodeKind::LastDigit: return "last_digit";
    case NodeKind::IsPrime: return "is_prime";
    case NodeKind::IsCube: return "is_cube";
    case NodeKind::DistinctCount: return "distinct_count";
    case NodeKind::Min: return "min";
    case NodeKind::Max: return "max";
    default: return "?";
  }
}

void render(const std::vector<Node>& nodes, std::uint32_t idx, std::string& out) {
  const Node& n = nodes[idx];
  switch (n.kind) {
    case NodeKind::Literal:
      if (n.type == ValueType::Bool) {
        out += n.value ? "true" : "false";
      } else {
        out += std::to_string(n.value);
      }
      return;
    case NodeKind::Variable:
      out += static_cast<char>('a' + n.value);
      return;
    case NodeKind::Neg:
      out += "(-";
      render(nodes, n.args[0], out);
      out += ')';
      return;
    case NodeKind::Not:
      out += "(not ";
      render(nodes, n.args[0], out);
      out += ')';
      return;
    case NodeKind::InSet: {
      out += '(';
      render(nodes, n.args[0], out);
      out += " in {";
      for (std::size_t i = 0; i < n.members.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(n.members[i]);
      }
      out += "})";
      return;
    }
    case NodeKind::Abs:
    case NodeKind::LastDigit:
    case NodeKind::IsPrime:
    case NodeKind::IsCube:
    case NodeKind::DistinctCount:
    case NodeKind::Min:
    case NodeKind::Max:
      out += op_text(n.kind);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        render(nodes, n.args[i], out);
      }
      out += ')';
      return;
    default:
      out += '(';
      render(nodes, n.args[0], out);
      out += ' ';
      out += op_text(n.kind);
      out += ' ';
      render(nodes, n.args[1], out);
      out += ')';
      return;
  }
}

}  // namespace

RuleExpr parse_rule(std::string_view text) {
  RuleExpr rule;
  rule.source_ = std::string(text);
  Parser parser(text);
  rule.root_ = parser.parse_root(rule.nodes_);
  std::vector<std::uint32_t> facts;
  rule.partial_ = has_unguarded_division(rule.nodes_, rule.root_, facts);
  return rule;
}

std::string RuleExpr::canonical() const {
  std::string out;
  if (!nodes_.empty()) render(nodes_, root_, out);
  return out;
}

// ---------------------------------------------------------------------------
// Scalar evaluation

namespace {

class ScalarEval {
 public:
  ScalarEval(const RuleExpr& rule, const Triple& x) : nodes_(rule.nodes()), vars_{x.a, x.b, x.c}, x_(x) {}

  std::int64_t eval(std::uint32_t idx) {
    const Node& n = nodes_[idx];
    switch (n.kind) {
      case NodeKind::Literal: return n.value;
      case NodeKind::Variable: return vars_[static_cast<std::size_t>(n.value)];
      case NodeKind::Neg: {
        const auto v = eval(n.args[0]);
        if (v == std::numeric_limits<std::int64_t>::min()) overflow();
        return -v;
      }
      case NodeKind::Add: {
        std::int64_t r;
        if (__builtin_add_overflow(eval(n.args[0]), eval(n.args[1]), &r)) overflow();
        return r;
      }
      case NodeKind::Sub: {
        std::int64_t r;
        if (__builtin_sub_overflow(eval(n.args[0]), eval(n.args[1]), &r)) overflow();
        return r;
      }
      case NodeKind::Mul: {
        std::int64_t r;
        if (__builtin_mul_overflow(eval(n.args[0]), eval(n.args[1]), &r)) overflow();
        return r;
      }
      case NodeKind::Div:
      case NodeKind::Mod: {
        const auto lhs = eval(n.args[0]);
        const auto rhs = eval(n.args[1]);
        try {
          return n.kind == NodeKind::Mod ? euclid_mod(lhs, rhs) : euclid_div(lhs, rhs);
        } catch (const EvalGuardError& e) {
          throw EvalGuardError(e.what(), x_);
        }
      }
      case NodeKind::Eq: return eval(n.args[0]) == eval(n.args[1]);
      case NodeKind::Ne: return eval(n.args[0]) != eval(n.args[1]);
      case NodeKind::Lt: return eval(n.args[0]) < eval(n.args[1]);
      case NodeKind::Le: return eval(n.args[0]) <= eval(n.args[1]);
      case NodeKind::Gt: return eval(n.args[0]) > eval(n.args[1]);
      case NodeKind::Ge: return eval(n.args[0]) >= eval(n.args[1]);
      case NodeKind::And: return eval(n.args[0]) != 0 && eval(n.args[1]) != 0;
      case NodeKind::Or: return eval(n.args[0]) != 0 || eval(n.args[1]) != 0;
      case NodeKind::Not: return eval(n.args[0]) == 0;
      case NodeKind::InSet: {
        const auto v = eval(n.args[0]);
        return std::binary_search(n.members.begin(), n.members.end(), v);
      }
      case NodeKind::Abs: {
        const auto v = eval(n.args[0]);
        if (v == std::numeric_limits<std::int64_t>::min()) overflow();
        return v < 0 ? -v : v;
      }
      case NodeKind::LastDigit: {
        const auto v = eval(n.args[0]);
        const __int128 mag = v < 0 ? -static_cast<__int128>(v) : static_cast<__int128>(v);
        return static_cast<std::int64_t>(mag % 10);
      }
      case NodeKind::IsPrime: return is_prime(eval(n.args[0]));
      case NodeKind::IsCube: return is_cube(eval(n.args[0]));
      case NodeKind::DistinctCount: {
        std::array<std::int64_t, 8> vals{};
        const auto k = n.args.size();
        for (std::size_t i = 0; i < k; ++i) vals[i] = eval(n.args[i]);
        std::sort(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(k));
        return std::unique(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(k)) - vals.begin();
      }
      case NodeKind::Min:
      case NodeKind::Max: {
        auto best = eval(n.args[0]);
        for (std::size_t i = 1; i < n.args.size(); ++i) {
          const auto v = eval(n.args[i]);
          best = n.kind == NodeKind::Min ? std::min(best, v) : std::max(best, v);
        }
        return best;
      }
    }
    return 0;
  }

 private:
  [[noreturn]] void overflow() const { throw EvalGuardError("integer overflow", x_); }

  const std::vector<Node>& nodes_;
  std::array<std::int64_t, 3> vars_;
  Triple x_;
};

}  // namespace

bool eval_rule(const RuleExpr& rule, const Triple& x) {
  if (rule.nodes().empty()) throw RuleError("empty rule");
  return ScalarEval(rule, x).eval(rule.root()) != 0;
}

// ---------------------------------------------------------------------------
// Row evaluation: one node at a time across all c lanes, with explicit
// activity masks standing in for short-circuit control flow.

namespace {

constexpr std::size_t kLanes = static_cast<std::size_t>(kDomainWidth);
using Lanes = std::array<std::int64_t, kLanes>;
using Mask = std::array<std::uint8_t, kLanes>;

class RowEval {
 public:
  explicit RowEval(const RuleExpr& rule)
      : rule_(rule), values_(rule.nodes().size()), masks_(rule.nodes().size()) {}

  void run(int a, int b, std::span<std::uint8_t, kLanes> out) {
    a_ = a;
    b_ = b;
    error_.fill(0);
    any_error_ = false;
    Mask all;
    all.fill(1);
    eval(rule_.root(), all);
    if (any_error_) {
      for (std::size_t i = 0; i < kLanes; ++i) {
        if (error_[i]) {
          const Triple at{a, b, kDomainMin + static_cast<int>(i)};
          throw EvalGuardError(error_[i] == 1 ? "division or modulo by zero" : "integer overflow", at);
        }
      }
    }
    const Lanes& root = values_[rule_.root()];
    for (std::size_t i = 0; i < kLanes; ++i) out[i] = root[i] != 0;
  }

 private:
  void flag(std::size_t lane, std::uint8_t code) {
    if (!error_[lane]) error_[lane] = code;
    any_error_ = true;
  }

  void eval(std::uint32_t idx, const Mask& active) {
    const Node& n = rule_.nodes()[idx];
    Lanes& out = values_[idx];
    switch (n.kind) {
      case NodeKind::Literal:
        out.fill(n.value);
        return;
      case NodeKind::Variable:
        if (n.value == 0) {
          out.fill(a_);
        } else if (n.value == 1) {
          out.fill(b_);
        } else {
          for (std::size_t i = 0; i < kLanes; ++i) out[i] = kDomainMin + static_cast<std::int64_t>(i);
        }
        return;
      case NodeKind::And:
      case NodeKind::Or: {
        eval(n.args[0], active);
        const Lanes& lhs = values_[n.args[0]];
        Mask& sub = masks_[idx];
        bool any = false;
        for (std::size_t i = 0; i < kLanes; ++i) {
          const bool l = lhs[i] != 0;
          sub[i] = active[i] && (n.kind == NodeKind::And ? l : !l);
          any |= sub[i] != 0;
        }
        if (any) eval(n.args[1], sub);
        const Lanes& rhs = values_[n.args[1]];
        for (std::size_t i = 0; i < kLanes; ++i) {
          const bool l = lhs[i] != 0;
          out[i] = n.kind == NodeKind::And ? (l && sub[i] && rhs[i] != 0) : (l || (sub[i] && rhs[i] != 0));
        }
        return;
      }
      default:
        break;
    }

    for (auto child : n.args) eval(child, active);
    const Lanes& x = values_[n.args[0]];
    const Lanes* yp = n.args.size() > 1 ? &values_[n.args[1]] : nullptr;
    constexpr auto kMin = std::numeric_limits<std::int64_t>::min();

    switch (n.kind) {
      case NodeKind::Neg:
      case NodeKind::Abs:
        for (std::size_t i = 0; i < kLanes; ++i) {
          if (x[i] == kMin) {
            if (active[i]) flag(i, 2);
            out[i] = 0;
          } else {
            out[i] = n.kind == NodeKind::Neg ? -x[i] : (x[i] < 0 ? -x[i] : x[i]);
          }
        }
        return;
      case NodeKind::Add:
      case NodeKind::Sub:
      case NodeKind::Mul: {
        const Lanes& y = *yp;
        for (std::size_t i = 0; i < kLanes; ++i) {
          std::int64_t r = 0;
          bool ovf = n.kind == NodeKind::Add   ? __builtin_add_overflow(x[i], y[i], &r)
                     : n.kind == NodeKind::Sub ? __builtin_sub_overflow(x[i], y[i], &r)
                                               : __builtin_mul_overflow(x[i], y[i], &r);
          if (ovf && active[i]) flag(i, 2);
          out[i] = r;
        }
        return;
      }
      case NodeKind::Div:
      case NodeKind::Mod: {
        const Lanes& y = *yp;
        for (std::size_t i = 0; i < kLanes; ++i) {
          if (y[i] == 0) {
            if (active[i]) flag(i, 1);
            out[i] = 0;
            continue;
          }
          const __int128 m = y[i] < 0 ? -static_cast<__int128>(y[i]) : static_cast<__int128>(y[i]);
          __int128 r = static_cast<__int128>(x[i]) % m;
          if (r < 0) r += m;
          if (n.kind == NodeKind::Mod) {
            out[i] = static_cast<std::int64_t>(r);
          } else {
            const __int128 q = (static_cast<__int128>(x[i]) - r) / static_cast<__int128>(y[i]);
            if (q > std::numeric_limits<std::int64_t>::max() || q < kMin) {
              if (active[i]) flag(i, 2);
              out[i] = 0;
            } else {
              out[i] = static_cast<std::int64_t>(q);
            }
          }
        }
        return;
      }
      case NodeKind::Eq:
        for (std::size_t i = 0; i < kLanes; ++i) out[i] = x[i] == (*yp)[i];
        return;
      case NodeKind::Ne:
        for (std::size_t i = 0; i < kLanes; ++i) out[i] = x[i] != (*yp)[i];
        return;
      case NodeKind::Lt:
        for (std::size_t i = 0; i < kLanes; ++i) out[i] = x[i] < (*yp)[i];
        return;
      case NodeKind::Le:
        for (std::size_t i = 0; i < kLanes; ++i) out[i] = x[i] <= (*yp)[i];
        return;
      case NodeKind::Gt:
        for (std::size_t i = 0; i < kLanes; ++i) out[i] = x[i] > (*yp)[i];
        return;
      case NodeKind::Ge:
        for (std::size_t i = 0; i < kLanes; ++i) out[i] = x[i] >= (*yp)[i];
        return;
      case NodeKind::Not:
        for (std::size_t i = 0; i < kLanes; ++i) out[i] = x[i] == 0;
        return;
      case NodeKind::InSet:
        for (std::size_t i = 0; i < kLanes; ++i) {
          out[i] = std::binary_search(n.members.begin(), n.members.end(), x[i]);
        }
        return;
      case NodeKind::LastDigit:
        for (std::size_t i = 0; i < kLanes; ++i) {
          const __int128 v = x[i] < 0 ? -static_cast<__int128>(x[i]) : static_cast<__int128>(x[i]);
          out[i] = static_cast<std::int64_t>(v % 10);
        }
        return;
      case NodeKind::IsPrime:
        for (std::size_t i = 0; i < kLanes; ++i) out[i] = is_prime(x[i]);
        return;
      case NodeKind::IsCube:
        for (std::size_t i = 0; i < kLanes; ++i) out[i] = is_cube(x[i]);
        return;
      case NodeKind::DistinctCount: {
        const auto k = n.args.size();
        for (std::size_t i = 0; i < kLanes; ++i) {
          std::array<std::int64_t, 8> vals{};
          for (std::size_t j = 0; j < k; ++j) vals[j] = values_[n.args[j]][i];
          std::sort(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(k));
          out[i] = std::unique(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(k)) - vals.begin();
        }
        return;
      }
      case NodeKind::Min:
      case NodeKind::Max:
        for (std::size_t i = 0; i < kLanes; ++i) {
          auto best = x[i];
          for (std::size_t j = 1; j < n.args.size(); ++j) {
            const auto v = values_[n.args[j]][i];
            best = n.kind == NodeKind::Min ? std::min(best, v) : std::max(best, v);
          }
          out[i] = best;
        }
        return;
      default:
        return;
    }
  }

  const RuleExpr& rule_;
  std::vector<Lanes> values_;
  std::vector<Mask> masks_;
  Mask error_{};
  bool any_error_{false};
  int a_{0};
  int b_{0};
};

}  // namespace

void eval_row(const RuleExpr& rule, int a, int b, std::span<std::uint8_t, kDomainWidth> out) {
  if (rule.nodes().empty()) throw RuleError("empty rule");
  RowEval ev(rule);
  ev.run(a, b, out);
}

// ---------------------------------------------------------------------------
// Equivalence

Equivalence rules_equivalent(const RuleExpr& lhs, const RuleExpr& rhs, unsigned workers) {
  constexpr std::size_t kRows = static_cast<std::size_t>(kDomainWidth) * kDomainWidth;
  workers = std::max(1u, workers);

  // First event (disagreement or guard error) in row order, per worker.
  struct Event {
    std::size_t row{kRows};
    std::size_t lane{0};
    std::optional<EvalGuardError> error;
  };
  std::atomic<std::size_t> best_row{kRows};
  auto claim = [&](std::size_t row) {
    std::size_t cur = best_row.load();
    while (row < cur && !best_row.compare_exchange_weak(cur, row)) {
    }
  };

  auto scan = [&](std::size_t begin, std::size_t step, Event& ev) {
    RowEval left(lhs);
    RowEval right(rhs);
    std::array<std::uint8_t, kLanes> x{};
    std::array<std::uint8_t, kLanes> y{};
    for (std::size_t row = begin; row < kRows; row += step) {
      if (row > best_row.load(std::memory_order_relaxed)) return;
      const int a = kDomainMin + static_cast<int>(row / kDomainWidth);
      const int b = kDomainMin + static_cast<int>(row % kDomainWidth);
      try {
        left.run(a, b, x);
        right.run(a, b, y);
      } catch (const EvalGuardError&) {
        // Replay the row lane by lane so that a disagreement before the
        // failing lane wins, exactly as in a sequential scan.
        for (std::size_t i = 0; i < kLanes; ++i) {
          const Triple t{a, b, kDomainMin + static_cast<int>(i)};
          try {
            if (eval_rule(lhs, t) == eval_rule(rhs, t)) continue;
          } catch (const EvalGuardError& e) {
            ev.error = e;
          }
          ev.row = row;
          ev.lane = i;
          claim(row);
          return;
        }
      }
      for (std::size_t i = 0; i < kLanes; ++i) {
        if (x[i] != y[i]) {
          ev.row = row;
          ev.lane = i;
          claim(row);
          return;
        }
      }
    }
  };

  std::vector<Event> events(workers);
  if (workers == 1) {
    scan(0, 1, events[0]);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] { scan(w, workers, events[w]); });
    }
  }

  const Event* first = nullptr;
  for (const auto& ev : events) {
    if (ev.row == kRows) continue;
    if (!first || ev.row < first->row || (ev.row == first->row && ev.lane < first->lane)) first = &ev;
  }
  if (!first) return {};
  if (first->error) throw *first->error;
  const int a = kDomainMin + static_cast<int>(first->row / kDomainWidth);
  const int b = kDomainMin + static_cast<int>(first->row % kDomainWidth);
  return {false, Triple{a, b, kDomainMin + static_cast<int>(first->lane)}};
}

}  // namespace cbias
