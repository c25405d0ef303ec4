#pragma once

// One bit per domain triple, indexed by Triple::index().

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cbias/rule_dsl.hpp"

namespace cbias {

class TruthTable {
 public:
  static constexpr std::size_t kWords = (kDomainSize + 63) / 64;

  TruthTable() : words_(kWords, 0) {}
  // Evaluates `rule` on every triple. Slices of constant `a` are spread over
  // `workers` threads. Throws EvalGuardError for the smallest failing triple.
  explicit TruthTable(const RuleExpr& rule, unsigned workers = 1);

  bool test(std::size_t index) const noexcept { return (words_[index >> 6] >> (index & 63)) & 1u; }
  bool test(const Triple& t) const noexcept { return test(t.index()); }
  void set(std::size_t index) noexcept { words_[index >> 6] |= std::uint64_t{1} << (index & 63); }

  std::size_t count() const noexcept;
  // Smallest member at or after `from`.
  std::optional<std::size_t> first_set(std::size_t from = 0) const noexcept;
  std::optional<std::size_t> first_clear(std::size_t from = 0) const noexcept;
  std::optional<std::size_t> first_difference(const TruthTable& other) const noexcept;

  TruthTable& operator&=(const TruthTable& other) noexcept;
  TruthTable operator~() const;

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }
  std::vector<std::uint64_t>& words() noexcept { return words_; }

  friend bool operator==(const TruthTable& x, const TruthTable& y) noexcept { return x.words_ == y.words_; }

 private:
  std::vector<std::uint64_t> words_;
};

// Process-wide cache keyed by the rule's canonical rendering. Safe to call
// from several threads; a table is built at most once per key.
std::shared_ptr<const TruthTable> truth_table(const RuleExpr& rule);

}  // namespace cbias
