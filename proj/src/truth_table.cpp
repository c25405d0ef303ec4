#include "cbias/truth_table.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <map>
#include <mutex>
#include <thread>

namespace cbias {

static_assert(kDomainSize % 64 == 0, "complement assumes no padding bits");
static_assert((static_cast<std::size_t>(kDomainWidth) * kDomainWidth) % 64 == 0,
              "a-slices must start on word boundaries");

TruthTable::TruthTable(const RuleExpr& rule, unsigned workers) : words_(kWords, 0) {
  workers = std::clamp(workers, 1u, static_cast<unsigned>(kDomainWidth));
  std::vector<std::optional<EvalGuardError>> errors(workers);

  // Each a-slice covers whole words, so workers never share a word.
  auto fill = [&](unsigned w) {
    std::array<std::uint8_t, kDomainWidth> row{};
    for (int ai = static_cast<int>(w); ai < kDomainWidth; ai += static_cast<int>(workers)) {
      const int a = kDomainMin + ai;
      for (int b = kDomainMin; b <= kDomainMax; ++b) {
        try {
          eval_row(rule, a, b, row);
        } catch (const EvalGuardError& e) {
          errors[w] = e;
          return;
        }
        const std::size_t base = Triple{a, b, kDomainMin}.index();
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (row[i]) set(base + i);
        }
      }
    }
  };

  if (workers == 1) {
    fill(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(fill, w);
  }

  const EvalGuardError* first = nullptr;
  for (const auto& e : errors) {
    if (!e) continue;
    if (!first || (e->at() && first->at() && *e->at() < *first->at())) first = &*e;
  }
  if (first) throw *first;
}

std::size_t TruthTable::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

namespace {

template <typename WordFn>
std::optional<std::size_t> scan(std::size_t from, WordFn word) {
  if (from >= kDomainSize) return std::nullopt;
  std::size_t wi = from >> 6;
  std::uint64_t w = word(wi) & (~std::uint64_t{0} << (from & 63));
  for (;;) {
    if (w) {
      const std::size_t idx = (wi << 6) + static_cast<std::size_t>(std::countr_zero(w));
      if (idx >= kDomainSize) return std::nullopt;
      return idx;
    }
    if (++wi >= TruthTable::kWords) return std::nullopt;
    w = word(wi);
  }
}

}  // namespace

std::optional<std::size_t> TruthTable::first_set(std::size_t from) const noexcept {
  return scan(from, [&](std::size_t i) { return words_[i]; });
}

std::optional<std::size_t> TruthTable::first_clear(std::size_t from) const noexcept {
  return scan(from, [&](std::size_t i) { return ~words_[i]; });
}

std::optional<std::size_t> TruthTable::first_difference(const TruthTable& other) const noexcept {
  return scan(0, [&](std::size_t i) { return words_[i] ^ other.words_[i]; });
}

TruthTable& TruthTable::operator&=(const TruthTable& other) noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

TruthTable TruthTable::operator~() const {
  TruthTable out;
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = ~words_[i];
  return out;
}

std::shared_ptr<const TruthTable> truth_table(const RuleExpr& rule) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<std::once_flag>> flags;
  static std::map<std::string, std::shared_ptr<const TruthTable>> tables;

  const std::string key = rule.canonical();
  std::shared_ptr<std::once_flag> flag;
  {
    std::lock_guard lock(mu);
    if (auto it = tables.find(key); it != tables.end()) return it->second;
    auto& slot = flags[key];
    if (!slot) slot = std::make_shared<std::once_flag>();
    flag = slot;
  }
  std::call_once(*flag, [&] {
    auto table = std::make_shared<const TruthTable>(rule);
    std::lock_guard lock(mu);
    tables.emplace(key, std::move(table));
  });
  std::lock_guard lock(mu);
  auto it = tables.find(key);
  if (it == tables.end()) throw RuleError("truth table for " + key + " could not be built");
  return it->second;
}

}  // namespace cbias
