#pragma once

// PCG32 (XSH-RR variant, 64-bit state, 32-bit output), bit-exact with the
// reference pcg32_srandom_r / pcg32_random_r. docs/prng.md has the details.

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace cbias {

class Pcg32 {
 public:
  using result_type = std::uint32_t;

  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kDefaultStream = 0xda3e39cb94b95bdbULL;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = kDefaultStream) noexcept
      : inc_((stream << 1u) | 1u) {
    step();
    state_ += seed;
    step();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t old = state_;
    step();
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  // Uniform in [0, bound) without modulo bias; bound must be > 0.
  std::uint32_t bounded(std::uint32_t bound) noexcept {
    const std::uint32_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint32_t r = (*this)();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  void step() noexcept { state_ = state_ * kMultiplier + inc_; }

  std::uint64_t state_{0};
  std::uint64_t inc_;
};

// First n entries of a Fisher-Yates shuffle of `items`, drawn with `rng`.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> items, std::size_t n, Pcg32& rng) {
  if (n > items.size()) n = items.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto remaining = static_cast<std::uint32_t>(items.size() - i);
    const std::size_t j = i + rng.bounded(remaining);
    std::swap(items[i], items[j]);
  }
  items.resize(n);
  return items;
}

}  // namespace cbias
