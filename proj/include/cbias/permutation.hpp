#pragma once

// Paired permutation test with per-pair label swaps.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "cbias/metrics.hpp"

namespace cbias {

enum class Alternative : std::uint8_t { greater, two_sided };
std::string_view alternative_name(Alternative a);

struct PermutationOptions {
  std::uint64_t n_perm{50'000};
  std::uint64_t seed{1337};
  Alternative alternative{Alternative::greater};
  unsigned workers{1};
};

struct PermutationResult {
  double delta_obs{0.0};
  std::uint64_t k{0};  // permuted statistics at least as extreme as delta_obs
  std::uint64_t n_perm{0};
  double p_value{1.0};
};

// Permutations are generated in fixed-size batches; batch i draws from PCG
// stream i, so results do not depend on `workers`.
inline constexpr std::uint64_t kPermutationBatch = 1024;

// Statistic: mean(b) - mean(a), pairs swapped independently.
PermutationResult permutation_test(std::span<const double> a, std::span<const double> b,
                                   const PermutationOptions& options = {});

// Statistic: pooled I:C of b minus pooled I:C of a, swapping each pair's
// (I, C) counts. Empty when either observed ratio is undefined. A permutation
// whose ratio is undefined counts as at least as extreme.
std::optional<PermutationResult> permutation_test_ratio(std::span<const PooledRatio> a,
                                                        std::span<const PooledRatio> b,
                                                        const PermutationOptions& options = {});

}  // namespace cbias
