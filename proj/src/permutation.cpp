#include "cbias/permutation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cbias/pcg.hpp"

namespace cbias {

std::string_view alternative_name(Alternative a) { return a == Alternative::greater ? "greater" : "two-sided"; }

namespace {

bool at_least_as_extreme(double stat, double observed, Alternative alt) {
  const double eps = 1e-12 * std::max(1.0, std::abs(observed));
  if (alt == Alternative::two_sided) return std::abs(stat) >= std::abs(observed) - eps;
  return stat >= observed - eps;
}

// Counts extreme permutations batch by batch. `stat(rng)` draws one
// permutation's swap pattern from rng and returns its statistic, or nullopt
// when undefined.
template <typename Stat>
std::uint64_t count_extreme(const PermutationOptions& options, double observed, const Stat& stat) {
  const std::uint64_t batches = (options.n_perm + kPermutationBatch - 1) / kPermutationBatch;
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> total{0};
  const auto work = [&] {
    std::uint64_t local = 0;
    for (std::uint64_t b = next++; b < batches; b = next++) {
      Pcg32 rng(options.seed, b);
      const std::uint64_t end = std::min(options.n_perm, (b + 1) * kPermutationBatch);
      for (std::uint64_t i = b * kPermutationBatch; i < end; ++i) {
        const auto s = stat(rng);
        if (!s || at_least_as_extreme(*s, observed, options.alternative)) ++local;
      }
    }
    total += local;
  };
  const unsigned workers = std::clamp<unsigned>(options.workers, 1, static_cast<unsigned>(std::max<std::uint64_t>(batches, 1)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return total.load();
}

PermutationResult finish(double observed, std::uint64_t k, std::uint64_t n) {
  return PermutationResult{observed, k, n, static_cast<double>(k + 1) / static_cast<double>(n + 1)};
}

void check_pairs(std::size_t a, std::size_t b, std::uint64_t n_perm) {
  if (a != b) throw std::invalid_argument("paired samples differ in length");
  if (a == 0) throw std::invalid_argument("permutation test needs at least one pair");
  if (n_perm == 0) throw std::invalid_argument("n_perm must be positive");
}

}  // namespace

PermutationResult permutation_test(std::span<const double> a, std::span<const double> b,
                                   const PermutationOptions& options) {
  check_pairs(a.size(), b.size(), options.n_perm);
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = b[i] - a[i];
  const double n = static_cast<double>(d.size());
  double sum = 0;
  for (double x : d) sum += x;
  const double observed = sum / n;

  const auto stat = [&](Pcg32& rng) -> std::optional<double> {
    double s = 0;
    for (double x : d) s += (rng() >> 31) ? -x : x;
    return s / n;
  };
  return finish(observed, count_extreme(options, observed, stat), options.n_perm);
}

std::optional<PermutationResult> permutation_test_ratio(std::span<const PooledRatio> a,
                                                        std::span<const PooledRatio> b,
                                                        const PermutationOptions& options) {
  check_pairs(a.size(), b.size(), options.n_perm);
  PooledRatio pa, pb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa += a[i];
    pb += b[i];
  }
  const auto ra = pa.value();
  const auto rb = pb.value();
  if (!ra || !rb) return std::nullopt;
  const double observed = *rb - *ra;

  const auto stat = [&](Pcg32& rng) -> std::optional<double> {
    PooledRatio xa, xb;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (rng() >> 31) {
        xa += b[i];
        xb += a[i];
      } else {
        xa += a[i];
        xb += b[i];
      }
    }
    const auto va = xa.value();
    const auto vb = xb.value();
    if (!va || !vb) return std::nullopt;
    return *vb - *va;
  };
  return finish(observed, count_extreme(options, observed, stat), options.n_perm);
}

}  // namespace cbias
