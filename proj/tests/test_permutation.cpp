#include <cmath>
#include <vector>

#include "cbias/permutation.hpp"
#include "doctest.h"

using namespace cbias;

namespace {

// Exact p over all 2^n swap patterns (k / 2^n, no +1 correction).
double exact_p(const std::vector<double>& a, const std::vector<double>& b, bool two_sided) {
  const std::size_t n = a.size();
  double obs = 0;
  for (std::size_t i = 0; i < n; ++i) obs += b[i] - a[i];
  obs /= static_cast<double>(n);
  std::size_t hits = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += ((mask >> i) & 1) ? a[i] - b[i] : b[i] - a[i];
    s /= static_cast<double>(n);
    if (two_sided ? std::abs(s) >= std::abs(obs) - 1e-12 : s >= obs - 1e-12) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

double exact_ratio_p(const std::vector<PooledRatio>& a, const std::vector<PooledRatio>& b) {
  const auto pooled = [](const std::vector<PooledRatio>& v) {
    PooledRatio p;
    for (const auto& x : v) p += x;
    return p;
  };
  const double obs = *pooled(b).value() - *pooled(a).value();
  std::size_t hits = 0;
  const std::size_t n = a.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    PooledRatio xa, xb;
    for (std::size_t i = 0; i < n; ++i) {
      const bool swap = (mask >> i) & 1;
      xa += swap ? b[i] : a[i];
      xb += swap ? a[i] : b[i];
    }
    if (!xa.value() || !xb.value() || *xb.value() - *xa.value() >= obs - 1e-12) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

}  // namespace

TEST_CASE("three concordant pairs give p near one in eight") {
  const std::vector<double> a{0, 0, 0};
  const std::vector<double> b{1, 1, 1};
  const auto r = permutation_test(a, b, {50'000, 1337, Alternative::greater, 1});
  CHECK(r.delta_obs == 1.0);
  CHECK(r.p_value == doctest::Approx(0.125).epsilon(0.04));
  CHECK(std::abs(r.p_value - 0.125) < 0.005);
  const auto two = permutation_test(a, b, {50'000, 1337, Alternative::two_sided, 1});
  CHECK(std::abs(two.p_value - 0.25) < 0.006);
}

TEST_CASE("monte carlo p agrees with exact enumeration") {
  const std::vector<double> a{0.2, 0.5, 0.1, 0.9, 0.4, 0.3, 0.0, 0.6, 0.5, 0.2};
  const std::vector<double> b{0.6, 0.4, 0.5, 1.0, 0.7, 0.2, 0.3, 0.6, 0.9, 0.1};
  for (bool two_sided : {false, true}) {
    CAPTURE(two_sided);
    const auto r = permutation_test(
        a, b, {100'000, 42, two_sided ? Alternative::two_sided : Alternative::greater, 1});
    CHECK(std::abs(r.p_value - exact_p(a, b, two_sided)) < 0.005);
  }
}

TEST_CASE("ties count as extreme") {
  const std::vector<double> a{1, 0, 1, 0};
  const auto r = permutation_test(a, a, {5'000, 1, Alternative::greater, 1});
  CHECK(r.delta_obs == 0.0);
  CHECK(r.k == 5'000u);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("results do not depend on the worker count") {
  std::vector<double> a, b;
  for (int i = 0; i < 40; ++i) {
    a.push_back((i * 7) % 5 / 4.0);
    b.push_back((i * 3) % 4 / 3.0);
  }
  const auto one = permutation_test(a, b, {20'000, 9, Alternative::greater, 1});
  const auto four = permutation_test(a, b, {20'000, 9, Alternative::greater, 4});
  CHECK(one.k == four.k);
  CHECK(one.p_value == four.p_value);
  // A partial final batch is handled the same way.
  CHECK(permutation_test(a, b, {3'000, 9, Alternative::greater, 1}).k ==
        permutation_test(a, b, {3'000, 9, Alternative::greater, 3}).k);
  CHECK(permutation_test(a, b, {20'000, 10, Alternative::greater, 1}).k != one.k);
}

TEST_CASE("pooled ratio test") {
  const std::vector<PooledRatio> a{{1, 3}, {0, 4}, {2, 2}, {1, 5}, {0, 3}, {1, 1}};
  const std::vector<PooledRatio> b{{3, 1}, {2, 2}, {4, 1}, {1, 3}, {2, 2}, {3, 2}};
  const auto r = permutation_test_ratio(a, b, {100'000, 5, Alternative::greater, 2});
  REQUIRE(r);
  CHECK(r->delta_obs == doctest::Approx(15.0 / 11 - 5.0 / 18));
  CHECK(std::abs(r->p_value - exact_ratio_p(a, b)) < 0.005);

  // An undefined observed ratio gives no result.
  const std::vector<PooledRatio> zero{{1, 0}, {2, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}};
  CHECK_FALSE(permutation_test_ratio(zero, b, {1'000, 5, Alternative::greater, 1}));

  // Permutations with an undefined ratio count as extreme.
  const std::vector<PooledRatio> x{{0, 1}};
  const std::vector<PooledRatio> y{{1, 0}};
  const std::vector<PooledRatio> x2{{0, 1}, {0, 1}};
  const std::vector<PooledRatio> y2{{1, 1}, {1, 0}};
  const auto u = permutation_test_ratio(x2, y2, {8'000, 3, Alternative::greater, 1});
  REQUIRE(u);
  CHECK(std::abs(u->p_value - exact_ratio_p(x2, y2)) < 0.02);
  CHECK_FALSE(permutation_test_ratio(x, y, {10, 1, Alternative::greater, 1}));
}

TEST_CASE("invalid input") {
  const std::vector<double> a{1, 2};
  const std::vector<double> b{1};
  const std::vector<double> none;
  CHECK_THROWS_AS(permutation_test(a, b), std::invalid_argument);
  CHECK_THROWS_AS(permutation_test(none, none), std::invalid_argument);
  CHECK_THROWS_AS(permutation_test(a, a, {0, 1, Alternative::greater, 1}), std::invalid_argument);
  CHECK(alternative_name(Alternative::two_sided) == "two-sided");
}
