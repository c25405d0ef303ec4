#pragma once

// Native C++ versions of the 40 catalog rules, written independently of the
// rule language so interpreter results can be checked against them.

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Pred = std::function<bool(int, int, int)>;

inline int mod(int n, int m) {
  const int r = n % m;
  return r < 0 ? r + std::abs(m) : r;
}

inline bool prime(int n) {
  if (n < 2) return false;
  for (int i = 2; i * i <= n; ++i) {
    if (n % i == 0) return false;
  }
  return true;
}

inline bool cube(int n) {
  for (int k = -5; k <= 5; ++k) {
    if (k * k * k == n) return true;
  }
  return false;
}

inline int distinct(int a, int b, int c) { return 1 + (b != a) + (c != a && c != b); }

inline const std::map<std::string, Pred>& rules() {
  static const std::map<std::string, Pred> r = {
      {"All even", [](int a, int b, int c) { return mod(a, 2) == 0 && mod(b, 2) == 0 && mod(c, 2) == 0; }},
      {"Each divides next",
       [](int a, int b, int c) { return a != 0 && mod(b, a) == 0 && b != 0 && mod(c, b) == 0; }},
      {"Exactly two equal", [](int a, int b, int c) { return distinct(a, b, c) == 2; }},
      {"At least one even", [](int a, int b, int c) { return mod(a, 2) == 0 || mod(b, 2) == 0 || mod(c, 2) == 0; }},
      {"All end with 6",
       [](int a, int b, int c) { return std::abs(a) % 10 == 6 && std::abs(b) % 10 == 6 && std::abs(c) % 10 == 6; }},
      {"Increasing differences", [](int a, int b, int c) { return 0 < b - a && b - a < c - b; }},
      {"a is min", [](int a, int b, int c) { return a <= b && a <= c; }},
      {"All distinct", [](int a, int b, int c) { return distinct(a, b, c) == 3; }},
      {"All divisible by 5", [](int a, int b, int c) { return mod(a, 5) == 0 && mod(b, 5) == 0 && mod(c, 5) == 0; }},
      {"a is max", [](int a, int b, int c) { return a >= b && a >= c; }},
      {"Non-monotone (middle between ends)", [](int a, int b, int c) { return (a - b) * (b - c) < 0; }},
      {"At least two multiples of 5",
       [](int a, int b, int c) { return (mod(a, 5) == 0) + (mod(b, 5) == 0) + (mod(c, 5) == 0) >= 2; }},
      {"All divisible by 3", [](int a, int b, int c) { return mod(a, 3) == 0 && mod(b, 3) == 0 && mod(c, 3) == 0; }},
      {"Alternating parity (ends same)",
       [](int a, int b, int c) { return mod(a, 2) == mod(c, 2) && mod(b, 2) != mod(a, 2); }},
      {"Ascending", [](int a, int b, int c) { return a < b && b < c; }},
      {"Non-decreasing", [](int a, int b, int c) { return a <= b && b <= c; }},
      {"All end with 9",
       [](int a, int b, int c) { return std::abs(a) % 10 == 9 && std::abs(b) % 10 == 9 && std::abs(c) % 10 == 9; }},
      {"Non-decreasing differences", [](int a, int b, int c) { return b - a <= c - b; }},
      {"c is max", [](int a, int b, int c) { return c >= a && c >= b; }},
      {"Arithmetic progression (AP)", [](int a, int b, int c) { return b - a == c - b; }},
      {"All divisible by 7", [](int a, int b, int c) { return mod(a, 7) == 0 && mod(b, 7) == 0 && mod(c, 7) == 0; }},
      {"Exactly two even",
       [](int a, int b, int c) { return (mod(a, 2) == 0) + (mod(b, 2) == 0) + (mod(c, 2) == 0) == 2; }},
      {"At least one multiple of 4",
       [](int a, int b, int c) { return mod(a, 4) == 0 || mod(b, 4) == 0 || mod(c, 4) == 0; }},
      {"At least two distinct", [](int a, int b, int c) { return distinct(a, b, c) >= 2; }},
      {"All end with 1",
       [](int a, int b, int c) { return std::abs(a) % 10 == 1 && std::abs(b) % 10 == 1 && std::abs(c) % 10 == 1; }},
      {"c is min", [](int a, int b, int c) { return c <= a && c <= b; }},
      {"All negative", [](int a, int b, int c) { return a < 0 && b < 0 && c < 0; }},
      {"Descending", [](int a, int b, int c) { return a > b && b > c; }},
      {"All odd", [](int a, int b, int c) { return mod(a, 2) == 1 && mod(b, 2) == 1 && mod(c, 2) == 1; }},
      {"b is (strict) max", [](int a, int b, int c) { return b > a && b > c; }},
      {"Mixed signs",
       [](int a, int b, int c) {
         const int neg = (a < 0) + (b < 0) + (c < 0);
         return neg == 1 || neg == 2;
       }},
      {"At least one multiple of 3",
       [](int a, int b, int c) { return mod(a, 3) == 0 || mod(b, 3) == 0 || mod(c, 3) == 0; }},
      {"All prime numbers", [](int a, int b, int c) { return prime(a) && prime(b) && prime(c); }},
      {"Non-increasing", [](int a, int b, int c) { return a >= b && b >= c; }},
      {"All positive", [](int a, int b, int c) { return a > 0 && b > 0 && c > 0; }},
      {"Contains a prime", [](int a, int b, int c) { return prime(a) || prime(b) || prime(c); }},
      {"All cube numbers", [](int a, int b, int c) { return cube(a) && cube(b) && cube(c); }},
      {"Exactly two odd",
       [](int a, int b, int c) { return (mod(a, 2) == 1) + (mod(b, 2) == 1) + (mod(c, 2) == 1) == 2; }},
      {"Decreasing gaps", [](int a, int b, int c) { return b - a > c - b; }},
      {"At least one odd", [](int a, int b, int c) { return mod(a, 2) == 1 || mod(b, 2) == 1 || mod(c, 2) == 1; }},
  };
  return r;
}

}  // namespace oracle

namespace oracle {

// One bit per triple in (a, b, c) lexicographic order over [-99, 100]^3.
inline std::vector<std::uint64_t> table(const Pred& p) {
  std::vector<std::uint64_t> words(8'000'000 / 64, 0);
  std::size_t i = 0;
  for (int a = -99; a <= 100; ++a) {
    for (int b = -99; b <= 100; ++b) {
      for (int c = -99; c <= 100; ++c, ++i) {
        if (p(a, b, c)) words[i >> 6] |= std::uint64_t{1} << (i & 63);
      }
    }
  }
  return words;
}

}  // namespace oracle
