#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace taulift {

// Exact rational coefficient ring. mpq_class keeps values canonical
// (reduced, positive denominator), which is exactly the invariant we need.
using Rat = mpq_class;

// The two-argument mpq_class constructor does not canonicalize; always build
// fractions through this helper.
inline Rat rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline Rat rat_pow(const Rat& base, long e) {
  if (e == 0) return Rat(1);
  Rat b = e > 0 ? base : Rat(1) / base;
  unsigned long n = static_cast<unsigned long>(e > 0 ? e : -e);
  Rat acc(1);
  while (n) {
    if (n & 1) acc *= b;
    b *= b;
    n >>= 1;
  }
  return acc;
}

inline Rat rat_factorial(long n) {
  Rat acc(1);
  for (long i = 2; i <= n; ++i) acc *= Rat(i);
  return acc;
}

inline Rat rat_double_factorial(long n) {
  // n!! for odd or even n >= -1.
  Rat acc(1);
  for (long i = n; i >= 2; i -= 2) acc *= Rat(i);
  return acc;
}

inline std::string rat_num_str(const Rat& r) { return r.get_num().get_str(); }
inline std::string rat_den_str(const Rat& r) { return r.get_den().get_str(); }

// Half-integers index fermionic modes and z-exponents. Stored as twice the value.
struct Half {
  int twice = 0;

  constexpr Half() = default;
  constexpr explicit Half(int tw) : twice(tw) {}
  static constexpr Half of_int(int n) { return Half(2 * n); }
  static constexpr Half half_odd(int n) { return Half(2 * n + 1); }  // n + 1/2

  bool is_integer() const { return twice % 2 == 0; }
  int as_int() const { return twice / 2; }
  Rat as_rat() const { return rat(twice, 2); }

  friend Half operator+(Half a, Half b) { return Half(a.twice + b.twice); }
  friend Half operator-(Half a, Half b) { return Half(a.twice - b.twice); }
  friend Half operator-(Half a) { return Half(-a.twice); }
  friend Half operator+(Half a, int n) { return Half(a.twice + 2 * n); }
  friend Half operator-(Half a, int n) { return Half(a.twice - 2 * n); }
  friend auto operator<=>(Half a, Half b) = default;
};

}  // namespace taulift
