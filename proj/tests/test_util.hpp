#ifndef PATTERNSET_TEST_UTIL_HPP
#define PATTERNSET_TEST_UTIL_HPP

#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>

#include "patternset/numbers.hpp"

namespace patternset::test {

// Exact rational from a decimal literal like "-1.4142" or "693.147".
inline Rational dec(const std::string& s) {
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false;
  bool negative = false;
  for (char c : s) {
    if (c == '-') {
      negative = true;
    } else if (c == '.') {
      seen_dot = true;
    } else {
      digits.push_back(c);
      if (seen_dot) ++frac_digits;
    }
  }
  Int num(digits, 10);
  Int den = 1;
  for (long i = 0; i < frac_digits; ++i) den *= 10;
  Rational r(negative ? Int(-num) : num, den);
  r.canonicalize();
  return r;
}

// Deterministic RNG for property tests (seed 0 unless overridden by the
// PATTERNSET_TEST_SEED environment variable).
inline std::mt19937_64 make_rng() {
  const char* env = std::getenv("PATTERNSET_TEST_SEED");
  std::uint64_t seed = env ? std::strtoull(env, nullptr, 10) : 0;
  return std::mt19937_64(seed);
}

inline Rational random_rational(std::mt19937_64& rng, long lo_num,
                                long hi_num, long max_den) {
  std::uniform_int_distribution<long> num_d(lo_num, hi_num);
  std::uniform_int_distribution<long> den_d(1, max_den);
  Rational r(num_d(rng), den_d(rng));
  r.canonicalize();
  return r;
}

}  // namespace patternset::test

#endif  // PATTERNSET_TEST_UTIL_HPP
