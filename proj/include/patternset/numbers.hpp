#ifndef PATTERNSET_NUMBERS_HPP
#define PATTERNSET_NUMBERS_HPP

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>

namespace patternset {

using Int = mpz_class;
// Exact rational scalar. mpq canonical form is exactly the invariant we
// need: denominator > 0, gcd(num, den) = 1.
using Rational = mpq_class;

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CertificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Parses "p", "p/q" or "m*2^e" (dyadic form) into an exact rational.
Rational parse_rational(const std::string& text);
std::string rational_to_string(const Rational& r);

int sign(const Rational& r);

// pow with integer exponent; e < 0 requires r != 0.
Rational rational_pow(const Rational& r, long e);

// Value mantissa * 2^exponent with arbitrary-precision exponent.
// Canonical: mantissa odd, or mantissa == 0 (then exponent == 0).
class Dyadic {
 public:
  Dyadic() : mantissa_(0), exponent_(0) {}
  Dyadic(Int mantissa, Int exponent);

  static Dyadic one() { return Dyadic(1, 0); }
  static Dyadic pow2(Int exponent) { return Dyadic(1, std::move(exponent)); }
  // Rejects non-dyadic rationals.
  static Dyadic from_rational(const Rational& r);

  const Int& mantissa() const { return mantissa_; }
  const Int& exponent() const { return exponent_; }
  bool is_zero() const { return mantissa_ == 0; }
  int sign() const { return sgn(mantissa_); }

  // Materializes the exact value. Throws if |exponent| is so large that
  // the numerator/denominator would not fit in memory.
  Rational to_rational() const;
  bool materializable() const;

  Dyadic operator*(const Dyadic& o) const;
  Dyadic operator*(const Int& k) const;

  // Exact three-way comparison, never materializes 2^exponent.
  static int compare(const Dyadic& a, const Dyadic& b);
  bool operator==(const Dyadic& o) const { return compare(*this, o) == 0; }
  bool operator<(const Dyadic& o) const { return compare(*this, o) < 0; }
  bool operator<=(const Dyadic& o) const { return compare(*this, o) <= 0; }

  // Exact comparison of coef * this  vs  other  (coef a rational).
  static int compare_scaled(const Rational& coef, const Dyadic& a,
                            const Dyadic& b);

  // Serialized as "m*2^e".
  std::string to_string() const;
  static Dyadic parse(const std::string& text);

 private:
  Int mantissa_;
  Int exponent_;
};

// Largest dyadic of the form 2^-e (e >= 0) that is <= r; r must be in (0, 1].
Int pow2_floor_exponent(const Rational& r);

}  // namespace patternset

#endif  // PATTERNSET_NUMBERS_HPP
