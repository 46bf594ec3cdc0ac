#ifndef PATTERNSET_INTERVAL_HPP
#define PATTERNSET_INTERVAL_HPP

#include <functional>

#include "patternset/numbers.hpp"

namespace patternset {

// Closed interval with exact rational endpoints. Every operation returns an
// interval containing the exact image set; +,-,*,/ need no rounding at all.
struct RationalInterval {
  Rational lo;
  Rational hi;

  RationalInterval() : lo(0), hi(0) {}
  RationalInterval(Rational l, Rational h);
  static RationalInterval point(const Rational& x) {
    return RationalInterval(x, x);
  }

  Rational width() const { return hi - lo; }
  Rational midpoint() const { return (lo + hi) / 2; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool contains(const RationalInterval& o) const {
    return lo <= o.lo && o.hi <= hi;
  }
  bool strictly_contains(const RationalInterval& o) const {
    return lo < o.lo && o.hi < hi;
  }
  bool intersects(const RationalInterval& o) const {
    return lo <= o.hi && o.lo <= hi;
  }
};

RationalInterval iv_add(const RationalInterval& a, const RationalInterval& b);
RationalInterval iv_sub(const RationalInterval& a, const RationalInterval& b);
RationalInterval iv_mul(const RationalInterval& a, const RationalInterval& b);
// Requires 0 not in b.
RationalInterval iv_div(const RationalInterval& a, const RationalInterval& b);
// Integer power, outward on the image set (even powers of straddling
// intervals clamp at 0).
RationalInterval iv_pow(const RationalInterval& a, long e);

// Enclosure [l,h] of {x^(1/n) : x in a}, a.lo >= 0, with
// h - l <= exact image width + tol. Exact roots are detected and returned
// with zero slack. Bisection step limit 10^6 per endpoint; exceeding it
// throws CertificationError.
RationalInterval iv_nth_root(const RationalInterval& a, unsigned long n,
                             const Rational& tol);

// Lower/upper bound of r^(1/n) alone.
Rational nth_root_lower(const Rational& r, unsigned long n,
                        const Rational& tol);
Rational nth_root_upper(const Rational& r, unsigned long n,
                        const Rational& tol);

// Point evaluator producing a certified enclosure of f at x.
using PointEnclosureFn =
    std::function<RationalInterval(const Rational& x, const Rational& tol)>;

// Enclosure of the preimage f^-1(y) for f strictly increasing on `search`
// (the caller certifies monotonicity). Returns X containing the exact
// preimage with width <= exact width + tol, by monotone bisection on the
// endpoints. Throws BracketError if y is not bracketed by f(search).
RationalInterval monotone_inverse(const PointEnclosureFn& f,
                                  const RationalInterval& y,
                                  const RationalInterval& search,
                                  const Rational& tol);

}  // namespace patternset

#endif  // PATTERNSET_INTERVAL_HPP
