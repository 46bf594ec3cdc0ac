#ifndef PATTERNSET_LOGDOM_HPP
#define PATTERNSET_LOGDOM_HPP

#include "patternset/interval.hpp"
#include "patternset/numbers.hpp"

namespace patternset {

// Certified enclosures of logarithms, used to decide inequalities between
// quantities whose exact rational form would be too large to materialize
// (delta exponents grow geometrically with depth). Bounds come from MPFR
// with directed rounding and are converted back to exact rationals.

// x > 0. Enclosure of log2(x), width ~ 2^-(prec-4).
RationalInterval log2_bounds(const Rational& x, unsigned long prec = 128);

// Enclosure of log2(m * 2^e) = e + log2(m) for a positive dyadic; handles
// arbitrary-precision exponents exactly.
RationalInterval log2_bounds(const Dyadic& d, unsigned long prec = 128);

// Enclosure of ln(2).
RationalInterval ln2_bounds(unsigned long prec = 128);

// Enclosure of ln(x), x > 0 rational.
RationalInterval ln_bounds(const Rational& x, unsigned long prec = 128);

// Enclosure of e^-1.
RationalInterval inv_e_bounds(unsigned long prec = 128);

// Enclosure of ln(1/t) for a positive dyadic t = m*2^e (t < 1), without
// materializing t:  ln(1/t) = -(e + log2(m)) * ln 2.
RationalInterval ln_inv_bounds(const Dyadic& t, unsigned long prec = 128);

// Certified upper bound of 2^x. The integer part of x is split off exactly;
// the fractional part goes through MPFR, so |x| may be huge as long as the
// result's bit size is representable.
Rational exp2_upper(const Rational& x, unsigned long prec = 128);

}  // namespace patternset

#endif  // PATTERNSET_LOGDOM_HPP
