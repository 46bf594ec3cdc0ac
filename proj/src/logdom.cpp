#include "patternset/logdom.hpp"

#include <mpfr.h>

namespace patternset {

namespace {

Rational mpfr_to_rational(mpfr_t x) {
  if (mpfr_zero_p(x)) return Rational(0);
  Int m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
  Rational out(m);
  if (e >= 0) {
    mpz_mul_2exp(out.get_num_mpz_t(), out.get_num_mpz_t(),
                 static_cast<unsigned long>(e));
  } else {
    mpz_mul_2exp(out.get_den_mpz_t(), out.get_den_mpz_t(),
                 static_cast<unsigned long>(-e));
  }
  out.canonicalize();
  return out;
}

// f applied with directed rounding on both sides; f must be monotone
// non-decreasing in its argument (true for log2, log) so that rounding the
// input toward the wanted side keeps the bound valid.
template <typename Fn>
RationalInterval directed(const Rational& x, unsigned long prec, Fn f) {
  mpfr_t lo, hi;
  mpfr_init2(lo, prec);
  mpfr_init2(hi, prec);
  mpfr_set_q(lo, x.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi, x.get_mpq_t(), MPFR_RNDU);
  f(lo, lo, MPFR_RNDD);
  f(hi, hi, MPFR_RNDU);
  RationalInterval out(mpfr_to_rational(lo), mpfr_to_rational(hi));
  mpfr_clear(lo);
  mpfr_clear(hi);
  return out;
}

}  // namespace

RationalInterval log2_bounds(const Rational& x, unsigned long prec) {
  if (x <= 0) throw DomainError("log2 of a non-positive value");
  return directed(x, prec,
                  [](mpfr_t r, mpfr_t a, mpfr_rnd_t rnd) { mpfr_log2(r, a, rnd); });
}

RationalInterval log2_bounds(const Dyadic& d, unsigned long prec) {
  if (d.sign() <= 0) throw DomainError("log2 of a non-positive dyadic");
  RationalInterval m = log2_bounds(Rational(d.mantissa()), prec);
  Rational e{d.exponent()};
  return RationalInterval(e + m.lo, e + m.hi);
}

RationalInterval ln2_bounds(unsigned long prec) {
  mpfr_t lo, hi;
  mpfr_init2(lo, prec);
  mpfr_init2(hi, prec);
  mpfr_const_log2(lo, MPFR_RNDD);
  mpfr_const_log2(hi, MPFR_RNDU);
  RationalInterval out(mpfr_to_rational(lo), mpfr_to_rational(hi));
  mpfr_clear(lo);
  mpfr_clear(hi);
  return out;
}

RationalInterval ln_bounds(const Rational& x, unsigned long prec) {
  if (x <= 0) throw DomainError("ln of a non-positive value");
  return directed(x, prec,
                  [](mpfr_t r, mpfr_t a, mpfr_rnd_t rnd) { mpfr_log(r, a, rnd); });
}

RationalInterval inv_e_bounds(unsigned long prec) {
  mpfr_t lo, hi;
  mpfr_init2(lo, prec);
  mpfr_init2(hi, prec);
  mpfr_set_si(lo, -1, MPFR_RNDN);
  mpfr_set_si(hi, -1, MPFR_RNDN);
  mpfr_exp(lo, lo, MPFR_RNDD);
  mpfr_exp(hi, hi, MPFR_RNDU);
  RationalInterval out(mpfr_to_rational(lo), mpfr_to_rational(hi));
  mpfr_clear(lo);
  mpfr_clear(hi);
  return out;
}

Rational exp2_upper(const Rational& x, unsigned long prec) {
  // split x = k + f, k integer, f in [0,1); 2^k stays exact
  Int k;
  mpz_fdiv_q(k.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  Rational f = x - Rational(k);
  Int mag = abs(k);
  if (!mag.fits_ulong_p() || mag.get_ui() > (1ul << 26)) {
    throw DomainError("exp2_upper result too large to materialize");
  }
  mpfr_t v;
  mpfr_init2(v, prec);
  mpfr_set_q(v, f.get_mpq_t(), MPFR_RNDU);
  mpfr_exp2(v, v, MPFR_RNDU);
  Rational frac_pow = mpfr_to_rational(v);
  mpfr_clear(v);
  Rational out = frac_pow;
  if (k >= 0) {
    mpz_mul_2exp(out.get_num_mpz_t(), out.get_num_mpz_t(), mag.get_ui());
  } else {
    mpz_mul_2exp(out.get_den_mpz_t(), out.get_den_mpz_t(), mag.get_ui());
  }
  out.canonicalize();
  return out;
}

RationalInterval ln_inv_bounds(const Dyadic& t, unsigned long prec) {
  RationalInterval l2 = log2_bounds(t, prec);
  RationalInterval ln2 = ln2_bounds(prec);
  // ln(1/t) = -log2(t) * ln 2
  return iv_mul(RationalInterval(-l2.hi, -l2.lo), ln2);
}

}  // namespace patternset
