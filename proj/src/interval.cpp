#include "patternset/interval.hpp"

#include <algorithm>

namespace patternset {

namespace {

const long kBisectionCap = 1000000;

Rational int_pow(const Rational& r, unsigned long e) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), r.get_num_mpz_t(), e);
  mpz_pow_ui(out.get_den_mpz_t(), r.get_den_mpz_t(), e);
  return out;
}

// [lo, hi] with lo <= r^(1/n) <= hi and hi - lo <= tol (or lo == hi when the
// root is rational).
RationalInterval root_bounds(const Rational& r, unsigned long n,
                             const Rational& tol) {
  if (r < 0) throw DomainError("nth root of a negative value");
  if (n == 0) throw DomainError("0th root");
  if (r == 0 || r == 1 || n == 1) return RationalInterval::point(r);
  if (tol <= 0) throw DomainError("nth root tolerance must be positive");

  // Exact rational root: num and den are coprime, so the root is rational
  // iff both are perfect n-th powers.
  Int rn, rd;
  int exact_n = mpz_root(rn.get_mpz_t(), r.get_num_mpz_t(), n);
  int exact_d = mpz_root(rd.get_mpz_t(), r.get_den_mpz_t(), n);
  if (exact_n && exact_d) {
    Rational root(rn, rd);
    root.canonicalize();
    return RationalInterval::point(root);
  }

  // Integer bracket from the truncated root of floor(r).
  Int fl = r.get_num() / r.get_den();
  Int a0;
  mpz_root(a0.get_mpz_t(), fl.get_mpz_t(), n);
  Rational lo(a0), hi(a0 + 1);

  for (long step = 0; hi - lo > tol; ++step) {
    if (step >= kBisectionCap) {
      throw CertificationError("nth-root bisection exceeded step limit");
    }
    Rational mid = (lo + hi) / 2;
    if (int_pow(mid, n) <= r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return RationalInterval(lo, hi);
}

}  // namespace

RationalInterval::RationalInterval(Rational l, Rational h)
    : lo(std::move(l)), hi(std::move(h)) {
  if (lo > hi) throw DomainError("interval endpoints out of order");
}

RationalInterval iv_add(const RationalInterval& a, const RationalInterval& b) {
  return RationalInterval(a.lo + b.lo, a.hi + b.hi);
}

RationalInterval iv_sub(const RationalInterval& a, const RationalInterval& b) {
  return RationalInterval(a.lo - b.hi, a.hi - b.lo);
}

RationalInterval iv_mul(const RationalInterval& a, const RationalInterval& b) {
  Rational p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo,
           p4 = a.hi * b.hi;
  return RationalInterval(std::min({p1, p2, p3, p4}),
                          std::max({p1, p2, p3, p4}));
}

RationalInterval iv_div(const RationalInterval& a, const RationalInterval& b) {
  if (b.lo <= 0 && b.hi >= 0) {
    throw DomainError("division by an interval containing zero");
  }
  return iv_mul(a, RationalInterval(1 / b.hi, 1 / b.lo));
}

RationalInterval iv_pow(const RationalInterval& a, long e) {
  if (e == 0) return RationalInterval::point(Rational(1));
  if (e < 0) {
    RationalInterval p = iv_pow(a, -e);
    if (p.lo <= 0 && p.hi >= 0) throw DomainError("negative power across 0");
    return RationalInterval(1 / p.hi, 1 / p.lo);
  }
  unsigned long ue = static_cast<unsigned long>(e);
  Rational plo = int_pow(a.lo, ue), phi = int_pow(a.hi, ue);
  if (ue % 2 == 1 || a.lo >= 0) return RationalInterval(plo, phi);
  if (a.hi <= 0) return RationalInterval(phi, plo);
  return RationalInterval(Rational(0), std::max(plo, phi));
}

RationalInterval iv_nth_root(const RationalInterval& a, unsigned long n,
                             const Rational& tol) {
  if (a.lo < 0) throw DomainError("nth root of an interval below zero");
  Rational half_tol = tol / 2;
  RationalInterval lo_b = root_bounds(a.lo, n, half_tol);
  RationalInterval hi_b =
      a.lo == a.hi ? lo_b : root_bounds(a.hi, n, half_tol);
  return RationalInterval(lo_b.lo, hi_b.hi);
}

Rational nth_root_lower(const Rational& r, unsigned long n,
                        const Rational& tol) {
  return root_bounds(r, n, tol).lo;
}

Rational nth_root_upper(const Rational& r, unsigned long n,
                        const Rational& tol) {
  return root_bounds(r, n, tol).hi;
}

namespace {

// Enclosure [lo, hi] of the unique x in `search` with f(x) == target.
RationalInterval locate_preimage(const PointEnclosureFn& f,
                                 const Rational& target,
                                 const RationalInterval& search,
                                 const Rational& tol) {
  Rational lo = search.lo, hi = search.hi;
  Rational eval_tol = tol / 8;
  long refinements = 0;
  for (long step = 0; hi - lo > tol; ++step) {
    if (step >= kBisectionCap) {
      throw CertificationError("monotone-inverse bisection exceeded limit");
    }
    Rational mid = (lo + hi) / 2;
    RationalInterval e = f(mid, eval_tol);
    if (e.hi <= target) {
      lo = mid;
    } else if (e.lo >= target) {
      hi = mid;
    } else if (e.lo == e.hi) {
      // exact hit
      return RationalInterval::point(mid);
    } else {
      eval_tol /= 4;
      if (++refinements > 64) {
        throw CertificationError(
            "monotone-inverse evaluation cannot separate from target");
      }
    }
  }
  return RationalInterval(lo, hi);
}

}  // namespace

RationalInterval monotone_inverse(const PointEnclosureFn& f,
                                  const RationalInterval& y,
                                  const RationalInterval& search,
                                  const Rational& tol) {
  if (tol <= 0) throw DomainError("monotone_inverse tolerance must be > 0");
  Rational check_tol = tol / 8;
  RationalInterval f_lo = f(search.lo, check_tol);
  RationalInterval f_hi = f(search.hi, check_tol);
  if (!(f_lo.hi <= y.lo) || !(f_hi.lo >= y.hi)) {
    throw BracketError("target not bracketed by f over the search interval");
  }
  Rational side_tol = tol / 2;
  RationalInterval x1 = locate_preimage(f, y.lo, search, side_tol);
  RationalInterval x2 =
      y.lo == y.hi ? x1 : locate_preimage(f, y.hi, search, side_tol);
  return RationalInterval(x1.lo, x2.hi);
}

}  // namespace patternset
