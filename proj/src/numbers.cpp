#include "patternset/numbers.hpp"

#include <utility>

namespace patternset {

namespace {

// Exponent magnitude above which Dyadic::to_rational refuses to build the
// 2^|e| factor (bit size of the resulting integer).
const unsigned long kMaterializeCapBits = 1ul << 26;  // 64 Mbit, ~8 MB

}  // namespace

Rational parse_rational(const std::string& text) {
  auto star = text.find("*2^");
  if (star != std::string::npos) {
    return Dyadic::parse(text).to_rational();
  }
  Rational r;
  if (r.set_str(text, 10) != 0) {
    throw ConfigError("cannot parse rational literal: '" + text + "'");
  }
  if (r.get_den() == 0) {
    throw ConfigError("zero denominator in rational literal: '" + text + "'");
  }
  r.canonicalize();
  return r;
}

std::string rational_to_string(const Rational& r) {
  Rational c = r;
  c.canonicalize();
  return c.get_str();
}

int sign(const Rational& r) { return sgn(r); }

Rational rational_pow(const Rational& r, long e) {
  if (e == 0) return Rational(1);
  bool invert = e < 0;
  unsigned long ue = invert ? static_cast<unsigned long>(-e)
                            : static_cast<unsigned long>(e);
  if (invert && r == 0) throw DomainError("0 to a negative power");
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), r.get_num_mpz_t(), ue);
  mpz_pow_ui(out.get_den_mpz_t(), r.get_den_mpz_t(), ue);
  if (invert) {
    out = Rational(out.get_den(), out.get_num());
    out.canonicalize();
  }
  return out;
}

Dyadic::Dyadic(Int mantissa, Int exponent)
    : mantissa_(std::move(mantissa)), exponent_(std::move(exponent)) {
  if (mantissa_ == 0) {
    exponent_ = 0;
    return;
  }
  unsigned long tz = mpz_scan1(mantissa_.get_mpz_t(), 0);
  if (tz > 0) {
    mpz_tdiv_q_2exp(mantissa_.get_mpz_t(), mantissa_.get_mpz_t(), tz);
    exponent_ += tz;
  }
}

Dyadic Dyadic::from_rational(const Rational& r) {
  const Int& den = r.get_den();
  // den must be a power of two
  size_t bits = mpz_sizeinbase(den.get_mpz_t(), 2);
  Int p2 = 1;
  mpz_mul_2exp(p2.get_mpz_t(), p2.get_mpz_t(), bits - 1);
  if (p2 != den) throw DomainError("rational is not dyadic: " + r.get_str());
  return Dyadic(r.get_num(), -Int(static_cast<long>(bits - 1)));
}

bool Dyadic::materializable() const {
  Int mag = abs(exponent_);
  return mag.fits_ulong_p() && mag.get_ui() <= kMaterializeCapBits;
}

Rational Dyadic::to_rational() const {
  if (mantissa_ == 0) return Rational(0);
  if (!materializable()) {
    throw DomainError("dyadic exponent too large to materialize: 2^" +
                      exponent_.get_str());
  }
  unsigned long mag = Int(abs(exponent_)).get_ui();
  Rational out;
  if (exponent_ >= 0) {
    mpz_mul_2exp(out.get_num_mpz_t(), mantissa_.get_mpz_t(), mag);
    mpz_set_ui(out.get_den_mpz_t(), 1);
  } else {
    mpz_set(out.get_num_mpz_t(), mantissa_.get_mpz_t());
    mpz_set_ui(out.get_den_mpz_t(), 1);
    mpz_mul_2exp(out.get_den_mpz_t(), out.get_den_mpz_t(), mag);
  }
  out.canonicalize();
  return out;
}

Dyadic Dyadic::operator*(const Dyadic& o) const {
  return Dyadic(mantissa_ * o.mantissa_, exponent_ + o.exponent_);
}

Dyadic Dyadic::operator*(const Int& k) const {
  return Dyadic(mantissa_ * k, exponent_);
}

int Dyadic::compare(const Dyadic& a, const Dyadic& b) {
  return compare_scaled(Rational(1), a, b);
}

// coef * a.m * 2^a.e  vs  b.m * 2^b.e, exactly. Write coef = p/q:
// compare p*a.m*2^d vs q*b.m with d = a.e - b.e. When |d| exceeds the bit
// sizes involved the magnitudes decide; otherwise d is small enough to shift.
int Dyadic::compare_scaled(const Rational& coef, const Dyadic& a,
                           const Dyadic& b) {
  Int lhs_m = coef.get_num() * a.mantissa_;
  Int rhs_m = coef.get_den() * b.mantissa_;
  int sl = sgn(lhs_m), sr = sgn(rhs_m);
  if (sl != sr) return sl < sr ? -1 : 1;
  if (sl == 0) return 0;
  Int d = a.exponent_ - b.exponent_;
  long lb = static_cast<long>(mpz_sizeinbase(lhs_m.get_mpz_t(), 2));
  long rb = static_cast<long>(mpz_sizeinbase(rhs_m.get_mpz_t(), 2));
  // |lhs| in [2^(lb-1), 2^lb), so lhs*2^d < rhs whenever lb + d <= rb - 1.
  if (d + lb <= rb - 1) return -sl;
  if (d + lb - 1 >= rb + 1) return sl;
  // Here |d| <= lb + rb + 2: safe to shift.
  long ds = d.get_si();
  if (ds >= 0) {
    mpz_mul_2exp(lhs_m.get_mpz_t(), lhs_m.get_mpz_t(),
                 static_cast<unsigned long>(ds));
  } else {
    mpz_mul_2exp(rhs_m.get_mpz_t(), rhs_m.get_mpz_t(),
                 static_cast<unsigned long>(-ds));
  }
  return cmp(lhs_m, rhs_m) < 0 ? -1 : (lhs_m == rhs_m ? 0 : 1);
}

std::string Dyadic::to_string() const {
  return mantissa_.get_str() + "*2^" + exponent_.get_str();
}

Dyadic Dyadic::parse(const std::string& text) {
  auto star = text.find("*2^");
  if (star == std::string::npos) {
    throw ConfigError("cannot parse dyadic literal: '" + text + "'");
  }
  Int m, e;
  if (m.set_str(text.substr(0, star), 10) != 0 ||
      e.set_str(text.substr(star + 3), 10) != 0) {
    throw ConfigError("cannot parse dyadic literal: '" + text + "'");
  }
  return Dyadic(m, e);
}

Int pow2_floor_exponent(const Rational& r) {
  if (r <= 0 || r > 1) throw DomainError("pow2_floor_exponent needs (0,1]");
  // smallest e >= 0 with 2^-e <= r, i.e. 2^e >= 1/r
  Rational inv = 1 / r;
  Int num = inv.get_num(), den = inv.get_den();
  Int q = num / den;  // floor
  long bits = static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 2));
  // 2^(bits-1) <= q <= inv < q+1 <= 2^bits
  Int e(bits - 1);
  // check whether 2^(bits-1) >= inv already
  Int p2 = 1;
  mpz_mul_2exp(p2.get_mpz_t(), p2.get_mpz_t(),
               static_cast<unsigned long>(bits - 1));
  if (Rational(p2) >= inv) return e;
  return e + 1;
}

}  // namespace patternset
