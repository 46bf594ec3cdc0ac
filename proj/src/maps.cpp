#include "patternset/maps.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <utility>

namespace patternset {

namespace {

const Rational kQuarter(1, 4);

Rational abs_r(const Rational& r) { return r < 0 ? Rational(-r) : r; }

long parse_long(const std::string& s, const std::string& full) {
  try {
    size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer '" + s + "' in '" + full + "'");
  }
}

Int rat_ceil(const Rational& r) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

// ---------------------------------------------------------------- parsing

struct SignedTerm {
  int sign;
  std::string body;
};

std::vector<SignedTerm> split_terms(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw ConfigError("empty polynomial literal");
  std::vector<SignedTerm> out;
  int sign = 1;
  std::string cur;
  size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    sign = s[0] == '-' ? -1 : 1;
    i = 1;
  }
  for (; i < s.size(); ++i) {
    char c = s[i];
    if ((c == '+' || c == '-') && i > 0 && s[i - 1] != '^' &&
        s[i - 1] != '*' && s[i - 1] != '/') {
      if (cur.empty()) throw ConfigError("dangling sign in '" + text + "'");
      out.push_back({sign, cur});
      cur.clear();
      sign = c == '-' ? -1 : 1;
    } else {
      cur.push_back(c);
    }
  }
  if (cur.empty()) throw ConfigError("dangling sign in '" + text + "'");
  out.push_back({sign, cur});
  return out;
}

// One product term: "3/2*x^2", "x", "2x", "7". Returns (coeff, exponent).
std::pair<Rational, long> parse_uni_term(const std::string& body,
                                         const std::string& full) {
  size_t xpos = body.find('x');
  if (xpos == std::string::npos) {
    return {parse_rational(body), 0};
  }
  std::string coef_part = body.substr(0, xpos);
  if (!coef_part.empty() && coef_part.back() == '*') coef_part.pop_back();
  Rational coeff = coef_part.empty() ? Rational(1) : parse_rational(coef_part);
  long expo = 1;
  size_t rest = xpos + 1;
  if (rest < body.size()) {
    if (body[rest] != '^') {
      throw ConfigError("cannot parse polynomial term in '" + full + "'");
    }
    expo = parse_long(body.substr(rest + 1), full);
    if (expo < 0) throw ConfigError("negative exponent in '" + full + "'");
  }
  return {coeff, expo};
}

}  // namespace

Polynomial::Polynomial(std::vector<Rational> c) : coeffs(std::move(c)) {
  while (coeffs.size() > 1 && coeffs.back() == 0) coeffs.pop_back();
  if (coeffs.size() < 2) {
    throw ConfigError("polynomial must be non-constant");
  }
}

Rational Polynomial::eval(const Rational& x) const {
  Rational acc = coeffs.back();
  for (size_t k = coeffs.size() - 1; k-- > 0;) {
    acc = acc * x + coeffs[k];
  }
  return acc;
}

RationalInterval Polynomial::eval(const RationalInterval& x) const {
  RationalInterval acc = RationalInterval::point(coeffs.back());
  for (size_t k = coeffs.size() - 1; k-- > 0;) {
    acc = iv_add(iv_mul(acc, x),
                 RationalInterval::point(coeffs[k]));
  }
  return acc;
}

Polynomial Polynomial::derivative() const {
  std::vector<Rational> d;
  for (size_t k = 1; k < coeffs.size(); ++k) {
    d.push_back(coeffs[k] * static_cast<long>(k));
  }
  if (d.size() == 1) d.push_back(Rational(0));  // keep type valid: a1 + 0*x
  // a linear polynomial's derivative is constant; represent it as
  // degree-1 with zero leading only if needed
  if (d.back() == 0) {
    // constant derivative c: represent as c + 0*x is invalid (leading 0);
    // callers only evaluate, so return c + 0*x via raw storage
    Polynomial p({Rational(0), Rational(1)});
    p.coeffs = d;
    return p;
  }
  return Polynomial(std::move(d));
}

Polynomial Polynomial::parse(const std::string& text) {
  std::vector<Rational> coeffs;
  for (const SignedTerm& t : split_terms(text)) {
    auto [c, e] = parse_uni_term(t.body, text);
    if (e >= static_cast<long>(coeffs.size())) {
      coeffs.resize(static_cast<size_t>(e) + 1, Rational(0));
    }
    coeffs[static_cast<size_t>(e)] += t.sign * c;
  }
  return Polynomial(std::move(coeffs));
}

std::string Polynomial::to_string() const {
  std::string out;
  for (size_t k = 0; k < coeffs.size(); ++k) {
    const Rational& c = coeffs[k];
    if (c == 0 && !(coeffs.size() == 1)) continue;
    Rational a = abs_r(c);
    std::string term;
    if (k == 0) {
      term = rational_to_string(a);
    } else {
      std::string xs = k == 1 ? "x" : "x^" + std::to_string(k);
      term = a == 1 ? xs : rational_to_string(a) + "*" + xs;
    }
    if (out.empty()) {
      out = (c < 0 ? "-" : "") + term;
    } else {
      out += (c < 0 ? " - " : " + ") + term;
    }
  }
  if (out.empty()) out = "0";
  return out;
}

// ---------------------------------------------------------- conjugator

Conjugator choose_conjugator(const Polynomial& P) {
  long n = P.degree();
  Rational an = abs_r(P.leading());
  Rational tol = std::min(Rational(1), an) / (Int(1) << 30);
  RationalInterval A = iv_nth_root(RationalInterval::point(an),
                                   static_cast<unsigned long>(n), tol);
  Rational lo = 1 / (2 * A.lo);   // >= 1/(2 |a_n|^{1/n})
  Rational hi = Rational(3) / (4 * A.hi);  // <= 3/(4 |a_n|^{1/n})
  if (!(lo < hi)) {
    throw CertificationError("conjugator bracket collapsed; enclosure of "
                             "|a_n|^{1/n} too wide");
  }
  Rational mid = (lo + hi) / 2;
  for (long j = 0; j <= 200; ++j) {
    Int scaled_floor;
    Rational scaled = mid;
    mpz_mul_2exp(scaled.get_num_mpz_t(), scaled.get_num_mpz_t(),
                 static_cast<unsigned long>(j));
    scaled.canonicalize();
    mpz_fdiv_q(scaled_floor.get_mpz_t(), scaled.get_num_mpz_t(),
               scaled.get_den_mpz_t());
    Rational step = Rational(1) / Rational(Int(1) << static_cast<unsigned long>(j));
    Rational below = Rational(scaled_floor) * step;
    std::vector<std::pair<Rational, Int>> cands = {
        {below, scaled_floor}, {below + step, Int(scaled_floor + 1)}};
    // closer to the midpoint first; ties break toward the lower dyadic
    if (mid - cands[0].first > cands[1].first - mid) {
      std::swap(cands[0], cands[1]);
    }
    for (const auto& [cand, k] : cands) {
      if (lo <= cand && cand <= hi) {
        return Conjugator{Dyadic(k, Int(-j)), n,
                          sign(P.leading()) >= 0 ? 1 : -1};
      }
    }
  }
  throw CertificationError("no dyadic found in the conjugator bracket");
}

// ------------------------------------------------------------ threshold

namespace {

struct ThresholdContext {
  const Polynomial* P;
  Polynomial Pd;
  long n;
  int s;
  Rational qr;
  RationalInterval A;  // enclosure of |a_n|^{1/n}
  Rational S;          // sum of |a_k|, k < n
  Int T0;              // tail crossover: 8*S/|a_n| rounded up (>= 1)
};

RationalInterval eval_signed(const ThresholdContext& c, const Polynomial& p,
                             const RationalInterval& x) {
  RationalInterval v = p.eval(x);
  if (c.s < 0) return RationalInterval(-v.hi, -v.lo);
  return v;
}

// derivative enclosure of g = psi o P on a box with sign*P > 0
RationalInterval g_prime_box(const ThresholdContext& c,
                             const RationalInterval& sp,
                             const RationalInterval& spd) {
  RationalInterval num = iv_mul(RationalInterval::point(c.qr), spd);
  if (c.n == 1) return num;
  RationalInterval pw = iv_pow(sp, c.n - 1);
  Rational root_tol = std::min(sp.lo, Rational(1)) / (Int(1) << 20);
  RationalInterval rt =
      iv_nth_root(pw, static_cast<unsigned long>(c.n), root_tol);
  return iv_div(num, iv_mul(RationalInterval::point(Rational(c.n)), rt));
}

bool box_ok(const ThresholdContext& c, const RationalInterval& x) {
  RationalInterval sp = eval_signed(c, *c.P, x);
  if (!(sp.lo > 0)) return false;
  RationalInterval spd = eval_signed(c, c.Pd, x);
  if (!(spd.lo > 0)) return false;
  RationalInterval gd = g_prime_box(c, sp, spd);
  return gd.lo >= kQuarter && gd.hi <= 1;
}

bool certify_from(const ThresholdContext& c, const Int& M) {
  // tail: for x >= T, sign*P = |a_n| x^n (1 + r) with |r| <= rho <= 1/8,
  // likewise for the derivative, so g' lies in
  // q * |a_n|^{1/n} * [(1-rho)/(1+rho), (1+rho)/(1-rho)]
  Int T = std::max(c.T0, Int(M - 1));
  if (T < 1) T = 1;
  Rational rho = c.S / (abs_r(c.P->leading()) * Rational(T));
  if (!(rho <= Rational(1, 8))) return false;
  Rational shrink = (1 - rho) / (1 + rho);
  if (!(c.qr * c.A.lo * shrink >= kQuarter)) return false;
  if (!(c.qr * c.A.hi / shrink <= 1)) return false;

  // finite part [M-1, T] by adaptive subdivision
  Rational left{Int(M - 1)}, right{T};
  if (left >= right) return true;
  const Rational min_width(1, 1 << 12);
  long boxes = 0;
  std::deque<RationalInterval> work = {RationalInterval(left, right)};
  while (!work.empty()) {
    if (++boxes > 200000) {
      throw CertificationError("derivative certification subdivision "
                               "exceeded the box budget");
    }
    RationalInterval box = work.back();
    work.pop_back();
    if (box_ok(c, box)) continue;
    if (box.width() <= min_width) return false;
    // depth-first, left child on top: violations cluster at the left
    // edge of [M-1, T], so a failing run bottoms out quickly
    Rational mid = box.midpoint();
    work.emplace_back(mid, box.hi);
    work.emplace_back(box.lo, mid);
  }
  return true;
}

}  // namespace

ConjugatedMap compute_threshold(const Polynomial& P, const Conjugator& psi) {
  if (psi.n != P.degree()) {
    throw ConfigError("conjugator degree does not match the polynomial");
  }
  ThresholdContext c{&P, P.derivative(), P.degree(),
                     psi.sign, psi.q.to_rational(), RationalInterval(),
                     Rational(0), Int(1)};
  Rational an = abs_r(P.leading());
  Rational tol = std::min(Rational(1), an) / (Int(1) << 30);
  c.A = iv_nth_root(RationalInterval::point(an),
                    static_cast<unsigned long>(c.n), tol);
  for (long k = 0; k < c.n; ++k) c.S += abs_r(P.coeffs[static_cast<size_t>(k)]);
  c.T0 = c.S == 0 ? Int(1) : rat_ceil(8 * c.S / an);
  if (c.T0 < 1) c.T0 = 1;

  // monomial a_n x^n: g(x) = q |a_n|^{1/n} x globally on [0, oo)
  if (c.S == 0) {
    if (c.qr * c.A.lo >= kQuarter && c.qr * c.A.hi <= 1) {
      return ConjugatedMap{P, psi, Int(1)};
    }
    throw CertificationError("monomial slope outside [1/4, 1]");
  }

  const Int cap = Int(1) << 40;
  if (certify_from(c, Int(1))) return ConjugatedMap{P, psi, Int(1)};
  Int hi = 2;
  while (!certify_from(c, hi)) {
    hi *= 2;
    if (hi > cap) {
      throw CertificationError("no certifiable threshold below 2^40");
    }
  }
  Int lo = hi / 2;  // known to fail
  while (hi - lo > 1) {
    Int mid = (lo + hi) / 2;
    if (certify_from(c, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return ConjugatedMap{P, psi, hi};
}

// ------------------------------------------------------------- g maps

RationalInterval g_forward(const ConjugatedMap& cm, const RationalInterval& x,
                           const Rational& tol) {
  if (tol <= 0) throw DomainError("g_forward tolerance must be > 0");
  if (x.lo < Rational(Int(cm.M_P - 1))) {
    throw DomainError("g_forward evaluated below the certified threshold");
  }
  RationalInterval sp = cm.P.eval(x);
  if (cm.psi.sign < 0) sp = RationalInterval(-sp.hi, -sp.lo);
  if (sp.lo < 0) {
    throw DomainError("sign*P negative inside the certified domain");
  }
  RationalInterval rt = iv_nth_root(
      sp, static_cast<unsigned long>(cm.psi.n), tol);
  return iv_mul(RationalInterval::point(cm.psi.q.to_rational()), rt);
}

RationalInterval g_inverse(const ConjugatedMap& cm, const RationalInterval& y,
                           const Rational& tol) {
  if (tol <= 0) throw DomainError("g_inverse tolerance must be > 0");
  Rational lo(cm.M_P);
  Rational check_tol = tol / 16;
  RationalInterval at_lo = g_forward(cm, RationalInterval::point(lo),
                                     check_tol);
  if (!(at_lo.hi <= y.lo)) {
    throw BracketError("target below g at the threshold");
  }
  Rational hi = lo + 1;
  for (int it = 0;; ++it) {
    RationalInterval at_hi = g_forward(cm, RationalInterval::point(hi),
                                       check_tol);
    if (at_hi.lo >= y.hi) break;
    hi = lo + (hi - lo) * 2;
    if (it > 200) throw CertificationError("g_inverse upper bracket search "
                                           "did not terminate");
  }
  PointEnclosureFn f = [&cm](const Rational& x, const Rational& t) {
    return g_forward(cm, RationalInterval::point(x), t);
  };
  return monotone_inverse(f, y, RationalInterval(lo, hi), tol);
}

// ------------------------------------------------------------- affine

AffineMap conjugate_bilipschitz(const AffineMap& f, long L) {
  if (f.slope == 0) throw ConfigError("affine map slope must be nonzero");
  if (L < 2) throw ConfigError("L must be >= 2");
  Rational a = abs_r(f.slope);
  // smallest k with 2^k >= 1/a; then a*2^k < 2 <= L
  long k = 0;
  Rational lam(1);
  while (a * lam < 1) {
    lam *= 2;
    ++k;
    if (k > 100000) throw CertificationError("lambda search overflow");
  }
  while (a * lam / 2 >= 1) {
    lam /= 2;
    --k;
    if (k < -100000) throw CertificationError("lambda search overflow");
  }
  AffineMap out = f;
  out.lambda = Dyadic::pow2(Int(k));
  return out;
}

// --------------------------------------------------------- multivariate

namespace {

// factor: rational literal or "x<idx>[^exp]"
void parse_multi_factor(const std::string& f, Rational& coeff,
                        std::vector<long>& expo, const std::string& full) {
  if (f.empty()) throw ConfigError("empty factor in '" + full + "'");
  if (f[0] == 'x') {
    size_t caret = f.find('^');
    std::string idx_s =
        caret == std::string::npos ? f.substr(1) : f.substr(1, caret - 1);
    long idx = parse_long(idx_s, full);
    if (idx < 1) throw ConfigError("variable index must be >= 1 in '" +
                                   full + "'");
    long e = caret == std::string::npos
                 ? 1
                 : parse_long(f.substr(caret + 1), full);
    if (e < 0) throw ConfigError("negative exponent in '" + full + "'");
    if (idx > static_cast<long>(expo.size())) {
      expo.resize(static_cast<size_t>(idx), 0);
    }
    expo[static_cast<size_t>(idx - 1)] += e;
  } else {
    coeff *= parse_rational(f);
  }
}

}  // namespace

long MultiPoly::total_degree() const {
  long d = 0;
  for (const Term& t : terms) {
    if (t.coeff == 0) continue;
    long s = 0;
    for (long e : t.exponents) s += e;
    d = std::max(d, s);
  }
  return d;
}

MultiPoly MultiPoly::parse(const std::string& text) {
  MultiPoly out;
  long maxvar = 1;
  for (const SignedTerm& st : split_terms(text)) {
    Term term;
    term.coeff = Rational(st.sign);
    std::string cur;
    std::vector<std::string> factors;
    for (char ch : st.body) {
      if (ch == '*') {
        factors.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    factors.push_back(cur);
    for (const std::string& f : factors) {
      parse_multi_factor(f, term.coeff, term.exponents, text);
    }
    maxvar = std::max(maxvar, static_cast<long>(term.exponents.size()));
    out.terms.push_back(std::move(term));
  }
  out.nvars = maxvar;
  for (Term& t : out.terms) {
    t.exponents.resize(static_cast<size_t>(maxvar), 0);
  }
  return out;
}

namespace {

// value of the top-degree form at (1, lam_2, ..., lam_N)
Rational leading_form(const MultiPoly& p, const std::vector<Rational>& lam) {
  long d = p.total_degree();
  Rational acc(0);
  for (const MultiPoly::Term& t : p.terms) {
    long s = 0;
    for (long e : t.exponents) s += e;
    if (s != d) continue;
    Rational v = t.coeff;
    for (size_t j = 1; j < t.exponents.size(); ++j) {
      v *= rational_pow(lam[j - 1], t.exponents[j]);
    }
    acc += v;
  }
  return acc;
}

Polynomial substitute(const MultiPoly& p, const std::vector<Rational>& lam) {
  long d = p.total_degree();
  std::vector<Rational> coeffs(static_cast<size_t>(d) + 1, Rational(0));
  for (const MultiPoly::Term& t : p.terms) {
    long s = 0;
    for (long e : t.exponents) s += e;
    Rational v = t.coeff;
    for (size_t j = 1; j < t.exponents.size(); ++j) {
      v *= rational_pow(lam[j - 1], t.exponents[j]);
    }
    coeffs[static_cast<size_t>(s)] += v;
  }
  return Polynomial(std::move(coeffs));
}

// all tuples in [1..r]^dim with max == r, lexicographic
bool next_tuple(std::vector<long>& t, long r) {
  for (size_t i = t.size(); i-- > 0;) {
    if (t[i] < r) {
      ++t[i];
      for (size_t j = i + 1; j < t.size(); ++j) t[j] = 1;
      return true;
    }
  }
  return false;
}

}  // namespace

Reduction reduce_multivariate(const std::vector<MultiPoly>& polys) {
  if (polys.empty()) throw ConfigError("empty polynomial batch");
  long nvars = 1;
  for (const MultiPoly& p : polys) {
    if (p.total_degree() < 1) {
      throw ConfigError("multivariate polynomial must be non-constant");
    }
    nvars = std::max(nvars, p.nvars);
  }
  std::vector<MultiPoly> padded = polys;
  for (MultiPoly& p : padded) {
    p.nvars = nvars;
    for (MultiPoly::Term& t : p.terms) {
      t.exponents.resize(static_cast<size_t>(nvars), 0);
    }
  }
  size_t dim = static_cast<size_t>(nvars - 1);
  std::vector<Rational> lam(dim, Rational(1));
  auto all_nonzero = [&]() {
    for (const MultiPoly& p : padded) {
      if (leading_form(p, lam) == 0) return false;
    }
    return true;
  };
  bool found = false;
  if (dim == 0) {
    found = all_nonzero();  // no lambdas; forms are plain leading coeffs
  } else {
    for (long r = 1; r <= 10000 && !found; ++r) {
      std::vector<long> t(dim, 1);
      t.back() = 0;  // so the first next_tuple yields (1,...,1)
      while (next_tuple(t, r)) {
        if (*std::max_element(t.begin(), t.end()) != r) continue;
        for (size_t i = 0; i < dim; ++i) lam[i] = Rational(t[i]);
        if (all_nonzero()) {
          found = true;
          break;
        }
      }
    }
  }
  if (!found) {
    throw CertificationError("no integer point keeps all leading forms "
                             "nonzero (search box exhausted)");
  }
  Reduction out;
  out.lambdas = lam;
  for (const MultiPoly& p : padded) out.univariate.push_back(substitute(p, lam));
  return out;
}

}  // namespace patternset
