#include "patternset/dimfun.hpp"

#include <mpfr.h>

#include <algorithm>

#include "patternset/logdom.hpp"

namespace patternset {

namespace {

unsigned long prec_for_tol(const Rational& tol) {
  if (tol >= 1) return 128;
  Rational inv = 1 / tol;
  Int num_ceil = inv.get_num() / inv.get_den() + 1;
  return 128 + static_cast<unsigned long>(
                   mpz_sizeinbase(num_ceil.get_mpz_t(), 2));
}

RationalInterval exp_bounds(const Rational& x, unsigned long prec) {
  mpfr_t lo, hi;
  mpfr_init2(lo, prec);
  mpfr_init2(hi, prec);
  mpfr_set_q(lo, x.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi, x.get_mpq_t(), MPFR_RNDU);
  mpfr_exp(lo, lo, MPFR_RNDD);
  mpfr_exp(hi, hi, MPFR_RNDU);
  // round-trip through exact rationals
  Int mlo, mhi;
  mpfr_exp_t elo = mpfr_get_z_2exp(mlo.get_mpz_t(), lo);
  mpfr_exp_t ehi = mpfr_get_z_2exp(mhi.get_mpz_t(), hi);
  mpfr_clear(lo);
  mpfr_clear(hi);
  auto scale = [](const Int& m, mpfr_exp_t e) {
    Rational r(m);
    if (e >= 0) {
      mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(),
                   static_cast<unsigned long>(e));
    } else {
      mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(),
                   static_cast<unsigned long>(-e));
    }
    r.canonicalize();
    return r;
  };
  return RationalInterval(scale(mlo, elo), scale(mhi, ehi));
}

RationalInterval power_enclosure(const Rational& x, const Rational& alpha,
                                 const Rational& tol) {
  long p = alpha.get_num().get_si();
  unsigned long q = alpha.get_den().get_ui();
  return iv_nth_root(iv_pow(RationalInterval::point(x), p), q, tol);
}

}  // namespace

DimensionFunction DimensionFunction::power(const Rational& alpha) {
  if (alpha <= 0) throw ConfigError("power dimension function needs alpha > 0");
  return DimensionFunction(Kind::Power, alpha, 0,
                           "pow:" + alpha.get_str());
}

DimensionFunction DimensionFunction::log_inverse() {
  return DimensionFunction(Kind::LogInverse, Rational(0), 0, "loginv");
}

DimensionFunction DimensionFunction::power_log(const Rational& alpha,
                                               long beta) {
  if (alpha <= 0) throw ConfigError("powlog needs alpha > 0");
  if (beta > 0 && Rational(beta) > alpha) {
    throw ConfigError("powlog with beta > alpha is not monotone on (0,1/e]");
  }
  return DimensionFunction(Kind::PowerLog, alpha, beta,
                           "powlog:" + alpha.get_str() + ":" +
                               std::to_string(beta));
}

DimensionFunction DimensionFunction::parse(const std::string& spec) {
  if (spec == "loginv") return log_inverse();
  if (spec.rfind("pow:", 0) == 0) {
    return power(parse_rational(spec.substr(4)));
  }
  if (spec.rfind("powlog:", 0) == 0) {
    std::string rest = spec.substr(7);
    auto colon = rest.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("powlog spec needs two parameters: '" + spec + "'");
    }
    Rational a = parse_rational(rest.substr(0, colon));
    long b = std::stol(rest.substr(colon + 1));
    return power_log(a, b);
  }
  throw ConfigError("unknown dimension function spec: '" + spec + "'");
}

RationalInterval DimensionFunction::enclosure(const Rational& x,
                                              const Rational& tol) const {
  if (x < 0 || x > 1) throw DomainError("h evaluation outside [0,1]");
  if (tol <= 0) throw DomainError("h enclosure tolerance must be > 0");
  if (x == 0) return RationalInterval::point(Rational(0));
  unsigned long prec = prec_for_tol(tol);

  if (kind_ == Kind::Power) return power_enclosure(x, alpha_, tol);

  RationalInterval inv_e = inv_e_bounds(prec);
  if (kind_ == Kind::LogInverse) {
    auto log_branch = [&]() {
      RationalInterval ln_inv = ln_bounds(1 / x, prec);
      return RationalInterval(1 / ln_inv.hi, 1 / ln_inv.lo);
    };
    auto lin_branch = [&]() {
      return RationalInterval(1 + x - inv_e.hi, 1 + x - inv_e.lo);
    };
    if (x <= inv_e.lo) return log_branch();
    if (x >= inv_e.hi) return lin_branch();
    RationalInterval a = log_branch(), b = lin_branch();
    return RationalInterval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
  }

  // PowerLog
  auto log_branch = [&]() {
    RationalInterval ln_term =
        iv_pow(ln_bounds(1 / x, prec), beta_);
    Rational root_tol = tol / (2 * std::max(Rational(1), ln_term.hi));
    return iv_mul(power_enclosure(x, alpha_, root_tol), ln_term);
  };
  auto lin_branch = [&]() {
    RationalInterval at_e = exp_bounds(-alpha_, prec);  // h(e^-1) = e^-alpha
    return RationalInterval(at_e.lo + x - inv_e.hi, at_e.hi + x - inv_e.lo);
  };
  if (x <= inv_e.lo) return log_branch();
  if (x >= inv_e.hi) return lin_branch();
  RationalInterval a = log_branch(), b = lin_branch();
  return RationalInterval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

Rational DimensionFunction::log2_upper(const Dyadic& t) const {
  if (t.sign() <= 0) throw DomainError("log2_upper needs t > 0");
  RationalInterval l2 = log2_bounds(t);
  if (l2.hi > -2) {
    throw DomainError("log-domain h bound requires log2(t) <= -2");
  }
  if (kind_ == Kind::Power) return alpha_ * l2.hi;

  RationalInterval li = ln_inv_bounds(t);  // >= 2*ln2 > 1 here
  if (kind_ == Kind::LogInverse) {
    return -log2_bounds(li.lo).lo;
  }
  Rational log_term;
  if (beta_ >= 0) {
    log_term = Rational(beta_) * log2_bounds(li.hi).hi;
  } else {
    log_term = Rational(beta_) * log2_bounds(li.lo).lo;
  }
  return alpha_ * l2.hi + log_term;
}

Rational h_upper(const DimensionFunction& h, const RationalInterval& t,
                 const Rational& tol) {
  if (t.lo < 0 || t.hi > 1) throw DomainError("h_upper needs t within [0,1]");
  if (t.hi == 0) return Rational(0);
  return h.enclosure(t.hi, tol).hi;
}

ComparisonEvidence h_compare(const DimensionFunction& h1,
                             const DimensionFunction& h2,
                             const std::vector<Rational>& probes) {
  for (size_t i = 0; i < probes.size(); ++i) {
    if (probes[i] <= 0 || probes[i] > 1) {
      throw DomainError("h_compare probes must lie in (0,1]");
    }
    if (i > 0 && probes[i] >= probes[i - 1]) {
      throw DomainError("h_compare probes must be strictly decreasing");
    }
  }
  ComparisonEvidence out;
  for (const Rational& x : probes) {
    Rational tol = x * x / (1 << 20);
    RationalInterval r1 = h1.enclosure(x, tol);
    RationalInterval r2 = h2.enclosure(x, tol);
    out.probes.push_back({x, iv_div(r1, r2)});
  }
  bool decreasing = out.probes.size() >= 2;
  for (size_t i = 1; i < out.probes.size(); ++i) {
    if (out.probes[i].ratio.hi >= out.probes[i - 1].ratio.hi) {
      decreasing = false;
      break;
    }
  }
  out.consistent = decreasing && !out.probes.empty() &&
                   out.probes.back().ratio.hi < Rational(1, 1000);
  return out;
}

}  // namespace patternset
