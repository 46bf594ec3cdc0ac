#include "patternset/construction.hpp"

#include <algorithm>

#include "patternset/logdom.hpp"

namespace patternset {

namespace {

// Exponent magnitude caps. The builder switches from exact rational
// arithmetic to certified log2-domain decisions early (root extraction at
// huge denominators is the bottleneck); the literal checker re-verifies
// exactly up to a much larger cap. Past kExponentCapBits the exponent
// integer itself is declared unrepresentable (slowly decaying h forces
// exponent towers).
const unsigned long kBuilderExactBits = 600;
const unsigned long kCheckerExactBits = 20000;
const unsigned long kExponentCapBits = 1ul << 24;

Int rat_floor(const Rational& r) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

Int rat_ceil(const Rational& r) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

bool exponent_small(const Int& e, unsigned long cap) {
  Int mag = abs(e);
  return mag.fits_ulong_p() && mag.get_ui() <= cap;
}

// Tolerance below the smallest possible value of h on (0,t], so that
// h_upper's slack stays relative:  h(t) >= t^(ceil(alpha)+|beta|) for the
// power families (t <= 1/ln(1/t) on (0,1]) and h(t) >= t for loginv.
Rational h_tol(const DimensionFunction& h, const Rational& t) {
  Rational base = t;
  if (h.kind() != DimensionFunction::Kind::LogInverse) {
    long k = rat_ceil(h.alpha()).get_si();
    if (h.beta() < 0) k += -h.beta();
    base = rational_pow(t, k);
  }
  return base / (Int(1) << 20);
}

void check_exponent_cap(const Int& e, long level) {
  if (mpz_sizeinbase(e.get_mpz_t(), 2) > kExponentCapBits) {
    throw CertificationError(
        "delta exponent exceeds the representation cap at level " +
        std::to_string(level) +
        "; the indexed inequality forces an exponent tower for this h");
  }
}

struct BuildContext {
  const DimensionFunction* h;
  long L;
  long N;
  SqrtBounds sq;
  Rational geo_coef;      // 4 L sqrt(N)_up
  Rational fit_coef_inv;  // 1/K, fit constraint delta_m <= K delta_{m-1}
};

// Indexed inequality at level m for pair index i, strengthened by the
// grid-count factor 4 L sqrt(N) on the first coordinate (implies the
// literal lemma condition; see the measure certificate).
bool indexed_ok(const BuildContext& c, const Dyadic& prev, const Dyadic& cur,
                long m, long i) {
  auto [n1, n2] = PairEnumeration::pair_at(i);
  Dyadic t = cur * Int(n2);
  if (Dyadic::compare(t, Dyadic::one()) > 0) return false;
  Rational a_coef = c.geo_coef * n1;

  if (exponent_small(prev.exponent(), kBuilderExactBits) &&
      exponent_small(cur.exponent(), kBuilderExactBits)) {
    Rational r = rational_pow(a_coef / prev.to_rational() + 1, c.N);
    Rational tr = t.to_rational();
    Rational u = c.h->enclosure(tr, h_tol(*c.h, tr)).hi;
    return r * u < Rational(1, m);
  }

  // log2 route: A/prev >= 1 always here (a_coef >= 8, prev <= 1), and
  // log2(A/prev + 1) <= log2(A/prev) + slop with slop = 2^-19 once
  // A/prev >= 2^20.
  Rational log2_a = log2_bounds(a_coef / Rational(prev.mantissa())).hi -
                    Rational(prev.exponent());
  Rational slop = prev.exponent() <= -20 ? Rational(1, 1 << 19) : Rational(1);
  Rational ub = Rational(c.N) * (log2_a + slop) + c.h->log2_upper(t);
  Rational rhs = -log2_bounds(Rational(m)).hi - Rational(1, 16);
  return ub < rhs;
}

bool admissible(const BuildContext& c, const Dyadic& prev, const Int& e,
                long m) {
  Dyadic cur = Dyadic::pow2(-e);
  if (Dyadic::compare_scaled(c.geo_coef, cur, prev) > 0) return false;
  if (Dyadic::compare_scaled(c.fit_coef_inv, cur, prev) > 0) return false;
  for (long i = 1; i <= m; ++i) {
    if (!indexed_ok(c, prev, cur, m, i)) return false;
  }
  return true;
}

// Certified sufficient exponent for pair i at level m, used to seed the
// search when the admissible region is far away.
Int exponent_estimate(const BuildContext& c, const Dyadic& prev, long m,
                      long i) {
  auto [n1, n2] = PairEnumeration::pair_at(i);
  Rational a_coef = c.geo_coef * n1;
  Rational log2_a = log2_bounds(a_coef / Rational(prev.mantissa())).hi -
                    Rational(prev.exponent());
  if (log2_a < 0) log2_a = 0;
  Rational slop = prev.exponent() <= -20 ? Rational(1, 1 << 19) : Rational(1);
  // need  N (log2_a + slop) + log2 h(n2 * 2^-e)  <  -log2 m - 1/16
  Rational target = -log2_bounds(Rational(m)).hi - Rational(1, 8) -
                    Rational(c.N) * (log2_a + slop);
  Rational log2_n2 = log2_bounds(Rational(n2)).hi;

  const DimensionFunction& h = *c.h;
  switch (h.kind()) {
    case DimensionFunction::Kind::Power:
      // alpha (log2 n2 - e) < target
      return rat_ceil(log2_n2 - target / h.alpha()) + 2;
    case DimensionFunction::Kind::LogInverse: {
      // need ln(1/t) > 2^-target
      Int neg_t = rat_ceil(-target);
      if (neg_t < 1) neg_t = 1;
      if (!neg_t.fits_ulong_p() || neg_t.get_ui() + 1 > kExponentCapBits) {
        throw CertificationError(
            "delta exponent exceeds the representation cap at level " +
            std::to_string(m) + " (loginv tower)");
      }
      Rational pow_t = exp2_upper(-target);
      return rat_ceil(pow_t / ln2_bounds().lo + log2_n2) + 2;
    }
    case DimensionFunction::Kind::PowerLog: {
      // seed with the pure-power estimate; the log factor is minor and the
      // caller climbs from here.
      return rat_ceil(log2_n2 - target / h.alpha()) + 2;
    }
  }
  return Int(2);
}

}  // namespace

std::pair<long, long> PairEnumeration::pair_at(long i) {
  if (i < 1) throw IndexError("pair enumeration index must be >= 1");
  long s = 2;
  long before = 0;  // pairs on diagonals < s
  while (before + (s - 1) < i) {
    before += s - 1;
    ++s;
  }
  long pos = i - before;  // 1-based within diagonal, n1 = pos
  return {pos, s - pos};
}

long PairEnumeration::index_of(long n1, long n2) {
  if (n1 < 1 || n2 < 1) throw IndexError("pair coordinates must be >= 1");
  long s = n1 + n2;
  return (s - 1) * (s - 2) / 2 + n1;
}

SqrtBounds sqrt_n_bounds(long N) {
  if (N < 1) throw ConfigError("ambient dimension must be >= 1");
  RationalInterval r = iv_nth_root(RationalInterval::point(Rational(N)), 2,
                                   Rational(1, Int(1) << 48));
  return {r.lo, r.hi};
}

const Dyadic& DeltaSequence::delta(long n) const {
  if (n < 0 || n > depth()) {
    throw IndexError("delta level out of range: " + std::to_string(n));
  }
  return deltas[static_cast<size_t>(n)];
}

DeltaSequence build_delta_sequence(const DimensionFunction& h, long L, long N,
                                   long depth) {
  if (L < 2) throw ConfigError("L must be >= 2");
  if (N < 1) throw ConfigError("N must be >= 1");
  if (depth < 0) throw ConfigError("depth must be >= 0");

  BuildContext c;
  c.h = &h;
  c.L = L;
  c.N = N;
  c.sq = sqrt_n_bounds(N);
  c.geo_coef = Rational(4 * L) * c.sq.hi;
  Rational k_fit =
      (Rational(1, 2 * L) - c.sq.hi / (Rational(4 * L) * c.sq.lo)) / c.sq.hi;
  if (k_fit <= 0) {
    throw CertificationError("sqrt(N) enclosure too loose for the fit bound");
  }
  c.fit_coef_inv = 1 / k_fit;

  DeltaSequence seq;
  seq.L = L;
  seq.N = N;
  seq.h_label = h.label();
  seq.deltas.push_back(Dyadic::one());

  for (long m = 1; m <= depth; ++m) {
    const Dyadic& prev = seq.deltas.back();

    // smallest exponent passing the two geometric constraints
    Int e_low = -prev.exponent() + 1;
    while (!(Dyadic::compare_scaled(c.geo_coef, Dyadic::pow2(-e_low), prev) <=
                 0 &&
             Dyadic::compare_scaled(c.fit_coef_inv, Dyadic::pow2(-e_low),
                                    prev) <= 0)) {
      ++e_low;
    }

    Int e_seed = e_low;
    for (long i = 1; i <= m; ++i) {
      e_seed = std::max(e_seed, exponent_estimate(c, prev, m, i));
    }
    check_exponent_cap(e_seed, m);

    Int e_hi = e_seed;
    long climbs = 0;
    while (!admissible(c, prev, e_hi, m)) {
      e_hi *= 2;
      check_exponent_cap(e_hi, m);
      if (++climbs > 80) {
        throw CertificationError("no admissible delta found at level " +
                                 std::to_string(m));
      }
    }

    // smallest admissible exponent in (e_low-1, e_hi]; restrict the binary
    // search to a bounded window when the range is astronomical.
    Int lo = e_low - 1;  // known infeasible or sentinel below range
    if (e_hi - lo > (Int(1) << 16)) lo = e_hi - (Int(1) << 16);
    while (e_hi - lo > 1) {
      Int mid = (lo + e_hi) / 2;
      if (admissible(c, prev, mid, m)) {
        e_hi = mid;
      } else {
        lo = mid;
      }
    }
    seq.deltas.push_back(Dyadic::pow2(-e_hi));
  }
  return seq;
}

DeltaCheckReport check_delta_sequence(const DeltaSequence& seq,
                                      const DimensionFunction& h) {
  DeltaCheckReport rep;
  auto fail = [&rep](std::string why) {
    if (rep.ok) {
      rep.ok = false;
      rep.first_failure = std::move(why);
    }
  };
  if (seq.deltas.empty() || !(seq.deltas[0] == Dyadic::one())) {
    fail("delta_0 != 1");
    return rep;
  }
  SqrtBounds sq = sqrt_n_bounds(seq.N);
  Rational geo_coef = Rational(4 * seq.L) * sq.hi;

  for (long m = 1; m <= seq.depth(); ++m) {
    const Dyadic& prev = seq.delta(m - 1);
    const Dyadic& cur = seq.delta(m);
    if (Dyadic::compare_scaled(geo_coef, cur, prev) > 0) {
      fail("geometric decay fails at level " + std::to_string(m));
      return rep;
    }
    for (long i = 1; i <= m; ++i) {
      auto [n1, n2] = PairEnumeration::pair_at(i);
      Dyadic t = cur * Int(n2);
      if (Dyadic::compare(t, Dyadic::one()) > 0) {
        fail("argument n2*delta_m exceeds 1 at level " + std::to_string(m));
        return rep;
      }
      bool ok;
      if (exponent_small(prev.exponent(), kCheckerExactBits) &&
          exponent_small(cur.exponent(), kCheckerExactBits)) {
        // literal replay with h_upper on materialized rationals
        Rational r =
            rational_pow(Rational(n1) / prev.to_rational() + 1, seq.N);
        Rational tr = t.to_rational();
        Rational u = h_upper(h, RationalInterval::point(tr), h_tol(h, tr));
        ok = r * u < Rational(1, m);
      } else {
        Rational log2_r = log2_bounds(Rational(n1) /
                                      Rational(prev.mantissa()))
                              .hi -
                          Rational(prev.exponent());
        if (log2_r < 0) log2_r = 0;
        Rational slop =
            prev.exponent() <= -20 ? Rational(1, 1 << 19) : Rational(1);
        Rational ub = Rational(seq.N) * (log2_r + slop) + h.log2_upper(t);
        ok = ub < -log2_bounds(Rational(m)).hi;
      }
      if (!ok) {
        fail("indexed inequality fails at level " + std::to_string(m) +
             ", pair index " + std::to_string(i));
        return rep;
      }
    }
  }
  return rep;
}

bool check_nesting_fit(const DeltaSequence& seq, long m, long mp) {
  if (m < 1 || mp <= m || mp > seq.depth()) {
    throw IndexError("nesting-fit levels out of range");
  }
  SqrtBounds sq = sqrt_n_bounds(seq.N);
  const Dyadic& d_m = seq.delta(m);
  const Dyadic& d_pm1 = seq.delta(mp - 1);
  const Dyadic& d_p = seq.delta(mp);

  if (d_m.materializable() && d_pm1.materializable() && d_p.materializable()) {
    Rational lhs = sq.hi * (d_pm1.to_rational() / (Rational(4 * seq.L) * sq.lo) +
                            d_p.to_rational());
    return lhs <= d_m.to_rational() / (2 * seq.L);
  }
  // Chain route: the per-level inequality at mp plus monotonicity.
  //   sqrt_up (d_{mp-1}/(4L sqrt_lo) + d_mp) <= d_{mp-1}/(2L) <= d_m/(2L)
  // first inequality <=> (1/K) d_mp <= d_{mp-1}
  Rational k_fit =
      (Rational(1, 2 * seq.L) - sq.hi / (Rational(4 * seq.L) * sq.lo)) /
      sq.hi;
  if (k_fit <= 0) return false;
  return Dyadic::compare_scaled(1 / k_fit, d_p, d_pm1) <= 0 &&
         Dyadic::compare(d_pm1, d_m) <= 0;
}

GridLevel grid_level(const DeltaSequence& seq, long n) {
  if (n < 1 || n > seq.depth()) {
    throw IndexError("grid level out of range: " + std::to_string(n));
  }
  const Dyadic& prev = seq.delta(n - 1);
  const Dyadic& cur = seq.delta(n);
  if (!prev.materializable() || !cur.materializable()) {
    throw DomainError("grid level too deep to materialize");
  }
  SqrtBounds sq = sqrt_n_bounds(seq.N);
  GridLevel g;
  g.n = n;
  g.delta = cur;
  g.gap = prev.to_rational() / (Rational(4 * seq.L) * sq.lo);
  g.period = cur.to_rational() + g.gap;
  g.offset = 0;
  return g;
}

RationalInterval GridLevel::interval(const Int& k) const {
  if (k < 0) throw IndexError("grid interval index must be >= 0");
  Rational start = offset + Rational(k) * period;
  return RationalInterval(start, start + delta.to_rational());
}

Int GridLevel::index_at_or_below(const Rational& x) const {
  Rational q = (x - offset) / period;
  Int k = rat_floor(q);
  if (k < 0) k = 0;
  return k;
}

Int GridLevel::index_at_or_above(const Rational& x) const {
  Rational q = (x - offset) / period;
  Int k = rat_ceil(q);
  if (k < 0) k = 0;
  return k;
}

std::vector<ScheduleEntry> schedule(const std::vector<long>& owners,
                                    long depth) {
  if (depth < 1) throw ConfigError("schedule depth must be >= 1");
  std::vector<long> sorted = owners;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("duplicate owner indices in schedule");
  }
  for (long r : owners) {
    if (r < 1) throw ConfigError("owner indices must be >= 1");
    if (r > 60) throw ConfigError("owner index too large");
  }
  std::vector<ScheduleEntry> out;
  std::vector<long> next_k(owners.size(), 1);
  while (static_cast<long>(out.size()) < depth) {
    long best = -1;
    long best_m = 0;
    for (size_t i = 0; i < owners.size(); ++i) {
      long m = (2 * next_k[i] - 1) * (1L << (owners[i] - 1));
      if (best < 0 || m < best_m) {
        best = static_cast<long>(i);
        best_m = m;
      }
    }
    out.push_back({best_m, owners[static_cast<size_t>(best)],
                   next_k[static_cast<size_t>(best)]});
    ++next_k[static_cast<size_t>(best)];
  }
  return out;
}

std::vector<RationalInterval> kset_intervals(const DeltaSequence& seq, long j,
                                             long truncation,
                                             const RationalInterval& window) {
  if (truncation < 1) throw ConfigError("truncation must be >= 1");
  if (window.lo < 0) throw DomainError("window must lie in [0,inf)");
  long max_level = (2 * truncation - 1) * (1L << (j - 1));
  if (j < 1 || max_level > seq.depth()) {
    throw IndexError("kset truncation exceeds sequence depth");
  }
  std::vector<RationalInterval> pieces = {window};
  for (long k = 1; k <= truncation; ++k) {
    long level = (2 * k - 1) * (1L << (j - 1));
    GridLevel g = grid_level(seq, level);
    std::vector<RationalInterval> next;
    for (const RationalInterval& piece : pieces) {
      Rational d = g.delta.to_rational();
      Int idx = g.index_at_or_above(piece.lo - d);
      for (; Rational(idx) * g.period <= piece.hi; ++idx) {
        RationalInterval cell = g.interval(idx);
        if (!cell.intersects(piece)) continue;
        next.emplace_back(std::max(cell.lo, piece.lo),
                          std::min(cell.hi, piece.hi));
      }
    }
    pieces = std::move(next);
    if (pieces.empty()) break;
  }
  return pieces;
}

}  // namespace patternset
