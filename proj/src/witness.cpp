#include "patternset/witness.hpp"

#include <algorithm>
#include <optional>

namespace patternset {

namespace {

// ------------------------------------------------------------ replay side
//
// The verification evaluator: term-by-term polynomial enclosure and endpoint
// root bounds. verify_certificate trusts only these routines; the search
// uses them for the final acceptance decision of every predicate it emits,
// so a certificate it returns is exactly a certificate the replay accepts.

RationalInterval replay_poly(const Polynomial& P, const RationalInterval& x) {
  RationalInterval acc = RationalInterval::point(P.coeffs[0]);
  for (long k = 1; k <= P.degree(); ++k) {
    RationalInterval term =
        iv_mul(RationalInterval::point(P.coeffs[static_cast<size_t>(k)]),
               iv_pow(x, k));
    acc = iv_add(acc, term);
  }
  return acc;
}

RationalInterval replay_g(const ConjugatedMap& g, const RationalInterval& x,
                          const Rational& tol) {
  RationalInterval sp = replay_poly(g.P, x);
  if (g.psi.sign < 0) sp = RationalInterval(-sp.hi, -sp.lo);
  if (sp.lo < 0) {
    throw DomainError("sign*P negative at a replay point");
  }
  unsigned long n = static_cast<unsigned long>(g.psi.n);
  Rational lo = nth_root_lower(sp.lo, n, tol);
  Rational hi = nth_root_upper(sp.hi, n, tol);
  Rational q = g.psi.q.to_rational();
  return RationalInterval(q * lo, q * hi);
}

// ---------------------------------------------------------------- helpers

struct RetryStep {};  // tolerance too coarse at the current rung

Rational pow2_inv(long s) {
  Rational r(1);
  mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(),
               static_cast<unsigned long>(s));
  r.canonicalize();
  return r;
}

bool on_lattice(const Rational& x, long s) {
  Int scaled = x.get_num();
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(),
               static_cast<unsigned long>(s));
  return mpz_divisible_p(scaled.get_mpz_t(), x.get_den().get_mpz_t());
}

Int lattice_floor_index(const Rational& x, long s) {
  Int num = x.get_num();
  mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(),
               static_cast<unsigned long>(s));
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), x.get_den().get_mpz_t());
  return q;
}

const ConjugatedMap& map_for_owner(const PatternSpec& spec, long owner) {
  for (size_t i = 0; i < spec.owners.size(); ++i) {
    if (spec.owners[i] == owner) return spec.poly_maps[i];
  }
  throw ConfigError("schedule owner without a map");
}

const AffineMap& affine_for_owner(const PatternSpec& spec, long owner) {
  for (size_t i = 0; i < spec.owners.size(); ++i) {
    if (spec.owners[i] == owner) return spec.affine_maps[i];
  }
  throw ConfigError("schedule owner without a map");
}

std::vector<ScheduleEntry> validated_schedule(const PatternSpec& spec) {
  if (spec.owners.size() != spec.map_count() || spec.map_count() == 0) {
    throw ConfigError("owners must pair one-to-one with the maps");
  }
  if (spec.mode == PatternMode::Preimage && !spec.affine_maps.empty()) {
    throw ConfigError("preimage mode takes polynomial maps only");
  }
  if (spec.mode == PatternMode::Image && !spec.poly_maps.empty()) {
    throw ConfigError("image mode takes affine maps only");
  }
  std::vector<ScheduleEntry> entries = schedule(spec.owners, spec.depth);
  if (entries.back().m > spec.deltas.depth()) {
    throw ConfigError("schedule reaches level " +
                      std::to_string(entries.back().m) +
                      " but the sequence stops at depth " +
                      std::to_string(spec.deltas.depth()));
  }
  for (size_t i = 1; i < entries.size(); ++i) {
    if (!check_nesting_fit(spec.deltas, entries[i - 1].m, entries[i].m)) {
      throw CertificationError(
          "nesting-fit inequality fails for schedule levels " +
          std::to_string(entries[i - 1].m) + " -> " +
          std::to_string(entries[i].m));
    }
  }
  return entries;
}

// Smallest lattice multiple a of 2^-s with replay_g(a) certified >= c and
// replay_g(a - u) certified < c; nullopt when the tolerance cannot decide.
std::optional<Rational> tight_lower(const ConjugatedMap& g, const Rational& c,
                                    const RationalInterval& bracket, long s,
                                    const Rational& tol) {
  Rational u = pow2_inv(s);
  Int idx = lattice_floor_index(bracket.lo, s);
  for (int it = 0; it < 128; ++it, ++idx) {
    Rational a = Rational(idx) * u;
    if (a > bracket.hi + u) return std::nullopt;
    RationalInterval e = replay_g(g, RationalInterval::point(a), tol);
    if (e.hi < c) continue;  // certainly below: keep climbing
    if (!(e.lo >= c)) return std::nullopt;  // straddles: tol too coarse
    RationalInterval prev =
        replay_g(g, RationalInterval::point(a - u), tol);
    if (!(prev.hi < c)) return std::nullopt;
    return a;
  }
  return std::nullopt;
}

// Largest lattice multiple b with replay_g(b) <= c and replay_g(b + u) > c.
std::optional<Rational> tight_upper(const ConjugatedMap& g, const Rational& c,
                                    const RationalInterval& bracket, long s,
                                    const Rational& tol) {
  Rational u = pow2_inv(s);
  Int idx = lattice_floor_index(bracket.hi, s) + 1;
  for (int it = 0; it < 128; ++it, --idx) {
    Rational b = Rational(idx) * u;
    if (b < bracket.lo - u) return std::nullopt;
    RationalInterval e = replay_g(g, RationalInterval::point(b), tol);
    if (e.lo > c) continue;  // certainly above: keep descending
    if (!(e.hi <= c)) return std::nullopt;
    RationalInterval next =
        replay_g(g, RationalInterval::point(b + u), tol);
    if (!(next.lo > c)) return std::nullopt;
    return b;
  }
  return std::nullopt;
}

long lattice_bits_for(const DeltaSequence& seq, long last_m) {
  Int e = -seq.delta(last_m).exponent();
  if (!e.fits_slong_p() || e.get_si() > (1l << 20)) {
    throw CertificationError("witness lattice too fine to materialize");
  }
  // u = delta_last / 2^6: far below every step's slack, and the starting
  // tolerance delta_last / 2^10 = u/16 already decides generic predicates
  return e.get_si() + 6;
}

// Exact preimage of an interval under x -> slope*x + intercept.
RationalInterval affine_preimage(const Rational& slope,
                                 const Rational& intercept,
                                 const RationalInterval& y) {
  Rational a = (y.lo - intercept) / slope;
  Rational b = (y.hi - intercept) / slope;
  if (a > b) std::swap(a, b);
  return RationalInterval(a, b);
}

RationalInterval affine_image(const Rational& slope, const Rational& intercept,
                              const RationalInterval& x) {
  Rational a = slope * x.lo + intercept;
  Rational b = slope * x.hi + intercept;
  if (a > b) std::swap(a, b);
  return RationalInterval(a, b);
}

Rational composed_slope(const AffineMap& f) {
  return f.slope * f.lambda.to_rational();
}

}  // namespace

// ------------------------------------------------------------- preimage

WitnessCertificate search_preimage_pattern(const PatternSpec& spec) {
  if (spec.mode != PatternMode::Preimage) {
    throw ConfigError("search_preimage_pattern needs mode=Preimage");
  }
  if (spec.deltas.L < 4) {
    throw ConfigError(
        "preimage mode needs L >= 4: the straightened maps are "
        "(1/4,1)-bilipschitz");
  }
  std::vector<ScheduleEntry> entries = validated_schedule(spec);
  long s = lattice_bits_for(spec.deltas, entries.back().m);
  Rational u = pow2_inv(s);
  Rational t_min(0);
  for (const ConjugatedMap& cm : spec.poly_maps) {
    t_min = std::max(t_min, Rational(cm.M_P));
  }
  Rational tol0 =
      spec.deltas.delta(entries.back().m).to_rational() / (Int(1) << 10);

  Rational tol = tol0;
  for (int attempt = 0; attempt <= 8; ++attempt, tol /= 2) {
    try {
      std::vector<WitnessStep> steps;
      RationalInterval prev;
      for (size_t i = 0; i < entries.size(); ++i) {
        const ScheduleEntry& e = entries[i];
        const ConjugatedMap& g = map_for_owner(spec, e.owner);
        GridLevel G = grid_level(spec.deltas, e.m);

        // window inside which a grid interval pulls back into the
        // previous step (margin 2*tol so the replay's own upper bound of
        // g at the cut still clears C.lo)
        Rational cut_lo =
            i == 0 ? replay_g(g, RationalInterval::point(t_min), tol).hi
                   : replay_g(g, RationalInterval::point(prev.lo), tol).hi;
        Rational win_lo = cut_lo + 2 * tol;
        Int k = G.index_at_or_above(win_lo);
        RationalInterval C = G.interval(k);
        if (i > 0) {
          Rational win_hi =
              replay_g(g, RationalInterval::point(prev.hi), tol).lo - 2 * tol;
          if (C.hi > win_hi) {
            // optimistic window: if even the raw enclosure bounds leave
            // no room, the fit guarantee itself is violated
            Rational opt_lo =
                replay_g(g, RationalInterval::point(prev.lo), tol).lo;
            Rational opt_hi =
                replay_g(g, RationalInterval::point(prev.hi), tol).hi;
            RationalInterval opt = G.interval(G.index_at_or_above(opt_lo));
            if (opt.hi > opt_hi) {
              throw InfeasibleError(
                  "no grid interval fits inside the pulled-back window at "
                  "level " +
                  std::to_string(e.m));
            }
            throw RetryStep{};
          }
        }

        // lattice-tight pullback endpoints
        RationalInterval blo =
            g_inverse(g, RationalInterval::point(C.lo), u / 2);
        RationalInterval bhi =
            g_inverse(g, RationalInterval::point(C.hi), u / 2);
        std::optional<Rational> a = tight_lower(g, C.lo, blo, s, tol);
        std::optional<Rational> b = tight_upper(g, C.hi, bhi, s, tol);
        if (!a || !b || !(*a < *b)) throw RetryStep{};
        RationalInterval X(*a, *b);
        if (i > 0 && !(prev.lo < X.lo && X.hi < prev.hi)) throw RetryStep{};
        steps.push_back({e.m, e.owner, k, C, X});
        prev = X;
      }
      WitnessCertificate cert;
      cert.spec = spec;
      cert.steps = std::move(steps);
      cert.final_enclosure = prev;
      cert.witness = prev.midpoint();
      cert.tol = tol;
      cert.lattice_bits = s;
      return cert;
    } catch (const RetryStep&) {
      continue;
    }
  }
  throw CertificationError(
      "preimage search failed to certify after 8 tolerance halvings");
}

// --------------------------------------------------------------- image

WitnessCertificate search_image_pattern(const PatternSpec& spec) {
  if (spec.mode != PatternMode::Image) {
    throw ConfigError("search_image_pattern needs mode=Image");
  }
  std::vector<ScheduleEntry> entries = validated_schedule(spec);
  Rational Lr(spec.deltas.L);
  for (const AffineMap& f : spec.affine_maps) {
    Rational sl = composed_slope(f);
    Rational mag = sl < 0 ? Rational(-sl) : sl;
    if (!(mag >= 1 && mag <= Lr)) {
      throw ConfigError(
          "composed slope outside [1, L]; pair the map with "
          "conjugate_bilipschitz first");
    }
  }

  // feasibility window in image space: increasing maps push grid points
  // upward from g(0), decreasing maps downward
  std::optional<Rational> wlo, whi;
  for (const AffineMap& f : spec.affine_maps) {
    if (composed_slope(f) > 0) {
      if (!wlo || f.intercept > *wlo) wlo = f.intercept;
    } else {
      if (!whi || f.intercept < *whi) whi = f.intercept;
    }
  }
  if (wlo && whi && !(*wlo < *whi)) {
    throw InfeasibleError("image-space feasibility window is empty");
  }

  std::vector<WitnessStep> steps;
  RationalInterval prev;
  for (size_t i = 0; i < entries.size(); ++i) {
    const ScheduleEntry& e = entries[i];
    const AffineMap& f = affine_for_owner(spec, e.owner);
    Rational sl = composed_slope(f);
    GridLevel G = grid_level(spec.deltas, e.m);

    RationalInterval W;  // admissible grid window at this level
    bool hi_open = false;
    if (i == 0) {
      // pull the feasibility window back through this map
      Rational a(0), b(0);
      bool has_a = false, has_b = false;
      if (wlo) {
        Rational v = (*wlo - f.intercept) / sl;
        if (sl > 0) {
          a = v;
          has_a = true;
        } else {
          b = v;
          has_b = true;
        }
      }
      if (whi) {
        Rational v = (*whi - f.intercept) / sl;
        if (sl > 0) {
          b = v;
          has_b = true;
        } else {
          a = v;
          has_a = true;
        }
      }
      if (!has_a || a < 0) a = 0;
      hi_open = !has_b;
      if (!hi_open && !(a < b)) {
        throw InfeasibleError("feasibility window misses the grid domain");
      }
      W = RationalInterval(a, hi_open ? a + 1 : b);
    } else {
      W = affine_preimage(sl, f.intercept, prev);
    }

    Int k0 = G.index_at_or_above(W.lo);
    std::optional<Int> chosen;
    for (Int k = k0; k <= k0 + 2; ++k) {
      RationalInterval C = G.interval(k);
      bool lo_ok = i == 0 ? C.lo >= W.lo : C.lo > W.lo;
      bool hi_ok = hi_open || (i == 0 ? C.hi <= W.hi : C.hi < W.hi);
      if (lo_ok && hi_ok) {
        chosen = k;
        break;
      }
    }
    if (!chosen) {
      throw InfeasibleError("no grid interval fits strictly inside the "
                            "pulled-back window at level " +
                            std::to_string(e.m));
    }
    RationalInterval C = G.interval(*chosen);
    RationalInterval Y = affine_image(sl, f.intercept, C);
    steps.push_back({e.m, e.owner, *chosen, C, Y});
    prev = Y;
  }

  WitnessCertificate cert;
  cert.spec = spec;
  cert.steps = std::move(steps);
  cert.final_enclosure = prev;
  cert.witness = prev.midpoint();
  cert.tol = 0;
  cert.lattice_bits = 0;
  return cert;
}

// --------------------------------------------------------------- verify

namespace {

struct VerifyFailure {
  long step;
  std::string reason;
};

void require(bool cond, long step, const std::string& reason) {
  if (!cond) throw VerifyFailure{step, reason};
}

void verify_preimage(const WitnessCertificate& cert,
                     const std::vector<ScheduleEntry>& entries) {
  const PatternSpec& spec = cert.spec;
  long s = cert.lattice_bits;
  require(s >= 1, -1, "missing lattice resolution");
  require(cert.tol > 0, -1, "missing tolerance");
  Rational u = pow2_inv(s);
  Rational t_min(0);
  for (const ConjugatedMap& cm : spec.poly_maps) {
    t_min = std::max(t_min, Rational(cm.M_P));
  }
  RationalInterval prev;
  for (size_t i = 0; i < entries.size(); ++i) {
    long stepno = static_cast<long>(i) + 1;
    const WitnessStep& st = cert.steps[i];
    require(st.m == entries[i].m && st.owner == entries[i].owner, stepno,
            "step does not match the schedule");
    const ConjugatedMap& g = map_for_owner(spec, st.owner);
    GridLevel G = grid_level(spec.deltas, st.m);
    require(st.grid_index >= 0, stepno, "negative grid index");
    RationalInterval C = G.interval(st.grid_index);
    require(C.lo == st.C.lo && C.hi == st.C.hi, stepno,
            "recorded interval is not the grid interval at its index");

    // window: the pullback of C sits inside the previous enclosure
    Rational base = i == 0 ? t_min : prev.lo;
    RationalInterval at_lo =
        replay_g(g, RationalInterval::point(base), cert.tol);
    require(at_lo.hi <= C.lo, stepno,
            "grid interval not above the window cut");
    if (i > 0) {
      RationalInterval at_hi =
          replay_g(g, RationalInterval::point(prev.hi), cert.tol);
      require(C.hi <= at_hi.lo, stepno,
              "grid interval exceeds the pulled-back window");
    }

    // lattice-tight pullback endpoints
    require(st.X.lo < st.X.hi, stepno, "empty pullback interval");
    require(on_lattice(st.X.lo, s) && on_lattice(st.X.hi, s), stepno,
            "pullback endpoint off the certificate lattice");
    RationalInterval elo =
        replay_g(g, RationalInterval::point(st.X.lo), cert.tol);
    require(elo.lo >= C.lo, stepno, "lower endpoint maps below the interval");
    RationalInterval elo_prev =
        replay_g(g, RationalInterval::point(st.X.lo - u), cert.tol);
    require(elo_prev.hi < C.lo, stepno, "lower endpoint not lattice-tight");
    RationalInterval ehi =
        replay_g(g, RationalInterval::point(st.X.hi), cert.tol);
    require(ehi.hi <= C.hi, stepno, "upper endpoint maps above the interval");
    RationalInterval ehi_next =
        replay_g(g, RationalInterval::point(st.X.hi + u), cert.tol);
    require(ehi_next.lo > C.hi, stepno, "upper endpoint not lattice-tight");

    if (i > 0) {
      require(prev.lo < st.X.lo && st.X.hi < prev.hi, stepno,
              "nesting not strict");
    }
    // width law: width(X) <= L * delta_m
    Dyadic width = Dyadic::from_rational(st.X.width());
    require(Dyadic::compare_scaled(Rational(spec.deltas.L),
                                   spec.deltas.delta(st.m), width) >= 0,
            stepno, "pullback wider than L*delta");
    prev = st.X;
  }
  require(cert.final_enclosure.lo == prev.lo &&
              cert.final_enclosure.hi == prev.hi,
          0, "final interval differs from the last step");
  require(cert.witness == cert.final_enclosure.midpoint(), 0,
          "witness is not the midpoint of the final interval");
}

void verify_image(const WitnessCertificate& cert,
                  const std::vector<ScheduleEntry>& entries) {
  const PatternSpec& spec = cert.spec;
  Rational Lr(spec.deltas.L);
  std::optional<Rational> wlo, whi;
  for (const AffineMap& f : spec.affine_maps) {
    Rational sl = composed_slope(f);
    Rational mag = sl < 0 ? Rational(-sl) : sl;
    require(mag >= 1 && mag <= Lr, -1, "composed slope outside [1, L]");
    if (sl > 0) {
      if (!wlo || f.intercept > *wlo) wlo = f.intercept;
    } else {
      if (!whi || f.intercept < *whi) whi = f.intercept;
    }
  }
  RationalInterval prev;
  for (size_t i = 0; i < entries.size(); ++i) {
    long stepno = static_cast<long>(i) + 1;
    const WitnessStep& st = cert.steps[i];
    require(st.m == entries[i].m && st.owner == entries[i].owner, stepno,
            "step does not match the schedule");
    const AffineMap& f = affine_for_owner(spec, st.owner);
    Rational sl = composed_slope(f);
    GridLevel G = grid_level(spec.deltas, st.m);
    require(st.grid_index >= 0, stepno, "negative grid index");
    RationalInterval C = G.interval(st.grid_index);
    require(C.lo == st.C.lo && C.hi == st.C.hi, stepno,
            "recorded interval is not the grid interval at its index");
    RationalInterval Y = affine_image(sl, f.intercept, C);
    require(Y.lo == st.X.lo && Y.hi == st.X.hi, stepno,
            "recorded image differs from the exact affine image");
    if (i == 0) {
      if (wlo) require(st.X.lo >= *wlo, stepno, "image below the window");
      if (whi) require(st.X.hi <= *whi, stepno, "image above the window");
    } else {
      require(prev.lo < st.X.lo && st.X.hi < prev.hi, stepno,
              "nesting not strict");
    }
    Dyadic width = Dyadic::from_rational(C.width());
    require(Dyadic::compare_scaled(Rational(1), spec.deltas.delta(st.m),
                                   width) >= 0,
            stepno, "grid interval wider than delta");
    prev = st.X;
  }
  require(cert.final_enclosure.lo == prev.lo &&
              cert.final_enclosure.hi == prev.hi,
          0, "final interval differs from the last step");
  require(cert.witness == cert.final_enclosure.midpoint(), 0,
          "witness is not the midpoint of the final interval");
}

}  // namespace

VerifyReport verify_certificate(const WitnessCertificate& cert) {
  VerifyReport report;
  try {
    std::vector<ScheduleEntry> entries = validated_schedule(cert.spec);
    require(cert.steps.size() == entries.size(), -1,
            "step count differs from the schedule");
    if (cert.spec.mode == PatternMode::Preimage) {
      verify_preimage(cert, entries);
    } else {
      verify_image(cert, entries);
    }
  } catch (const VerifyFailure& f) {
    report.ok = false;
    report.step = f.step;
    report.reason = f.reason;
  } catch (const std::exception& e) {
    report.ok = false;
    report.step = -1;
    report.reason = e.what();
  }
  return report;
}

// --------------------------------------------------------- cover decay

CoverCertificate certify_measure_decay(const DeltaSequence& seq,
                                       const DimensionFunction& h, long N1,
                                       long N2, long up_to_level) {
  if (N1 < 1 || N2 < 1) throw ConfigError("window factors must be >= 1");
  if (up_to_level > seq.depth()) {
    throw ConfigError("requested level beyond the sequence depth");
  }
  CoverCertificate cover;
  cover.h_label = seq.h_label;
  cover.N1 = N1;
  cover.N2 = N2;
  long entry = PairEnumeration::index_of(N1, N2);
  for (long n = 1; n <= up_to_level; ++n) {
    CoverLevel level;
    level.n = n;
    GridLevel G = grid_level(seq, n);
    // intervals [k*period, k*period + delta] meeting [0, N1]
    Int count;
    Rational ratio = Rational(N1) / G.period;
    mpz_fdiv_q(count.get_mpz_t(), ratio.get_num_mpz_t(),
               ratio.get_den_mpz_t());
    count += 1;
    level.count = count;
    Rational t = N2 * seq.delta(n).to_rational();
    if (t > 1) {
      level.certified = false;
      cover.levels.push_back(level);
      continue;
    }
    // upper bound of h(t) with relative slack below 2^-70, so the table
    // survives comparison against independent high-precision recomputation
    Rational tol = t;
    RationalInterval he = h.enclosure(t, tol);
    while (!(he.lo > 0) || (he.hi - he.lo) * (Int(1) << 70) > he.hi) {
      tol /= Int(1) << 16;
      he = h.enclosure(t, tol);
    }
    Rational hv = he.hi;
    level.bound = Rational(count) * hv;
    Rational crude =
        Rational(N1) / seq.delta(n - 1).to_rational() + 1;
    level.paper_bound = rational_pow(crude, seq.N) * hv;
    level.decays = n >= entry && level.bound < Rational(1, n);
    cover.levels.push_back(level);
  }
  return cover;
}

}  // namespace patternset
