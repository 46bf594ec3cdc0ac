#ifndef PATTERNSET_CONSTRUCTION_HPP
#define PATTERNSET_CONSTRUCTION_HPP

#include <string>
#include <utility>
#include <vector>

#include "patternset/dimfun.hpp"
#include "patternset/interval.hpp"
#include "patternset/numbers.hpp"

namespace patternset {

// Fixed bijection N -> N x N: Cantor diagonal order starting
// (1,1),(1,2),(2,1),(1,3),(2,2),(3,1),... (1-based index).
struct PairEnumeration {
  static std::pair<long, long> pair_at(long i);
  static long index_of(long n1, long n2);
  static constexpr const char* kTag = "cantor-diagonal";
};

// Certified rational enclosure of sqrt(N).
struct SqrtBounds {
  Rational lo;
  Rational hi;
};
SqrtBounds sqrt_n_bounds(long N);

// The scale sequence (delta_n): delta_0 = 1, each level at most
// 1/(4 L sqrt(N)) of the previous, and small enough that the indexed
// covering inequality holds for every enumerated pair up to the level.
struct DeltaSequence {
  long L = 2;
  long N = 1;
  std::string h_label;
  std::string enumeration_tag = PairEnumeration::kTag;
  std::vector<Dyadic> deltas;  // delta_0 .. delta_depth

  long depth() const { return static_cast<long>(deltas.size()) - 1; }
  const Dyadic& delta(long n) const;
};

// Greedy construction: for each m >= 1 the largest dyadic 2^-e passing all
// certified admissibility predicates (geometric decay, per-level nesting
// fit, and the indexed inequality for every pair index i <= m). Exact
// rational arithmetic while exponents are small, certified log2-domain
// decisions beyond that. Throws CertificationError when no admissible
// exponent fits the representation cap (the indexed inequality can force
// exponent towers for slowly decaying h).
DeltaSequence build_delta_sequence(const DimensionFunction& h, long L, long N,
                                   long depth);

// Independent re-verification of the DeltaSequence invariants in their
// literal form (delta_0 = 1, geometric decay against the sqrt(N) upper
// bound, indexed inequality via h upper bounds). Separate decision code
// from the builder.
struct DeltaCheckReport {
  bool ok = true;
  std::string first_failure;
};
DeltaCheckReport check_delta_sequence(const DeltaSequence& seq,
                                      const DimensionFunction& h);

// Claim-1 nesting-fit inequality for a consecutive schedule pair m < mp:
//   sqrt(N) * (delta_{mp-1}/(4 L sqrt(N)) + delta_mp) <= delta_m / (2 L)
// decided exactly (outward-rounded sqrt(N) enclosure on the hard side).
bool check_nesting_fit(const DeltaSequence& seq, long m, long mp);

// Level-n grid: intervals [k*period, k*period + delta], k >= 0, on [0,inf).
struct GridLevel {
  long n = 0;
  Dyadic delta;
  Rational gap;     // delta_{n-1}/(4 L sqrt(N)), upper-rounded
  Rational period;  // delta + gap
  Rational offset;  // 0

  RationalInterval interval(const Int& k) const;
  // Largest k with k*period <= x (clamped at 0).
  Int index_at_or_below(const Rational& x) const;
  // Smallest k with k*period >= x.
  Int index_at_or_above(const Rational& x) const;
};
GridLevel grid_level(const DeltaSequence& seq, long n);

// m = (2k-1) * 2^(owner-1); the 2-adic valuation of m makes the owner
// unique, so distinct owners never collide.
struct ScheduleEntry {
  long m = 0;
  long owner = 0;
  long k = 0;
};
std::vector<ScheduleEntry> schedule(const std::vector<long>& owners,
                                    long depth);

// Connected components of the intersection of the first `truncation` grid
// levels owned by j, clipped to `window`.
std::vector<RationalInterval> kset_intervals(const DeltaSequence& seq, long j,
                                             long truncation,
                                             const RationalInterval& window);

}  // namespace patternset

#endif  // PATTERNSET_CONSTRUCTION_HPP
