#ifndef PATTERNSET_WITNESS_HPP
#define PATTERNSET_WITNESS_HPP

#include <string>
#include <vector>

#include "patternset/construction.hpp"
#include "patternset/maps.hpp"

namespace patternset {

// Raised when grid arithmetic finds no candidate interval at a step; this
// falsifies the nesting-fit guarantee and is never swallowed.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PatternMode { Preimage, Image };

// A pattern search instance: certified maps, the distinct grid-level owners
// pairing each map with its arithmetic progression of levels, the scale
// sequence, and the number of schedule entries to realize.
struct PatternSpec {
  PatternMode mode = PatternMode::Preimage;
  std::vector<ConjugatedMap> poly_maps;  // Preimage mode
  std::vector<AffineMap> affine_maps;    // Image mode
  std::vector<long> owners;              // one per map, distinct
  DeltaSequence deltas;
  long depth = 1;

  size_t map_count() const {
    return mode == PatternMode::Preimage ? poly_maps.size()
                                         : affine_maps.size();
  }
};

// One nesting step: at schedule entry m (belonging to `owner`), the chosen
// grid interval C of F_m (recomputable from grid_index) and the certified
// interval X in witness space.
//   Preimage: X lies on the 2^-lattice_bits lattice and satisfies
//             g_m(X) subset C (certified tight at both ends).
//   Image:    X = g_m(C) exactly.
struct WitnessStep {
  long m = 0;
  long owner = 0;
  Int grid_index;
  RationalInterval C;
  RationalInterval X;
};

struct WitnessCertificate {
  PatternSpec spec;
  std::vector<WitnessStep> steps;
  RationalInterval final_enclosure;  // last X
  Rational witness;                  // its midpoint
  Rational tol;                      // enclosure tolerance the replay uses
  long lattice_bits = 0;             // X endpoint lattice (preimage mode)
};

// Nested search for t with g_m(t) inside a grid interval of F_m for every
// scheduled level m: step 1 scans past all thresholds, later steps locate
// the candidate interval by index arithmetic and certify the inclusion with
// enclosures (tolerance halving on failure, at most 8 retries).
WitnessCertificate search_preimage_pattern(const PatternSpec& spec);

// Dual image-side recursion for affine maps: nested exact image intervals
// g_m(C_m); any y in the final interval has g_m^{-1}(y) in C_m for all
// scheduled m.
WitnessCertificate search_image_pattern(const PatternSpec& spec);

struct VerifyReport {
  bool ok = true;
  long step = -1;  // 1-based failing step; 0 = final interval/witness
  std::string reason;
};

// Independent replay: recomputes every grid interval from the grid
// arithmetic, re-certifies every inclusion and tightness predicate at the
// certificate's tolerances, and checks strict nesting and the width law.
// Never throws on bad content; reports the first failure.
VerifyReport verify_certificate(const WitnessCertificate& cert);

// Per-level covering bound for the window [0, N1]: M exact interval count,
// bound = M * h_upper(N2 * delta_n), alongside the cruder a-priori bound
// (N1/delta_{n-1} + 1)^N * h(N2 * delta_n). A level with N2 * delta_n > 1
// is reported uncertified instead of bounded.
struct CoverLevel {
  long n = 0;
  Int count;
  Rational bound;
  Rational paper_bound;
  bool certified = true;
  // bound < 1/n, meaningful once (N1, N2) has entered the pair
  // enumeration; guaranteed for sequences from build_delta_sequence
  bool decays = false;
};

struct CoverCertificate {
  std::string h_label;
  long N1 = 1;
  long N2 = 1;
  std::vector<CoverLevel> levels;
};

CoverCertificate certify_measure_decay(const DeltaSequence& seq,
                                       const DimensionFunction& h, long N1,
                                       long N2, long up_to_level);

}  // namespace patternset

#endif  // PATTERNSET_WITNESS_HPP
