#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "patternset/witness.hpp"
#include "test_util.hpp"

using namespace patternset;

namespace {

const Rational kTol = Rational(1, Int(1) << 40);

ConjugatedMap straightened(const std::string& poly) {
  Polynomial P = Polynomial::parse(poly);
  return compute_threshold(P, choose_conjugator(P));
}

PatternSpec preimage_spec(const std::vector<std::string>& polys,
                          const DeltaSequence& seq, long depth) {
  PatternSpec spec;
  spec.mode = PatternMode::Preimage;
  for (size_t i = 0; i < polys.size(); ++i) {
    spec.poly_maps.push_back(straightened(polys[i]));
    spec.owners.push_back(static_cast<long>(i) + 1);
  }
  spec.deltas = seq;
  spec.depth = depth;
  return spec;
}

// coarse hand sequence: delta = {1, 2^-7, 2^-12}, L = 4 (fit holds with
// slack: 2^-11 + 2^-12 <= 2^-10)
DeltaSequence coarse_sequence() {
  DeltaSequence seq;
  seq.L = 4;
  seq.N = 1;
  seq.h_label = "pow:1/2";
  seq.deltas = {Dyadic::pow2(0), Dyadic::pow2(-7), Dyadic::pow2(-12)};
  return seq;
}

// forward image of the witness through every scheduled map stays inside
// the recorded grid interval
void check_soundness(const WitnessCertificate& cert) {
  for (const WitnessStep& st : cert.steps) {
    for (const Rational& t :
         {cert.final_enclosure.lo, cert.witness, cert.final_enclosure.hi}) {
      if (cert.spec.mode == PatternMode::Preimage) {
        const ConjugatedMap* g = nullptr;
        for (size_t i = 0; i < cert.spec.owners.size(); ++i) {
          if (cert.spec.owners[i] == st.owner) g = &cert.spec.poly_maps[i];
        }
        REQUIRE(g != nullptr);
        RationalInterval img =
            g_forward(*g, RationalInterval::point(t), cert.tol / 4);
        CHECK(st.C.contains(img));
      } else {
        const AffineMap* f = nullptr;
        for (size_t i = 0; i < cert.spec.owners.size(); ++i) {
          if (cert.spec.owners[i] == st.owner) f = &cert.spec.affine_maps[i];
        }
        REQUIRE(f != nullptr);
        Rational pre =
            (t - f->intercept) / (f->slope * f->lambda.to_rational());
        CHECK(st.C.contains(pre));
      }
    }
  }
}

Rational perturb_unit() { return Rational(1, Int(1) << 60); }

}  // namespace

TEST_CASE("single linear map, depth 1") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");
  DeltaSequence seq = build_delta_sequence(h, 4, 1, 2);
  PatternSpec spec = preimage_spec({"x"}, seq, 1);
  WitnessCertificate cert = search_preimage_pattern(spec);
  REQUIRE(cert.steps.size() == 1);
  CHECK(cert.steps[0].m == 1);

  // g(x) = x/2, threshold 1: the chosen interval starts past 1/2, and the
  // pullback is (up to lattice snap) twice the grid interval
  const WitnessStep& st = cert.steps[0];
  CHECK(st.C.lo >= Rational(1, 2));
  Rational u = Rational(1, Int(1) << cert.lattice_bits);
  CHECK(st.X.lo >= 2 * st.C.lo);
  CHECK(st.X.lo <= 2 * st.C.lo + 2 * u);
  CHECK(st.X.hi <= 2 * st.C.hi);
  CHECK(st.X.hi >= 2 * st.C.hi - 2 * u);

  VerifyReport rep = verify_certificate(cert);
  CHECK(rep.ok);
  check_soundness(cert);
}

TEST_CASE("single map, depth 3 strict nesting") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");
  DeltaSequence seq = build_delta_sequence(h, 4, 1, 5);
  PatternSpec spec = preimage_spec({"x"}, seq, 3);
  WitnessCertificate cert = search_preimage_pattern(spec);
  REQUIRE(cert.steps.size() == 3);
  for (size_t i = 1; i < cert.steps.size(); ++i) {
    CHECK(cert.steps[i].X.lo > cert.steps[i - 1].X.lo);
    CHECK(cert.steps[i].X.hi < cert.steps[i - 1].X.hi);
    CHECK(cert.steps[i].X.width() < cert.steps[i - 1].X.width());
  }
  // width law against the deepest level
  long m_last = cert.steps.back().m;
  CHECK(cert.final_enclosure.width() <=
        4 * seq.delta(m_last).to_rational());
  CHECK(verify_certificate(cert).ok);
  check_soundness(cert);
}

TEST_CASE("two polynomial maps on the coarse sequence") {
  DeltaSequence seq = coarse_sequence();
  PatternSpec spec = preimage_spec({"x", "x^2"}, seq, 2);
  WitnessCertificate cert = search_preimage_pattern(spec);
  REQUIRE(cert.steps.size() == 2);
  CHECK(verify_certificate(cert).ok);
  check_soundness(cert);

  // brute-force rasterizer at mesh 2^-24 over the step-1 enclosure: both
  // maps reduce exactly to t/2, so membership is exact modular arithmetic
  std::vector<GridLevel> grids = {grid_level(seq, 1), grid_level(seq, 2)};
  auto feasible = [&](const Rational& t) {
    Rational y = t / 2;
    for (const GridLevel& G : grids) {
      Rational r = y - Rational(G.index_at_or_below(y)) * G.period;
      if (r > G.delta.to_rational()) return false;
    }
    return true;
  };
  Rational mesh(1, Int(1) << 24);
  const RationalInterval& window = cert.steps[0].X;
  long hits = 0, hits_in_T = 0;
  for (Rational t = window.lo; t <= window.hi; t += mesh) {
    if (!feasible(t)) continue;
    ++hits;
    if (cert.final_enclosure.lo - mesh <= t &&
        t <= cert.final_enclosure.hi + mesh) {
      ++hits_in_T;
    }
  }
  CHECK(hits > 0);
  CHECK(hits_in_T > 0);
}

TEST_CASE("four-map pattern end to end") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");
  DeltaSequence seq = build_delta_sequence(h, 4, 1, 4);
  PatternSpec spec = preimage_spec({"x", "2*x + 1", "x^2", "x^3 - 5*x"},
                                   seq, 4);
  WitnessCertificate cert = search_preimage_pattern(spec);
  REQUIRE(cert.steps.size() == 4);
  CHECK(verify_certificate(cert).ok);
  check_soundness(cert);
  long m_last = cert.steps.back().m;
  CHECK(cert.final_enclosure.width() <=
        seq.L * seq.delta(m_last).to_rational());
}

TEST_CASE("preimage configuration errors") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");
  DeltaSequence seq2 = build_delta_sequence(h, 2, 1, 3);
  PatternSpec small_l = preimage_spec({"x"}, seq2, 2);
  CHECK_THROWS_AS(search_preimage_pattern(small_l), ConfigError);

  DeltaSequence seq = build_delta_sequence(h, 4, 1, 2);
  PatternSpec spec = preimage_spec({"x"}, seq, 2);
  spec.mode = PatternMode::Image;
  CHECK_THROWS_AS(search_preimage_pattern(spec), ConfigError);

  PatternSpec deep = preimage_spec({"x"}, seq, 5);
  CHECK_THROWS_AS(search_preimage_pattern(deep), ConfigError);

  PatternSpec orphan = preimage_spec({"x"}, seq, 2);
  orphan.owners = {1, 2};
  CHECK_THROWS_AS(search_preimage_pattern(orphan), ConfigError);
}

TEST_CASE("image mode: shifted pair") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");
  DeltaSequence seq = build_delta_sequence(h, 2, 1, 5);
  PatternSpec spec;
  spec.mode = PatternMode::Image;
  spec.affine_maps.push_back(
      conjugate_bilipschitz(AffineMap{Rational(1), Rational(0)}, 2));
  spec.affine_maps.push_back(
      conjugate_bilipschitz(AffineMap{Rational(1), Rational(-3, 2)}, 2));
  spec.owners = {1, 2};
  spec.deltas = seq;
  spec.depth = 4;
  WitnessCertificate cert = search_image_pattern(spec);
  REQUIRE(cert.steps.size() == 4);
  CHECK(verify_certificate(cert).ok);
  check_soundness(cert);

  // witness y realizes the pattern: y itself (map 1) and y + 3/2 (pulled
  // back through x - 3/2) both land in scheduled grid intervals
  for (const WitnessStep& st : cert.steps) {
    Rational pre = st.owner == 1 ? cert.witness : cert.witness + Rational(3, 2);
    CHECK(st.C.contains(pre));
  }
}

TEST_CASE("image mode: identity pair matches the k-set brute force") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");
  DeltaSequence seq = build_delta_sequence(h, 2, 1, 4);
  PatternSpec spec;
  spec.mode = PatternMode::Image;
  AffineMap ident{Rational(1), Rational(0)};
  spec.affine_maps = {conjugate_bilipschitz(ident, 2),
                      conjugate_bilipschitz(ident, 2)};
  spec.owners = {1, 2};
  spec.deltas = seq;
  spec.depth = 3;
  WitnessCertificate cert = search_image_pattern(spec);
  CHECK(verify_certificate(cert).ok);
  check_soundness(cert);
  // the witness lies in every scheduled grid level simultaneously, so it
  // lies in the intersection kset_intervals reports for each owner
  for (long owner : {1l, 2l}) {
    long truncation = 0;
    for (const WitnessStep& st : cert.steps) {
      if (st.owner == owner) ++truncation;
    }
    if (truncation == 0) continue;
    auto pieces = kset_intervals(seq, owner, truncation,
                                 RationalInterval(Rational(0), Rational(2)));
    bool inside = false;
    for (const RationalInterval& piece : pieces) {
      if (piece.contains(cert.witness)) inside = true;
    }
    CHECK(inside);
  }
}

TEST_CASE("hand-built depth-1 image certificate") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");
  DeltaSequence seq = build_delta_sequence(h, 2, 1, 2);
  PatternSpec spec;
  spec.mode = PatternMode::Image;
  spec.affine_maps = {
      conjugate_bilipschitz(AffineMap{Rational(1), Rational(0)}, 2)};
  spec.owners = {1};
  spec.deltas = seq;
  spec.depth = 1;

  GridLevel G = grid_level(seq, 1);
  WitnessCertificate cert;
  cert.spec = spec;
  WitnessStep st;
  st.m = 1;
  st.owner = 1;
  st.grid_index = 0;
  st.C = G.interval(Int(0));
  st.X = st.C;
  cert.steps = {st};
  cert.final_enclosure = st.X;
  cert.witness = st.X.midpoint();
  CHECK(verify_certificate(cert).ok);

  // the search finds the same certificate
  WitnessCertificate found = search_image_pattern(spec);
  CHECK(found.steps[0].grid_index == 0);
  CHECK(found.final_enclosure.lo == cert.final_enclosure.lo);
  CHECK(found.final_enclosure.hi == cert.final_enclosure.hi);
}

TEST_CASE("mutated certificates are rejected with the failing step") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");
  DeltaSequence seq = build_delta_sequence(h, 4, 1, 3);
  PatternSpec spec = preimage_spec({"x", "x^2"}, seq, 3);
  WitnessCertificate base = search_preimage_pattern(spec);
  REQUIRE(verify_certificate(base).ok);
  Rational eps = perturb_unit();

  for (size_t i = 0; i < base.steps.size(); ++i) {
    for (int which = 0; which < 4; ++which) {
      WitnessCertificate mut = base;
      RationalInterval& target =
          which < 2 ? mut.steps[i].X : mut.steps[i].C;
      if (which % 2 == 0) {
        target.lo -= eps;  // outward
      } else {
        target.hi += eps;
      }
      VerifyReport rep = verify_certificate(mut);
      CHECK_FALSE(rep.ok);
      CHECK(rep.step == static_cast<long>(i) + 1);
    }
  }

  // final-interval and witness mutations report step 0
  WitnessCertificate mf = base;
  mf.final_enclosure.hi += eps;
  VerifyReport repf = verify_certificate(mf);
  CHECK_FALSE(repf.ok);
  CHECK(repf.step == 0);

  WitnessCertificate mw = base;
  mw.witness += eps;
  CHECK_FALSE(verify_certificate(mw).ok);

  // image-mode certificate mutations
  PatternSpec ispec;
  ispec.mode = PatternMode::Image;
  ispec.affine_maps = {
      conjugate_bilipschitz(AffineMap{Rational(1), Rational(0)}, 4),
      conjugate_bilipschitz(AffineMap{Rational(1), Rational(-3, 2)}, 4)};
  ispec.owners = {1, 2};
  ispec.deltas = seq;
  ispec.depth = 3;
  WitnessCertificate icert = search_image_pattern(ispec);
  REQUIRE(verify_certificate(icert).ok);
  for (size_t i = 0; i < icert.steps.size(); ++i) {
    WitnessCertificate mut = icert;
    mut.steps[i].X.lo -= eps;
    VerifyReport rep = verify_certificate(mut);
    CHECK_FALSE(rep.ok);
    CHECK(rep.step == static_cast<long>(i) + 1);
  }
}

TEST_CASE("covering bounds") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");

  // hand sequence with delta_1 = 1/8: level-1 period is exactly 1/4, so
  // the window [0,1] meets five intervals (k = 0..4)
  DeltaSequence hand;
  hand.L = 2;
  hand.N = 1;
  hand.h_label = "pow:1/2";
  hand.deltas = {Dyadic::pow2(0), Dyadic::pow2(-3)};
  CoverCertificate one = certify_measure_decay(hand, h, 1, 1, 1);
  REQUIRE(one.levels.size() == 1);
  CHECK(one.levels[0].count == 5);
  CHECK(one.levels[0].certified);
  // bound = 5 * sqrt(1/8) = 1.7677...: this hand-picked delta_1 is too
  // coarse for the indexed decay, and the level records that
  CHECK(one.levels[0].bound >= 5 * Rational(35, 100));
  CHECK(one.levels[0].bound <= Rational(2));
  CHECK_FALSE(one.levels[0].decays);

  // full decay table, depth 10
  DeltaSequence seq = build_delta_sequence(h, 2, 1, 10);
  CoverCertificate table = certify_measure_decay(seq, h, 1, 1, 10);
  REQUIRE(table.levels.size() == 10);
  for (const CoverLevel& lvl : table.levels) {
    CHECK(lvl.certified);
    CHECK(lvl.decays);
    CHECK(lvl.bound < Rational(1, lvl.n));
    CHECK(lvl.bound > 0);
    CHECK(lvl.count > 0);
  }
  // strictly decreasing beyond the entry point of (1,1)
  for (size_t i = 1; i < table.levels.size(); ++i) {
    CHECK(table.levels[i].bound < table.levels[i - 1].bound);
  }

  // uncertified flag when N2*delta exceeds 1
  CoverCertificate un = certify_measure_decay(hand, h, 1, 16, 1);
  CHECK_FALSE(un.levels[0].certified);

  CHECK_THROWS_AS(certify_measure_decay(hand, h, 0, 1, 1), ConfigError);
  CHECK_THROWS_AS(certify_measure_decay(hand, h, 1, 1, 5), ConfigError);
}
