#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "patternset/dimfun.hpp"
#include "test_util.hpp"

using namespace patternset;
using patternset::test::dec;

namespace {

const Rational kTol = Rational(1, Int(1) << 40);

// enclosure contains the true value bracketed by [lo_dec, hi_dec], and its
// width honors the requested tolerance
void check_encloses(const RationalInterval& e, const Rational& lo_dec,
                    const Rational& hi_dec, const Rational& tol) {
  CHECK(e.lo <= hi_dec);
  CHECK(e.hi >= lo_dec);
  CHECK(e.width() <= tol);
}

}  // namespace

TEST_CASE("dimension function parsing") {
  DimensionFunction p = DimensionFunction::parse("pow:1/2");
  CHECK(p.kind() == DimensionFunction::Kind::Power);
  CHECK(p.alpha() == Rational(1, 2));
  CHECK(p.label() == "pow:1/2");

  DimensionFunction li = DimensionFunction::parse("loginv");
  CHECK(li.kind() == DimensionFunction::Kind::LogInverse);

  DimensionFunction pl = DimensionFunction::parse("powlog:1/2:-1");
  CHECK(pl.kind() == DimensionFunction::Kind::PowerLog);
  CHECK(pl.alpha() == Rational(1, 2));
  CHECK(pl.beta() == -1);

  CHECK_THROWS_AS(DimensionFunction::parse("pow:0"), ConfigError);
  CHECK_THROWS_AS(DimensionFunction::parse("pow:-1"), ConfigError);
  CHECK_THROWS_AS(DimensionFunction::parse("powlog:1/2:1"), ConfigError);
  CHECK_NOTHROW(DimensionFunction::parse("powlog:2:1"));
  CHECK_THROWS_AS(DimensionFunction::parse("powlog:1/2"), ConfigError);
  CHECK_THROWS_AS(DimensionFunction::parse("gauss"), ConfigError);
}

TEST_CASE("power evaluation exact at perfect powers") {
  DimensionFunction h = DimensionFunction::parse("pow:1/2");
  RationalInterval e = h.enclosure(Rational(1, 4), kTol);
  CHECK(e.lo == Rational(1, 2));
  CHECK(e.hi == Rational(1, 2));
  CHECK(h_upper(h, RationalInterval::point(Rational(1, 4)), kTol) ==
        Rational(1, 2));

  DimensionFunction h23 = DimensionFunction::parse("pow:2/3");
  RationalInterval e23 = h23.enclosure(Rational(1, 8), kTol);
  CHECK(e23.lo == Rational(1, 4));
  CHECK(e23.hi == Rational(1, 4));
}

TEST_CASE("h at zero and domain checks") {
  for (const char* spec : {"pow:1/2", "loginv", "powlog:1/2:-1"}) {
    DimensionFunction h = DimensionFunction::parse(spec);
    CHECK(h_upper(h, RationalInterval::point(Rational(0)), kTol) ==
          Rational(0));
    CHECK_THROWS_AS(h.enclosure(Rational(2), kTol), DomainError);
    CHECK_THROWS_AS(h.enclosure(Rational(1, 2), Rational(0)), DomainError);
    CHECK_THROWS_AS(
        h_upper(h, RationalInterval(Rational(1, 2), Rational(2)), kTol),
        DomainError);
  }
}

TEST_CASE("frozen high-precision evaluations") {
  // sqrt(1/10) = 0.31622776601683793319...
  DimensionFunction p = DimensionFunction::parse("pow:1/2");
  check_encloses(p.enclosure(Rational(1, 10), kTol),
                 dec("0.316227766016837933"), dec("0.316227766016837934"),
                 kTol);

  // loginv at x = 183156389/10^10 (near e^-4): 0.25000000003844330715...
  DimensionFunction li = DimensionFunction::parse("loginv");
  check_encloses(li.enclosure(Rational(Int(183156389), Int("10000000000")), kTol),
                 dec("0.250000000038443307"), dec("0.250000000038443308"),
                 kTol);

  // loginv at 1/3 (log branch): 1/ln3 = 0.91023922662683739361...
  check_encloses(li.enclosure(Rational(1, 3), kTol),
                 dec("0.910239226626837393"), dec("0.910239226626837394"),
                 kTol);

  // loginv at 1/2 (linear branch): 1.13212055882855767840...
  check_encloses(li.enclosure(Rational(1, 2), kTol),
                 dec("1.132120558828557678"), dec("1.132120558828557679"),
                 kTol);

  // powlog:1/2:-1 at 1/100: 0.02171472409516259138...
  DimensionFunction pl = DimensionFunction::parse("powlog:1/2:-1");
  check_encloses(pl.enclosure(Rational(1, 100), kTol),
                 dec("0.021714724095162591"), dec("0.021714724095162592"),
                 kTol);

  // powlog:2:1 at 1/8: (1/64)ln8 = 0.03249127408874743637...
  DimensionFunction pl2 = DimensionFunction::parse("powlog:2:1");
  check_encloses(pl2.enclosure(Rational(1, 8), kTol),
                 dec("0.032491274088747436"), dec("0.032491274088747437"),
                 kTol);
}

TEST_CASE("just above the linear-branch junction") {
  DimensionFunction li = DimensionFunction::parse("loginv");
  // x - e^-1 = 4.0448e-19, so h(x) = 1 + (x - e^-1) sits barely above 1
  RationalInterval e = li.enclosure(dec("0.367879441171442322"), kTol);
  CHECK(e.hi >= 1);
  CHECK(e.lo <= dec("1.00000000000000000041"));
  CHECK(e.width() <= Rational(1, Int(1) << 60));
}

TEST_CASE("monotonicity property") {
  auto rng = patternset::test::make_rng();
  for (const char* spec : {"pow:1/2", "pow:3", "loginv", "powlog:1/2:-1",
                           "powlog:2:1"}) {
    DimensionFunction h = DimensionFunction::parse(spec);
    for (int it = 0; it < 400; ++it) {
      Rational a = patternset::test::random_rational(rng, 1, 1000000,
                                                     1000000);
      Rational b = patternset::test::random_rational(rng, 1, 1000000,
                                                     1000000);
      if (a > 1 || b > 1) continue;
      if (a > b) std::swap(a, b);
      Rational ua = h_upper(h, RationalInterval::point(a), kTol);
      Rational ub = h_upper(h, RationalInterval::point(b), kTol);
      CHECK(ua <= ub + 2 * kTol);
    }
  }
}

TEST_CASE("log2 upper bounds") {
  DimensionFunction p = DimensionFunction::parse("pow:1/2");
  CHECK(p.log2_upper(Dyadic::pow2(-20)) == Rational(-10));

  DimensionFunction li = DimensionFunction::parse("loginv");
  // log2(1/(100 ln2)) = -6.11508981682982708149...
  Rational u = li.log2_upper(Dyadic::pow2(-100));
  CHECK(u >= dec("-6.115089816829827082"));
  CHECK(u <= dec("-6.115089816829827081"));

  DimensionFunction pl = DimensionFunction::parse("powlog:1/2:-1");
  // -50 + log2(1/(100 ln2)) = -56.11508981682982708...
  Rational upl = pl.log2_upper(Dyadic::pow2(-100));
  CHECK(upl >= dec("-56.115089816829827082"));
  CHECK(upl <= dec("-56.115089816829827081"));

  CHECK_THROWS_AS(p.log2_upper(Dyadic::pow2(-1)), DomainError);
  CHECK_THROWS_AS(p.log2_upper(Dyadic(0, 0)), DomainError);

  // sound also at exponents far beyond materialization
  Int big = Int(1) << 40;
  CHECK(p.log2_upper(Dyadic::pow2(-big)) == -Rational(big) / 2);
}

TEST_CASE("ratio evidence for the vanishing order") {
  DimensionFunction p1 = DimensionFunction::parse("pow:1");
  DimensionFunction p12 = DimensionFunction::parse("pow:1/2");
  std::vector<Rational> probes;
  for (int k = 1; k <= 12; ++k) probes.push_back(Rational(1, Int(1) << 2 * k));
  ComparisonEvidence ev = h_compare(p1, p12, probes);
  CHECK(ev.consistent);
  CHECK(ev.probes.size() == probes.size());
  // ratio at 2^-2k is exactly 2^-k
  CHECK(ev.probes[0].ratio.contains(Rational(1, 2)));

  ComparisonEvidence same = h_compare(p12, p12, probes);
  CHECK_FALSE(same.consistent);

  // reversed order: ratio grows, no consistency
  ComparisonEvidence rev = h_compare(p12, p1, probes);
  CHECK_FALSE(rev.consistent);

  // pow:1/4 vanishes faster than loginv
  DimensionFunction li = DimensionFunction::parse("loginv");
  std::vector<Rational> deep;
  for (int k = 2; k <= 6; ++k) deep.push_back(Rational(1, Int(1) << (1 << k)));
  ComparisonEvidence mix = h_compare(DimensionFunction::parse("pow:1/4"), li,
                                     deep);
  CHECK(mix.consistent);

  CHECK_THROWS_AS(h_compare(p1, p12, {Rational(1, 4), Rational(1, 2)}),
                  DomainError);
  CHECK_THROWS_AS(h_compare(p1, p12, {Rational(0)}), DomainError);
}
