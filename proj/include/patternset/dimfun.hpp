#ifndef PATTERNSET_DIMFUN_HPP
#define PATTERNSET_DIMFUN_HPP

#include <string>
#include <vector>

#include "patternset/interval.hpp"
#include "patternset/numbers.hpp"

namespace patternset {

// Dimension function h: non-decreasing, h(0)=0, h>0 on (0,1]. Three
// catalog families:
//   Power(a)      h(x) = x^a, a > 0 rational
//   LogInverse    h(x) = 1/ln(1/x) on (0, e^-1], 1 + (x - e^-1) above
//   PowerLog(a,b) h(x) = x^a (ln(1/x))^b on (0, e^-1], linear above
// The linear pieces are a concrete monotone extension; only behavior near 0
// matters for the measure-zero claims.
class DimensionFunction {
 public:
  enum class Kind { Power, LogInverse, PowerLog };

  static DimensionFunction power(const Rational& alpha);
  static DimensionFunction log_inverse();
  // Monotonicity on (0, e^-1] requires beta <= 0 or beta <= alpha.
  static DimensionFunction power_log(const Rational& alpha, long beta);

  // "pow:1/2" | "loginv" | "powlog:1/2:-1"
  static DimensionFunction parse(const std::string& spec);

  Kind kind() const { return kind_; }
  const Rational& alpha() const { return alpha_; }
  long beta() const { return beta_; }
  const std::string& label() const { return label_; }

  // Certified enclosure of h(x), 0 <= x <= 1, width <= tol.
  RationalInterval enclosure(const Rational& x, const Rational& tol) const;

  // Certified upper bound of log2(h(t)) for a dyadic t with log2(t) <= -2;
  // never materializes t. Used at depths where 2^|exponent| does not fit
  // in memory.
  Rational log2_upper(const Dyadic& t) const;

 private:
  DimensionFunction(Kind k, Rational a, long b, std::string label)
      : kind_(k), alpha_(std::move(a)), beta_(b), label_(std::move(label)) {}

  Kind kind_;
  Rational alpha_;  // Power / PowerLog exponent
  long beta_;       // PowerLog log exponent
  std::string label_;
};

// Upper bound u with h(x) <= u for all x in t and u <= h(t.hi) + tol.
// Requires t within [0,1] (monotonicity reduces this to enclosing h(t.hi)).
Rational h_upper(const DimensionFunction& h, const RationalInterval& t,
                 const Rational& tol);

// Numerical evidence for the partial order h2 < h1 (h1 vanishes faster):
// certified enclosures of h1(x)/h2(x) at the probes; "consistent" iff the
// ratio upper bounds strictly decrease and the final one is < 10^-3.
struct ComparisonEvidence {
  struct Probe {
    Rational x;
    RationalInterval ratio;
  };
  std::vector<Probe> probes;
  bool consistent = false;
};

ComparisonEvidence h_compare(const DimensionFunction& h1,
                             const DimensionFunction& h2,
                             const std::vector<Rational>& probes);

}  // namespace patternset

#endif  // PATTERNSET_DIMFUN_HPP
