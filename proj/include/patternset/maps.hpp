#ifndef PATTERNSET_MAPS_HPP
#define PATTERNSET_MAPS_HPP

#include <string>
#include <vector>

#include "patternset/interval.hpp"
#include "patternset/numbers.hpp"

namespace patternset {

// Univariate polynomial over Q, non-constant, leading coefficient != 0.
struct Polynomial {
  std::vector<Rational> coeffs;  // a_0 .. a_n

  explicit Polynomial(std::vector<Rational> c);
  long degree() const { return static_cast<long>(coeffs.size()) - 1; }
  const Rational& leading() const { return coeffs.back(); }

  Rational eval(const Rational& x) const;
  RationalInterval eval(const RationalInterval& x) const;  // interval Horner
  Polynomial derivative() const;

  // "a0 + a1*x + a2*x^2" with rational literals "p/q"; also accepts
  // compact forms like "x^3 - 5*x" and "2x+1".
  static Polynomial parse(const std::string& text);
  std::string to_string() const;
};

// psi(y) = q * (sign * y)^(1/n): the root map straightening a degree-n
// polynomial into a non-expansive bilipschitz map.
struct Conjugator {
  Dyadic q;
  long n = 1;
  int sign = 1;
};

// q is a dyadic inside a certified sub-bracket of
// [1/(2|a_n|^{1/n}), 3/(4|a_n|^{1/n})], midpoint-biased with the smallest
// exponent (ties to the lower candidate); sign = sign(a_n).
Conjugator choose_conjugator(const Polynomial& P);

// g = psi o P together with the certified threshold M_P: on [M_P - 1, oo),
// sign*P > 0 eventually strictly positive and increasing, and
// 1/4 <= g' <= 1 (certified by adaptive interval subdivision up to a
// crossover point T plus an analytic tail bound beyond T).
struct ConjugatedMap {
  Polynomial P;
  Conjugator psi;
  Int M_P;
};

// Least certifiable integer threshold (doubling + binary search, cap 2^40).
ConjugatedMap compute_threshold(const Polynomial& P, const Conjugator& psi);

// Enclosure of g(x) for x within [M_P - 1, oo); width <= width(x) + 2*tol.
RationalInterval g_forward(const ConjugatedMap& cm, const RationalInterval& x,
                           const Rational& tol);

// Enclosure of g^-1(y); BracketError when y lies below g(M_P).
RationalInterval g_inverse(const ConjugatedMap& cm, const RationalInterval& y,
                           const Rational& tol);

// f(x) = slope*x + intercept, with the scaling lambda making
// x -> f(lambda*x) non-contractive bilipschitz with constants (1, L).
struct AffineMap {
  Rational slope;
  Rational intercept;
  Dyadic lambda = Dyadic::one();

  Rational eval(const Rational& x) const { return slope * x + intercept; }
};

// Picks the power-of-two lambda with 1 <= |slope|*lambda <= L (L >= 2).
AffineMap conjugate_bilipschitz(const AffineMap& f, long L);

// Sparse multivariate polynomial in variables x1..xN.
struct MultiPoly {
  struct Term {
    Rational coeff;
    std::vector<long> exponents;  // one per variable, trailing zeros ok
  };
  long nvars = 1;
  std::vector<Term> terms;

  long total_degree() const;
  static MultiPoly parse(const std::string& text);
};

struct Reduction {
  std::vector<Rational> lambdas;  // lambda_2 .. lambda_N
  std::vector<Polynomial> univariate;
};

// Substitutes x1 = t, xj = lambda_j * t with the first integer tuple
// (growing box, lexicographic) keeping every top-degree form nonzero, so
// each output degree equals the input total degree.
Reduction reduce_multivariate(const std::vector<MultiPoly>& polys);

}  // namespace patternset

#endif  // PATTERNSET_MAPS_HPP
