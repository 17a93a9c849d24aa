#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "shiftconv/arith.hpp"
#include "shiftconv/numeric.hpp"

namespace shiftconv {

using Rational = boost::multiprecision::cpp_rational;

// Moduli set for the circle-method approximation. Product families hold
// q = q1 q2 with q1, q2 primes from disjoint dyadic ranges [Q1, 2 Q1], [Q2, 2 Q2].
struct ModulusFamily {
  i64 r = 1;
  std::vector<i64> Q1_list, Q2_list;
  std::vector<i64> products;  // increasing
  Rational delta;             // interval half-width
  i64 L = 0;                  // sum of phi(q)
  double Q1 = 0.0, Q2 = 0.0;  // dyadic range starts (0 for explicit families)
  bool product_family = false;

  // Q1 Q2 for product families, the largest modulus otherwise.
  double Q() const;
  double delta_value() const;
};

ModulusFamily build_modulus_family(double Q1, double Q2, i64 r,
                                   std::optional<Rational> delta = std::nullopt);

// Arbitrary moduli (distinct, positive); no primality or range checks beyond
// 0 < delta <= 1/2.
ModulusFamily family_from_moduli(std::vector<i64> moduli, Rational delta, i64 r = 1);

// 1 / ceil(Q^{3/2}).
Rational default_delta(double Q);

// Number of (q, a) with gcd(a, q) = 1 and |x - a/q| <= delta on R/Z.
i64 i_tilde_count(const ModulusFamily& fam, double x);

// count / (2 delta L)
double i_tilde(const ModulusFamily& fam, double x);

struct DiscrepancyReport {
  Rational exact;        // integral of (1 - I~)^2 over [0, 1)
  double value = 0.0;
  Rational mass;         // integral of I~, exactly 1 for every valid family
  std::size_t breakpoints = 0;
  std::size_t pieces = 0;  // constant pieces on the circle
  double bound_scale = 0.0;  // Q^2 / (delta L^2)
  double ratio = 0.0;        // value / bound_scale
};

DiscrepancyReport l2_discrepancy(const ModulusFamily& fam);

struct MonteCarloReport {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

// Sample mean of (1 - I~(x))^2 over uniform x.
MonteCarloReport monte_carlo_discrepancy(const ModulusFamily& fam, std::size_t samples,
                                         std::uint64_t seed = 20240601);

// (1/L) sum_q sum*_a e_q(-a) [sum_n d3(n) e_q(arn) e(alpha r n) W(n/X)]
//                            [sum_m tau0(m) e_q(-am) e(-alpha m) V(m/Y)],  Y = r X.
cplx d_tilde_alpha(const ModulusFamily& fam, double alpha, const ArithmeticTables& tables,
                   double X, i64 r, double H);

// Per-modulus terms of d_tilde_alpha before the 1/L weight, in products order.
std::vector<cplx> d_tilde_alpha_terms(const ModulusFamily& fam, double alpha,
                                      const ArithmeticTables& tables, double X, i64 r, double H);

struct DTildeReport {
  cplx value;       // with 2 * points nodes
  cplx coarse;      // with points nodes
  int points = 0;
  double change = 0.0;  // |value - coarse| / |value|
};

// (1 / 2 delta) int_{-delta}^{delta} d_tilde_alpha(alpha) e(-alpha) d alpha by
// Gauss-Legendre, checked by doubling the node count.
DTildeReport d_tilde(const ModulusFamily& fam, const ArithmeticTables& tables, double X, i64 r,
                     double H, int quadrature_points = 17, double tol = 1e-6);

struct CuspSup {
  double max = 0.0;
  double ratio = 0.0;  // max / sqrt(Y)
  double argmax = 0.0;
};

// max over x = k / grid of |sum_m tau0(m) e(-x m) V(m/Y)|.
CuspSup cusp_sum_sup(const ArithmeticTables& tables, double Y, i64 grid, bool zero_window = false);

}  // namespace shiftconv
