#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shiftconv/numeric.hpp"

namespace shiftconv {

enum class Method { naive, reduced };

struct CharSumValue {
  cplx value;
  i64 modulus = 1;
  Method method = Method::reduced;
};

// Ordered factorizations n = n1*n2*n3.
struct DivisorTriple {
  i64 n1, n2, n3;
};
std::vector<DivisorTriple> divisor_triples(i64 n);

// S(a, b; q) = sum over units x of e((a x + b xbar) / q).
CharSumValue kloosterman(i64 a, i64 b, i64 q);

// S(1, c; q) for every residue c mod q.
std::vector<cplx> kloosterman_row(i64 q);

// D_{3,+-}(a, q; n): sum over n1 n2 n3 = n and b, c, d mod q of
// e((b n1 + c n2 + d n3 + a b c d)/q) -+ e((b n1 + c n2 + d n3 - a b c d)/q).
// Sign::plus pairs with "-" between the two exponentials, Sign::minus with "+".
CharSumValue d3_charsum(i64 a, i64 q, i64 n, Sign sign, Method method = Method::reduced);

// Sum over units a of e_q(-a - abar m) times the divisor-triple sum with
// phase e_q(b n1 + c n2 + d n3 + a b c d r).
CharSumValue s_star(i64 m, i64 n, i64 q, i64 r, Method method = Method::reduced);

// Per-triple twisted factor at the prime q1 of q = q1 q2 (the summand whose
// product over both primes reconstructs s_star):
//   sum_a* e_{q1}(-q2bar^3 a - q2 abar m) sum_{b,c,d mod q1} e_{q1}(b n1 + c n2 + d n3 + a b c d r)
cplx s_star_prime_factor(i64 m, const DivisorTriple& t, i64 q2, i64 q1, i64 r);

// s_star assembled from the two prime factors, triple by triple.
CharSumValue s_star_factored(i64 m, i64 n, i64 q1, i64 q2, i64 r);

// The twisted factor summed over divisor triples. When q1 does not divide n it
// equals d3(n) q1 sum_a* e_{q1}(-q2bar^3 a - q2 abar m) S(1, -n (a r)bar; q1).
CharSumValue s_dagger_prime(i64 m, i64 n, i64 q2, i64 q1, i64 r, Method method = Method::reduced);

// Magnitude bound q1^{3/2} (q1, n) d3(n) used to report s_dagger_prime.
double s_dagger_prime_bound(i64 n, i64 q1);

// sum_a* e_q(-a - abar m) S(1, -n (a r)bar; q).
CharSumValue s_dagger(i64 m, i64 n, i64 q, i64 r, Method method = Method::reduced);

// sum_{alpha mod q1 q1t q2} S†(m, alpha; q1 q2) conj(S†(m, alpha; q1t q2)) e(n alpha / (q1 q1t q2)).
CharSumValue t_sum(i64 m, i64 n, i64 q1, i64 q1t, i64 q2, i64 r);

// t_sum for every n modulo q1 q1t q2 at once.
std::vector<cplx> t_sum_all_n(i64 m, i64 q1, i64 q1t, i64 q2, i64 r);

// Trivial-bound scale q1^{3/2} q1t^{3/2} q2^{5/2}.
double t_sum_scale(i64 q1, i64 q1t, i64 q2);

// Fast D_{3,+-}(a, q; n) for many n at a fixed modulus, using
// D(a, q; n) = d3(n') * Lambda(n_q, a n'bar) where n = n_q n', n_q is the
// q-smooth part of n and (n', q) = 1.
class D3CharsumTable {
 public:
  // smooth_max bounds the q-smooth parts that can be looked up.
  D3CharsumTable(i64 q, i64 smooth_max);

  i64 modulus() const { return q_; }
  // d3 of the q-coprime part must be supplied by the caller.
  cplx value(i64 a, i64 n, Sign sign, std::uint32_t d3_coprime_part) const;

  // Splits n into its q-smooth part and the rest.
  void split(i64 n, i64& smooth, i64& coprime) const;
  // Lambda_plus(u, c) for smooth u and residue c (unit mod q).
  double lambda(i64 smooth, i64 c) const;
  std::size_t smooth_index(i64 smooth) const;
  // c must already be reduced into [0, q).
  double lambda_at(std::size_t index, i64 c) const {
    return lambda_[index * static_cast<std::size_t>(q_) + static_cast<std::size_t>(c)];
  }
  i64 inverse(i64 x) const { return inverse_[static_cast<std::size_t>(mod(x, q_))]; }

 private:
  i64 q_;
  std::vector<i64> primes_;
  std::vector<i64> smooth_values_;      // sorted
  std::vector<double> lambda_;          // [smooth index][c]
  std::vector<i64> inverse_;
};

}  // namespace shiftconv
