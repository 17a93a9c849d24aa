#include <doctest.h>

#include <cmath>
#include <random>

#include "shiftconv/arith.hpp"
#include "shiftconv/errors.hpp"
#include "shiftconv/expsums.hpp"

using namespace shiftconv;

namespace {

cplx ex(double x) { return std::polar(1.0, 2.0 * kPi * x); }

// Kloosterman sum by a plain double loop over x and its inverse found by search.
cplx kloosterman_oracle(i64 a, i64 b, i64 q) {
  cplx s{};
  for (i64 x = 0; x < q; ++x) {
    if (std::gcd(x, q) != 1 && q > 1) continue;
    i64 xb = 0;
    while ((x * xb) % q != 1 % q) ++xb;
    s += ex(static_cast<double>((a * x + b * xb) % q) / static_cast<double>(q));
  }
  return s;
}

// D_{3,+-}(a, q; n) by the full quadruple sum.
cplx d3_charsum_oracle(i64 a, i64 q, i64 n, int sign) {
  cplx s{};
  for (i64 n1 = 1; n1 <= n; ++n1) {
    if (n % n1) continue;
    for (i64 n2 = 1; n2 <= n / n1; ++n2) {
      if ((n / n1) % n2) continue;
      const i64 n3 = n / n1 / n2;
      for (i64 b = 0; b < q; ++b)
        for (i64 c = 0; c < q; ++c)
          for (i64 d = 0; d < q; ++d) {
            const double lin = static_cast<double>((b * n1 + c * n2 + d * n3) % q);
            const double quad = static_cast<double>((a * b * c * d) % q);
            const double qd = static_cast<double>(q);
            s += ex((lin + quad) / qd) - static_cast<double>(sign) * ex((lin - quad) / qd);
          }
    }
  }
  return s;
}

i64 inv(i64 a, i64 q) { return mod_inverse(mod(a, q), q); }

}  // namespace

TEST_CASE("kloosterman examples and symmetry") {
  CHECK(std::abs(kloosterman(0, 0, 12).value - cplx(euler_phi(12))) < 1e-12);
  CHECK(std::abs(kloosterman(1, 1, 2).value - 1.0) < 1e-12);
  CHECK(std::abs(kloosterman(1, 1, 3).value + 1.0) < 1e-12);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const i64 q = 1 + static_cast<i64>(rng() % 90);
    const i64 a = static_cast<i64>(rng() % 200) - 100, b = static_cast<i64>(rng() % 200) - 100;
    const cplx v = kloosterman(a, b, q).value;
    CHECK(std::abs(v - kloosterman_oracle(mod(a, q), mod(b, q), q)) < 1e-9);
    CHECK(std::abs(v - kloosterman(b, a, q).value) < 1e-9);
    CHECK(std::abs(v.imag()) <= 1e-9 * static_cast<double>(q));
  }
}

TEST_CASE("kloosterman row matches single evaluations") {
  const i64 q = 35;
  const auto row = kloosterman_row(q);
  for (i64 c = 0; c < q; ++c) CHECK(std::abs(row[c] - kloosterman(1, c, q).value) < 1e-9);
}

TEST_CASE("Weil bound at small primes") {
  for (i64 p : primes_in(2, 60)) {
    for (i64 a = 1; a < p; ++a)
      for (i64 b = 1; b < p; ++b) CHECK(std::abs(kloosterman(a, b, p).value) <= 2.0 * std::sqrt(p) + 1e-9);
  }
}

TEST_CASE("twisted multiplicativity") {
  std::mt19937_64 rng(5);
  for (i64 q1 = 2; q1 <= 20; ++q1)
    for (i64 q2 = 2; q1 * q2 <= 200; ++q2) {
      if (gcd(q1, q2) != 1) continue;
      for (int k = 0; k < 20; ++k) {
        const i64 q = q1 * q2;
        const i64 a = static_cast<i64>(rng() % q), b = static_cast<i64>(rng() % q);
        const cplx lhs = kloosterman(a, b, q).value;
        const cplx rhs = kloosterman(a * inv(q2, q1), b * inv(q2, q1), q1).value *
                         kloosterman(a * inv(q1, q2), b * inv(q1, q2), q2).value;
        CHECK(std::abs(lhs - rhs) < 1e-9);
      }
    }
}

TEST_CASE("d3_charsum examples, oracle and errors") {
  const auto d3 = sieve_d3(100);
  for (i64 n = 1; n <= 30; ++n) {
    CHECK(std::abs(d3_charsum(1, 1, n, Sign::plus).value) < 1e-12);
    CHECK(std::abs(d3_charsum(1, 1, n, Sign::minus).value - 2.0 * d3[n]) < 1e-9);
  }
  for (Sign s : {Sign::plus, Sign::minus}) {
    const cplx naive = d3_charsum(2, 5, 6, s, Method::naive).value;
    const cplx reduced = d3_charsum(2, 5, 6, s, Method::reduced).value;
    CHECK(std::abs(naive - reduced) < 1e-9);
    CHECK(std::abs(naive - d3_charsum_oracle(2, 5, 6, sign_value(s))) < 1e-9);
  }
  CHECK_THROWS_AS(d3_charsum(5, 10, 3, Sign::plus), InvalidArgument);
}

TEST_CASE("d3_charsum reduced equals naive on random inputs") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 60; ++i) {
    const i64 q = 1 + static_cast<i64>(rng() % 12);
    const i64 n = 1 + static_cast<i64>(rng() % 60);
    i64 a = 1 + static_cast<i64>(rng() % 50);
    while (gcd(a, q) != 1) ++a;
    const Sign s = (rng() & 1) ? Sign::plus : Sign::minus;
    const double q3 = static_cast<double>(q * q * q);
    CHECK(std::abs(d3_charsum(a, q, n, s, Method::naive).value -
                   d3_charsum(a, q, n, s, Method::reduced).value) <= 1e-9 * q3);
  }
}

TEST_CASE("D3CharsumTable agrees with d3_charsum") {
  const auto d3 = sieve_d3(500);
  for (i64 q : {3, 4, 6, 7}) {
    const D3CharsumTable table(q, 500);
    for (i64 a : units_mod(q)) {
      for (i64 n = 1; n <= 200; n += 7) {
        i64 smooth = 0, coprime = 0;
        table.split(n, smooth, coprime);
        CHECK(smooth * coprime == n);
        for (Sign s : {Sign::plus, Sign::minus}) {
          CHECK(std::abs(table.value(a, n, s, d3[coprime]) - d3_charsum(a, q, n, s).value) < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("s_star basics and factorization") {
  const auto d3 = sieve_d3(100);
  CHECK(std::abs(s_star(1, 1, 1, 1).value - 1.0) < 1e-12);
  for (i64 n = 1; n <= 12; ++n) CHECK(std::abs(s_star(3, n, 1, 1).value - cplx(d3[n])) < 1e-12);
  CHECK(std::abs(s_star(1, 2, 3, 1, Method::naive).value - s_star(1, 2, 3, 1).value) < 1e-9);

  const i64 ps[] = {2, 3, 5, 7, 11};
  for (i64 q1 : ps)
    for (i64 q2 : ps) {
      if (q1 >= q2) continue;
      for (i64 r : {1, 2, 3}) {
        if (gcd(r, q1 * q2) != 1) continue;
        for (i64 m = 1; m <= 10; m += 3)
          for (i64 n = 1; n <= 10; ++n) {
            const cplx direct = s_star(m, n, q1 * q2, r).value;
            const cplx split = s_star_factored(m, n, q1, q2, r).value;
            CHECK(std::abs(direct - split) <= 1e-6 * std::max(1.0, std::abs(direct)));
            if (gcd(n, q1 * q2) == 1) {
              const cplx collapsed = s_dagger_prime(m, n, q2, q1, r).value *
                                     s_dagger_prime(m, n, q1, q2, r).value / static_cast<double>(d3[n]);
              CHECK(std::abs(direct - collapsed) <= 1e-6 * std::max(1.0, std::abs(direct)));
            }
          }
      }
    }
}

TEST_CASE("s_dagger_prime: reduced form, bound and normalization") {
  const auto d3 = sieve_d3(100);
  CHECK(std::abs(s_dagger_prime(1, 2, 7, 5, 1, Method::naive).value -
                 s_dagger_prime(1, 2, 7, 5, 1, Method::reduced).value) <= 1e-9 * 125);
  const double v = std::abs(s_dagger_prime(1, 5, 7, 5, 1).value);
  MESSAGE("|s_dagger_prime(1,5,7,5)| / bound = " << v / s_dagger_prime_bound(5, 5));
  CHECK(s_dagger_prime_bound(5, 5) == doctest::Approx(std::pow(5.0, 1.5) * 5 * 3));

  // q1 = 2, n odd: phases reduce to signs; expanded by hand over a = 1 and b, c, d in {0, 1}.
  for (i64 n : {1, 3, 9, 15}) {
    for (i64 m : {0, 1}) {
      cplx hand{};
      for (const auto& t : divisor_triples(n)) {
        cplx inner{};
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) inner += ((b * t.n1 + c * t.n2 + d * t.n3 + b * c * d) % 2) ? -1.0 : 1.0;
        hand += ((1 + m) % 2 ? -1.0 : 1.0) * inner;
      }
      CHECK(std::abs(s_dagger_prime(m, n, 3, 2, 1).value - hand) < 1e-9);
    }
  }

  std::mt19937_64 rng(23);
  const i64 ps[] = {3, 5, 7, 11, 13};
  for (int i = 0; i < 100; ++i) {
    const i64 q1 = ps[rng() % 5];
    i64 q2 = ps[rng() % 5];
    if (q2 == q1) q2 = 17;
    const i64 m = static_cast<i64>(rng() % 30), n = 1 + static_cast<i64>(rng() % 40);
    const i64 r = 1 + static_cast<i64>(rng() % 2);
    if (gcd(r, q1) != 1) continue;
    const double q13 = static_cast<double>(q1 * q1 * q1);
    const cplx reduced = s_dagger_prime(m, n, q2, q1, r, Method::reduced).value;
    CHECK(std::abs(reduced - s_dagger_prime(m, n, q2, q1, r, Method::naive).value) <= 1e-9 * q13);
    if (n % q1 != 0) {
      const i64 q2b = inv(q2, q1);
      const cplx rel = static_cast<double>(d3[n] * q1) *
                       s_dagger(m * q2b % q1 * q2b, n * q2b % q1 * q2b % q1 * q2b, q1, r).value;
      CHECK(std::abs(reduced - rel) <= 1e-9 * q13);
    }
  }
  CHECK_THROWS_AS(s_dagger_prime(1, 1, 7, 9, 1), InvalidArgument);
  CHECK_THROWS_AS(s_dagger_prime(1, 1, 10, 5, 1), InvalidArgument);
}

TEST_CASE("s_dagger examples and square-root scan") {
  CHECK(std::abs(s_dagger(4, 7, 1, 1).value - 1.0) < 1e-12);
  cplx direct{};
  for (i64 a : {1, 2}) {
    const i64 ab = inv(a, 3);
    direct += ex(static_cast<double>(mod(-a - ab, 3)) / 3.0) * kloosterman_oracle(1, mod(-ab, 3), 3);
  }
  CHECK(std::abs(s_dagger(1, 1, 3, 1).value - direct) < 1e-9);
  CHECK(std::abs(s_dagger(1, 1, 3, 1, Method::naive).value - direct) < 1e-9);
  double worst = 0.0;
  for (i64 p : primes_in(2, 50))
    for (i64 m = 0; m < p; m += 3)
      for (i64 n = 0; n < p; n += 2) worst = std::max(worst, std::abs(s_dagger(m, n, p, 1).value) / p);
  MESSAGE("max |s_dagger| / q over primes <= 50: " << worst);
  CHECK(worst < 10.0);
  CHECK_THROWS_AS(s_dagger(1, 1, 6, 2), InvalidArgument);
}

TEST_CASE("t_sum vanishing laws") {
  const i64 ps[] = {3, 5, 7};
  for (i64 q1 : ps)
    for (i64 q1t : ps)
      for (i64 q2 : ps) {
        if (q2 == q1 || q2 == q1t) continue;
        const double scale = t_sum_scale(q1, q1t, q2);
        const i64 big = q1 * q1t * q2;
        for (i64 m = 0; m < big; ++m) {
          const auto row = t_sum_all_n(m, q1, q1t, q2, 1);
          for (i64 n = 0; n < big; ++n) {
            const bool vanish = q1 != q1t ? gcd(n, q1 * q1t) > 1 : n % q1 != 0;
            if (vanish) REQUIRE(std::abs(row[n]) <= 1e-6 * scale);
          }
        }
      }
  CHECK(std::abs(t_sum(2, 4, 3, 5, 7, 1).value - t_sum_all_n(2, 3, 5, 7, 1)[4]) < 1e-8);
  const double c = std::abs(t_sum(1, 1, 3, 5, 7, 1).value) / t_sum_scale(3, 5, 7);
  MESSAGE("|T(1,1;3,5,7)| / scale = " << c);
  CHECK_THROWS_AS(t_sum(1, 1, 3, 5, 5, 1), InvalidArgument);
  CHECK_THROWS_AS(t_sum(1, 1, 3, 5, 7, 3), InvalidArgument);
}
