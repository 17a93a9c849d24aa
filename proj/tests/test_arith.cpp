#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "shiftconv/arith.hpp"
#include "shiftconv/errors.hpp"
#include "shiftconv/tau_io.hpp"

using namespace shiftconv;

namespace {

// Ordered triples (a, b, c) with abc = n by direct enumeration.
std::uint32_t triples_brute(std::uint32_t n) {
  std::uint32_t count = 0;
  for (std::uint32_t a = 1; a <= n; ++a) {
    if (n % a) continue;
    const std::uint32_t m = n / a;
    for (std::uint32_t b = 1; b <= m; ++b) {
      if (m % b == 0) ++count;
    }
  }
  return count;
}

// Coefficients of q * prod_{k <= n} (1 - q^k)^24, factor by factor.
std::vector<BigInt> tau_product_oracle(std::size_t n) {
  std::vector<BigInt> c(n, 0);  // c[i] = coefficient of q^i in the product
  c[0] = 1;
  for (std::size_t k = 1; k < n; ++k) {
    for (int rep = 0; rep < 24; ++rep) {
      for (std::size_t i = n - 1; i >= k; --i) c[i] -= c[i - k];
    }
  }
  std::vector<BigInt> tau(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) tau[i + 1] = c[i];
  return tau;
}

std::uint32_t divisor_count(std::size_t n) {
  std::uint32_t d = 0;
  for (std::size_t k = 1; k * k <= n; ++k) {
    if (n % k == 0) d += (k * k == n) ? 1 : 2;
  }
  return d;
}

}  // namespace

TEST_CASE("sieve_d3 examples and errors") {
  const auto d3 = sieve_d3(12);
  CHECK(d3[1] == 1);
  CHECK(d3[4] == 6);
  CHECK(d3[12] == 18);
  CHECK_THROWS_AS(sieve_d3(0), InvalidArgument);
}

TEST_CASE("sieve_d3 matches brute-force triple counting") {
  const auto d3 = sieve_d3(5000);
  for (std::uint32_t n = 1; n <= 5000; ++n) {
    REQUIRE_MESSAGE(d3[n] == triples_brute(n), "n = " << n);
  }
}

TEST_CASE("d3 on prime powers and coprime products") {
  const auto d3 = sieve_d3(100000);
  for (i64 p : primes_in(2, 300)) {
    std::size_t pk = static_cast<std::size_t>(p);
    for (std::uint32_t k = 1; pk <= 100000; ++k, pk *= static_cast<std::size_t>(p)) {
      CHECK(d3[pk] == (k + 1) * (k + 2) / 2);
    }
  }
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t a = 1 + rng() % 300, b = 1 + rng() % 300;
    if (gcd(static_cast<i64>(a), static_cast<i64>(b)) != 1) continue;
    CHECK(d3[a * b] == d3[a] * d3[b]);
  }
}

TEST_CASE("tau examples") {
  const auto tau = compute_tau(6);
  CHECK(tau[1] == 1);
  CHECK(tau[2] == -24);
  CHECK(tau[3] == 252);
  CHECK(tau[6] == tau[2] * tau[3]);
  CHECK_THROWS_AS(compute_tau(0), InvalidArgument);
}

TEST_CASE("tau matches the literal product expansion") {
  const std::size_t n = 1200;
  const auto oracle = tau_product_oracle(n);
  const auto tau = compute_tau(n);
  for (std::size_t k = 1; k <= n; ++k) REQUIRE_MESSAGE(tau[k] == oracle[k], "n = " << k);
}

TEST_CASE("fast path and arbitrary-width expansion agree") {
  const auto fast = compute_tau_detailed(3000, true);
  const auto slow = compute_tau_detailed(3000, false);
  CHECK(fast.used_fast_path);
  CHECK_FALSE(slow.used_fast_path);
  CHECK(fast.tau == slow.tau);
}

TEST_CASE("tau Hecke relations and multiplicativity") {
  const auto tau = compute_tau(20000);
  CHECK(check_tau_relations(tau) > 1000);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    const std::size_t a = 1 + rng() % 140, b = 1 + rng() % 140;
    if (gcd(static_cast<i64>(a), static_cast<i64>(b)) != 1) continue;
    CHECK(tau[a * b] == tau[a] * tau[b]);
  }
  auto broken = tau;
  broken[4] += 1;
  CHECK_THROWS(check_tau_relations(broken));
}

TEST_CASE("tau0 normalization, bounds and coverage") {
  const auto t = ArithmeticTables::build(5000, 100);
  CHECK(t->tau0(1) == 1.0);
  CHECK(t->tau0(0) == 0.0);
  CHECK(t->tau0(2) == doctest::Approx(-24.0 / std::pow(2.0, 5.5)).epsilon(1e-15));
  CHECK_THROWS_AS(t->tau0(5001), OutOfRange);
  CHECK_THROWS_AS(t->d3(101), OutOfRange);

  using Dec = boost::multiprecision::cpp_dec_float_50;
  for (std::size_t n = 1; n <= 5000; ++n) {
    const double v = t->tau0(n);
    CHECK(std::abs(v) <= divisor_count(n));
    if (n % 7 == 1) {
      const Dec exact = Dec(t->tau(n)) / pow(Dec(n), Dec(11) / 2);
      const double ref = exact.convert_to<double>();
      CHECK(std::abs(v - ref) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(ref));
    }
  }
  for (i64 p : primes_in(2, 5000)) CHECK(std::abs(t->tau0(static_cast<std::size_t>(p))) <= 2.0);
}

TEST_CASE("tau cache formats round-trip") {
  const auto tau = compute_tau(400);
  std::stringstream bin;
  write_tau_binary(bin, tau);
  CHECK(bin.str().substr(0, 4) == "TAUC");
  CHECK(read_tau_binary(bin) == tau);

  std::stringstream txt;
  write_tau_text(txt, tau);
  CHECK(read_tau_text(txt) == tau);

  std::stringstream bad("TAUX");
  CHECK_THROWS(read_tau_binary(bad));
}

TEST_CASE("shared d3 grows and stays consistent") {
  const auto a = shared_d3(1000);
  const auto b = shared_d3(50000);
  REQUIRE(a->size() > 1000);
  REQUIRE(b->size() > 50000);
  for (std::size_t n = 1; n <= 1000; ++n) CHECK((*a)[n] == (*b)[n]);
}
