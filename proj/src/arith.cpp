#include "shiftconv/arith.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

#include "shiftconv/errors.hpp"

namespace shiftconv {

std::vector<std::uint32_t> sieve_divisors(std::size_t n_max) {
  if (n_max == 0) throw InvalidArgument("sieve_divisors: n_max must be positive");
  std::vector<std::uint32_t> d(n_max + 1, 0);
  for (std::size_t i = 1; i <= n_max; ++i) {
    for (std::size_t j = i; j <= n_max; j += i) ++d[j];
  }
  return d;
}

std::vector<std::uint32_t> sieve_d3(std::size_t n_max) {
  if (n_max == 0) throw InvalidArgument("sieve_d3: n_max must be positive");
  const auto d = sieve_divisors(n_max);
  std::vector<std::uint32_t> d3(n_max + 1, 0);
  for (std::size_t i = 1; i <= n_max; ++i) {
    const std::uint32_t di = d[i];
    for (std::size_t j = i; j <= n_max; j += i) d3[j] += di;
  }
  return d3;
}

namespace {

struct SparseTerm {
  std::size_t exponent;
  int coefficient;
};

// prod(1-q^k)^3 = sum_k (-1)^k (2k+1) q^{k(k+1)/2}
std::vector<SparseTerm> eta_cubed_terms(std::size_t degree) {
  std::vector<SparseTerm> terms;
  for (std::size_t k = 0;; ++k) {
    const std::size_t e = k * (k + 1) / 2;
    if (e > degree) break;
    const int c = static_cast<int>(2 * k + 1) * (k % 2 == 0 ? 1 : -1);
    terms.push_back({e, c});
  }
  return terms;
}

// Returns false on overflow (only possible for the fixed-width type).
template <class Int>
bool expand_eta24(std::size_t degree, std::vector<Int>& out) {
  const auto terms = eta_cubed_terms(degree);
  std::vector<Int> cur(degree + 1, Int(0));
  for (const auto& t : terms) cur[t.exponent] = Int(t.coefficient);
  std::vector<Int> next(degree + 1, Int(0));
  for (int pass = 0; pass < 7; ++pass) {
    for (std::size_t n = 0; n <= degree; ++n) {
      Int acc(0);
      for (const auto& t : terms) {
        if (t.exponent > n) break;
        const Int& v = cur[n - t.exponent];
        if constexpr (std::is_same_v<Int, __int128>) {
          __int128 prod;
          if (__builtin_mul_overflow(v, static_cast<__int128>(t.coefficient), &prod)) return false;
          if (__builtin_add_overflow(acc, prod, &acc)) return false;
        } else {
          acc += v * t.coefficient;
        }
      }
      next[n] = std::move(acc);
    }
    std::swap(cur, next);
  }
  out = std::move(cur);
  return true;
}

BigInt from_int128(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1u
                            : static_cast<unsigned __int128>(v);
  BigInt r = static_cast<std::uint64_t>(u >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(u);
  return neg ? BigInt(-r) : r;
}

}  // namespace

TauExpansion compute_tau_detailed(std::size_t n_max, bool allow_fast_path) {
  if (n_max == 0) throw InvalidArgument("compute_tau: n_max must be positive");
  TauExpansion result;
  result.tau.assign(n_max + 1, BigInt(0));
  const std::size_t degree = n_max - 1;
  if (allow_fast_path) {
    std::vector<__int128> coeffs;
    if (expand_eta24(degree, coeffs)) {
      for (std::size_t n = 1; n <= n_max; ++n) result.tau[n] = from_int128(coeffs[n - 1]);
      result.used_fast_path = true;
      return result;
    }
  }
  std::vector<BigInt> coeffs;
  expand_eta24(degree, coeffs);
  for (std::size_t n = 1; n <= n_max; ++n) result.tau[n] = std::move(coeffs[n - 1]);
  return result;
}

std::vector<BigInt> compute_tau(std::size_t n_max) {
  auto tau = compute_tau_detailed(n_max).tau;
  check_tau_relations(tau);
  return tau;
}

double normalized_tau(const BigInt& tau, std::uint64_t n) {
  if (n == 0) return 0.0;
  const long double t = tau.convert_to<long double>();
  const long double x = static_cast<long double>(n);
  const long double x2 = x * x;
  const long double scale = x2 * x2 * x * std::sqrt(x);
  return static_cast<double>(t / scale);
}

std::size_t check_tau_relations(std::span<const BigInt> tau) {
  if (tau.size() < 2) return 0;
  const std::size_t n_max = tau.size() - 1;
  std::size_t checked = 0;
  auto fail = [](const std::string& what) { throw std::logic_error("tau relation violated: " + what); };
  if (tau[1] != 1) fail("tau(1) != 1");
  for (i64 p : primes_in(2, 97)) {
    const BigInt p11 = boost::multiprecision::pow(BigInt(p), 11);
    std::size_t pk_prev = 1, pk = static_cast<std::size_t>(p);
    while (pk <= n_max / static_cast<std::size_t>(p)) {
      const std::size_t pk_next = pk * static_cast<std::size_t>(p);
      if (tau[pk_next] != tau[static_cast<std::size_t>(p)] * tau[pk] - p11 * tau[pk_prev]) {
        fail("Hecke at p^k = " + std::to_string(pk_next));
      }
      ++checked;
      pk_prev = pk;
      pk = pk_next;
    }
  }
  // Split off the smallest prime power of each n <= min(n_max, 10^4).
  const std::size_t limit = std::min<std::size_t>(n_max, 10000);
  for (std::size_t n = 2; n <= limit; ++n) {
    std::size_t p = 2;
    while (n % p != 0) ++p;
    std::size_t pk = 1;
    while (n % (pk * p) == 0) pk *= p;
    if (pk == n) continue;
    if (tau[n] != tau[pk] * tau[n / pk]) fail("multiplicativity at n = " + std::to_string(n));
    ++checked;
  }
  return checked;
}

std::shared_ptr<const ArithmeticTables> ArithmeticTables::from_tau(std::vector<BigInt> tau,
                                                                   std::size_t d3_max) {
  if (tau.size() < 2) throw InvalidArgument("ArithmeticTables: tau table is empty");
  if (d3_max == 0) throw InvalidArgument("ArithmeticTables: d3_max must be positive");
  std::shared_ptr<ArithmeticTables> t(new ArithmeticTables());
  t->tau_ = std::move(tau);
  t->tau_[0] = 0;
  t->d3_ = sieve_d3(d3_max);
  t->tau0_.resize(t->tau_.size());
  for (std::size_t n = 0; n < t->tau_.size(); ++n) t->tau0_[n] = normalized_tau(t->tau_[n], n);
  return t;
}

std::shared_ptr<const ArithmeticTables> ArithmeticTables::build(std::size_t tau_max,
                                                                std::size_t d3_max) {
  return from_tau(compute_tau(tau_max), d3_max);
}

const BigInt& ArithmeticTables::tau(std::size_t n) const {
  if (n >= tau_.size()) {
    throw OutOfRange("tau index " + std::to_string(n) + " exceeds table limit " +
                     std::to_string(tau_max()));
  }
  return tau_[n];
}

std::uint32_t ArithmeticTables::d3(std::size_t n) const {
  if (n >= d3_.size()) {
    throw OutOfRange("d3 index " + std::to_string(n) + " exceeds table limit " +
                     std::to_string(d3_max()));
  }
  return d3_[n];
}

double ArithmeticTables::tau0(std::size_t n) const {
  if (n >= tau0_.size()) {
    throw OutOfRange("tau0 index " + std::to_string(n) + " exceeds table limit " +
                     std::to_string(tau_max()));
  }
  return tau0_[n];
}

double tau0(std::size_t n, const ArithmeticTables& tables) { return tables.tau0(n); }

std::shared_ptr<const std::vector<std::uint32_t>> shared_d3(std::size_t n) {
  static std::mutex mutex;
  static std::shared_ptr<const std::vector<std::uint32_t>> table;
  std::lock_guard<std::mutex> lock(mutex);
  if (!table || table->size() <= n) {
    std::size_t size = std::max<std::size_t>(n, 1 << 16);
    if (table) size = std::max(size, 2 * (table->size() - 1));
    table = std::make_shared<const std::vector<std::uint32_t>>(sieve_d3(size));
  }
  return table;
}

}  // namespace shiftconv
