#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "shiftconv/numeric.hpp"

namespace shiftconv {

using BigInt = boost::multiprecision::cpp_int;

// d3[n] for 0 <= n <= n_max (d3[0] = 0).
std::vector<std::uint32_t> sieve_d3(std::size_t n_max);

// Number of divisors d(n), 0 <= n <= n_max.
std::vector<std::uint32_t> sieve_divisors(std::size_t n_max);

// tau[n] for 0 <= n <= n_max (tau[0] = 0), from the expansion of q*prod(1-q^k)^24.
std::vector<BigInt> compute_tau(std::size_t n_max);

// Same expansion, reporting whether the 128-bit fast path was sufficient.
struct TauExpansion {
  std::vector<BigInt> tau;
  bool used_fast_path = false;
};
TauExpansion compute_tau_detailed(std::size_t n_max, bool allow_fast_path = true);

// tau(n) / n^{11/2}, correctly rounded up to a final rounding; 0 for n = 0.
double normalized_tau(const BigInt& tau, std::uint64_t n);

// Checks Hecke relations at primes <= 97 and multiplicativity on coprime
// pairs drawn from [1, n_max]; returns the number of checked relations and
// throws std::logic_error on the first violation.
std::size_t check_tau_relations(std::span<const BigInt> tau);

// Immutable tables; tau and d3 have independent coverage.
class ArithmeticTables {
 public:
  static std::shared_ptr<const ArithmeticTables> build(std::size_t tau_max, std::size_t d3_max);
  static std::shared_ptr<const ArithmeticTables> from_tau(std::vector<BigInt> tau,
                                                          std::size_t d3_max);

  std::size_t n_max() const { return std::min(tau_max(), d3_max()); }
  std::size_t tau_max() const { return tau_.size() - 1; }
  std::size_t d3_max() const { return d3_.size() - 1; }

  const BigInt& tau(std::size_t n) const;
  std::uint32_t d3(std::size_t n) const;
  double tau0(std::size_t n) const;

  std::span<const BigInt> tau_values() const { return tau_; }
  std::span<const std::uint32_t> d3_values() const { return d3_; }
  std::span<const double> tau0_values() const { return tau0_; }

 private:
  ArithmeticTables() = default;
  std::vector<BigInt> tau_;
  std::vector<std::uint32_t> d3_;
  std::vector<double> tau0_;
};

double tau0(std::size_t n, const ArithmeticTables& tables);

// Process-wide d3 sieve covering at least [0, n]; grows geometrically and is
// never mutated once published.
std::shared_ptr<const std::vector<std::uint32_t>> shared_d3(std::size_t n);

}  // namespace shiftconv
