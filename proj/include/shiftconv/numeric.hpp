#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <type_traits>
#include <vector>

namespace shiftconv {

using i64 = std::int64_t;
using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Sign : int { minus = -1, plus = 1 };

inline int sign_value(Sign s) { return static_cast<int>(s); }

// Least nonnegative residue.
inline i64 mod(i64 x, i64 q) {
  i64 r = x % q;
  return r < 0 ? r + q : r;
}

i64 gcd(i64 a, i64 b);

// Inverse of a modulo q; throws InvalidArgument when gcd(a, q) != 1.
i64 mod_inverse(i64 a, i64 q);

// x*y mod q without overflow for |x|, |y| < q < 2^62.
inline i64 mul_mod(i64 x, i64 y, i64 q) {
  return static_cast<i64>(static_cast<__int128>(mod(x, q)) * mod(y, q) % q);
}

// e(x/q) = exp(2 pi i x / q) with x reduced first.
inline cplx e_q(i64 x, i64 q) {
  const double t = kTwoPi * static_cast<double>(mod(x, q)) / static_cast<double>(q);
  return {std::cos(t), std::sin(t)};
}

// e(x) for real x, reduced to [-1/2, 1/2] before scaling.
inline cplx e_real(double x) {
  const double t = kTwoPi * (x - std::nearbyint(x));
  return {std::cos(t), std::sin(t)};
}

// Table of q-th roots of unity, e(k/q) for 0 <= k < q.
class UnitRoots {
 public:
  explicit UnitRoots(i64 q);
  i64 modulus() const { return q_; }
  const cplx& operator[](i64 k) const { return roots_[static_cast<std::size_t>(mod(k, q_))]; }
  // Caller guarantees 0 <= k < q.
  const cplx& at_reduced(i64 k) const { return roots_[static_cast<std::size_t>(k)]; }

 private:
  i64 q_;
  std::vector<cplx> roots_;
};

// Units modulo q in increasing order.
std::vector<i64> units_mod(i64 q);

i64 euler_phi(i64 n);
bool is_prime(i64 n);
std::vector<i64> primes_in(i64 lo, i64 hi);
std::vector<i64> prime_factors(i64 n);  // distinct, increasing

// Neumaier compensated accumulator.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    if constexpr (std::is_same_v<T, cplx>) {
      re_.add(x.real());
      im_.add(x.imag());
    } else {
      const T t = sum_ + x;
      if (std::abs(sum_) >= std::abs(x)) {
        c_ += (sum_ - t) + x;
      } else {
        c_ += (x - t) + sum_;
      }
      sum_ = t;
    }
  }
  T value() const {
    if constexpr (std::is_same_v<T, cplx>) {
      return {re_.value(), im_.value()};
    } else {
      return sum_ + c_;
    }
  }

 private:
  struct Empty {};
  using Part = std::conditional_t<std::is_same_v<T, cplx>, CompensatedSum<double>, Empty>;
  T sum_{};
  T c_{};
  [[no_unique_address]] Part re_{};
  [[no_unique_address]] Part im_{};
};

}  // namespace shiftconv
