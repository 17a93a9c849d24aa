#include "shiftconv/numeric.hpp"

#include <string>

#include "shiftconv/errors.hpp"

namespace shiftconv {

i64 gcd(i64 a, i64 b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b != 0) {
    const i64 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

i64 mod_inverse(i64 a, i64 q) {
  if (q <= 0) throw InvalidArgument("mod_inverse: modulus must be positive");
  if (q == 1) return 0;
  i64 r0 = q, r1 = mod(a, q);
  i64 s0 = 0, s1 = 1;
  while (r1 != 0) {
    const i64 k = r0 / r1;
    i64 t = r0 - k * r1;
    r0 = r1;
    r1 = t;
    t = s0 - k * s1;
    s0 = s1;
    s1 = t;
  }
  if (r0 != 1) {
    throw InvalidArgument("mod_inverse: " + std::to_string(a) + " is not a unit mod " +
                          std::to_string(q));
  }
  return mod(s0, q);
}

UnitRoots::UnitRoots(i64 q) : q_(q), roots_(static_cast<std::size_t>(q)) {
  if (q <= 0) throw InvalidArgument("UnitRoots: modulus must be positive");
  for (i64 k = 0; k < q; ++k) {
    const double t = kTwoPi * static_cast<double>(k) / static_cast<double>(q);
    roots_[static_cast<std::size_t>(k)] = {std::cos(t), std::sin(t)};
  }
}

std::vector<i64> units_mod(i64 q) {
  std::vector<i64> out;
  if (q == 1) {
    out.push_back(0);
    return out;
  }
  for (i64 x = 1; x < q; ++x) {
    if (gcd(x, q) == 1) out.push_back(x);
  }
  return out;
}

i64 euler_phi(i64 n) {
  if (n <= 0) throw InvalidArgument("euler_phi: n must be positive");
  i64 result = n;
  for (i64 p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

bool is_prime(i64 n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (i64 d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

std::vector<i64> primes_in(i64 lo, i64 hi) {
  std::vector<i64> out;
  if (hi < 2 || hi < lo) return out;
  if (lo < 2) lo = 2;
  std::vector<bool> composite(static_cast<std::size_t>(hi + 1), false);
  for (i64 p = 2; p * p <= hi; ++p) {
    if (composite[static_cast<std::size_t>(p)]) continue;
    for (i64 k = p * p; k <= hi; k += p) composite[static_cast<std::size_t>(k)] = true;
  }
  for (i64 n = lo; n <= hi; ++n) {
    if (!composite[static_cast<std::size_t>(n)]) out.push_back(n);
  }
  return out;
}

std::vector<i64> prime_factors(i64 n) {
  std::vector<i64> out;
  if (n < 0) n = -n;
  for (i64 p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

}  // namespace shiftconv
