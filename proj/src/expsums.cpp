#include "shiftconv/expsums.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "shiftconv/errors.hpp"

namespace shiftconv {

std::vector<DivisorTriple> divisor_triples(i64 n) {
  if (n <= 0) throw InvalidArgument("divisor_triples: n must be positive");
  std::vector<DivisorTriple> out;
  for (i64 n1 = 1; n1 <= n; ++n1) {
    if (n % n1 != 0) continue;
    const i64 rest = n / n1;
    for (i64 n2 = 1; n2 <= rest; ++n2) {
      if (rest % n2 == 0) out.push_back({n1, n2, rest / n2});
    }
  }
  return out;
}

namespace {

void require_modulus(i64 q, const char* who) {
  if (q < 1) throw InvalidArgument(std::string(who) + ": modulus must be positive");
}

std::vector<i64> inverse_table(i64 q) {
  std::vector<i64> inv(static_cast<std::size_t>(q), 0);
  for (i64 x : units_mod(q)) inv[static_cast<std::size_t>(x)] = mod_inverse(x, q);
  return inv;
}

// K(c) = sum_{b,c',d mod q} e_q(c b c' d + b r1 + c' r2 + d r3) for every c,
// via the d-collapse and grouping (b, c') by t = b c' mod q.
std::vector<cplx> triple_kernel(i64 r1, i64 r2, i64 r3, i64 q, const UnitRoots& roots) {
  std::vector<cplx> by_t(static_cast<std::size_t>(q), cplx{});
  r1 = mod(r1, q);
  r2 = mod(r2, q);
  r3 = mod(r3, q);
  for (i64 b = 0; b < q; ++b) {
    const i64 br = b * r1 % q;
    for (i64 c2 = 0; c2 < q; ++c2) {
      by_t[static_cast<std::size_t>(b * c2 % q)] += roots.at_reduced((br + c2 * r2) % q);
    }
  }
  const i64 target = mod(-r3, q);
  std::vector<cplx> k(static_cast<std::size_t>(q), cplx{});
  const double qd = static_cast<double>(q);
  for (i64 c = 0; c < q; ++c) {
    cplx acc{};
    for (i64 t = 0; t < q; ++t) {
      if (c * t % q == target) acc += by_t[static_cast<std::size_t>(t)];
    }
    k[static_cast<std::size_t>(c)] = qd * acc;
  }
  return k;
}

}  // namespace

CharSumValue kloosterman(i64 a, i64 b, i64 q) {
  require_modulus(q, "kloosterman");
  cplx acc{};
  if (q == 1) return {cplx{1.0, 0.0}, 1, Method::reduced};
  for (i64 x : units_mod(q)) {
    const i64 xb = mod_inverse(x, q);
    acc += e_q(mul_mod(a, x, q) + mul_mod(b, xb, q), q);
  }
  return {acc, q, Method::reduced};
}

std::vector<cplx> kloosterman_row(i64 q) {
  require_modulus(q, "kloosterman_row");
  std::vector<cplx> row(static_cast<std::size_t>(q), cplx{});
  if (q == 1) {
    row[0] = 1.0;
    return row;
  }
  const UnitRoots roots(q);
  const auto inv = inverse_table(q);
  const auto units = units_mod(q);
  for (i64 c = 0; c < q; ++c) {
    CompensatedSum<cplx> acc;
    for (i64 x : units) acc.add(roots.at_reduced((x + c * inv[static_cast<std::size_t>(x)]) % q));
    row[static_cast<std::size_t>(c)] = acc.value();
  }
  return row;
}

CharSumValue d3_charsum(i64 a, i64 q, i64 n, Sign sign, Method method) {
  require_modulus(q, "d3_charsum");
  if (n < 1) throw InvalidArgument("d3_charsum: n must be positive");
  if (gcd(a, q) != 1) throw InvalidArgument("d3_charsum: gcd(a, q) != 1");
  const UnitRoots roots(q);
  const double s = sign == Sign::plus ? -1.0 : 1.0;  // factor on the second exponential
  const auto triples = divisor_triples(n);
  CompensatedSum<cplx> acc;
  if (method == Method::naive) {
    for (const auto& t : triples) {
      for (i64 b = 0; b < q; ++b) {
        for (i64 c = 0; c < q; ++c) {
          for (i64 d = 0; d < q; ++d) {
            const i64 lin = b * mod(t.n1, q) + c * mod(t.n2, q) + d * mod(t.n3, q);
            const i64 quad = mul_mod(mul_mod(a, b * c, q), d, q);
            acc.add(roots[lin + quad] + s * roots[lin - quad]);
          }
        }
      }
    }
    return {acc.value(), q, Method::naive};
  }
  const i64 ar = mod(a, q), neg = mod(-a, q);
  for (const auto& t : triples) {
    const auto k = triple_kernel(t.n1, t.n2, t.n3, q, roots);
    acc.add(k[static_cast<std::size_t>(ar)] + s * k[static_cast<std::size_t>(neg)]);
  }
  return {acc.value(), q, Method::reduced};
}

CharSumValue s_star(i64 m, i64 n, i64 q, i64 r, Method method) {
  require_modulus(q, "s_star");
  if (n < 1) throw InvalidArgument("s_star: n must be positive");
  const UnitRoots roots(q);
  const auto triples = divisor_triples(n);
  const auto units = units_mod(q);
  CompensatedSum<cplx> acc;
  if (method == Method::naive) {
    for (i64 a : units) {
      const i64 ab = q == 1 ? 0 : mod_inverse(a, q);
      const cplx outer = roots[-a - mul_mod(ab, m, q)];
      CompensatedSum<cplx> inner;
      for (const auto& t : triples) {
        for (i64 b = 0; b < q; ++b) {
          for (i64 c = 0; c < q; ++c) {
            for (i64 d = 0; d < q; ++d) {
              const i64 lin = b * mod(t.n1, q) + c * mod(t.n2, q) + d * mod(t.n3, q);
              const i64 quad = mul_mod(mul_mod(mul_mod(a, b * c, q), d, q), r, q);
              inner.add(roots[lin + quad]);
            }
          }
        }
      }
      acc.add(outer * inner.value());
    }
    return {acc.value(), q, Method::naive};
  }
  std::vector<cplx> kernel(static_cast<std::size_t>(q), cplx{});
  for (const auto& t : triples) {
    const auto k = triple_kernel(t.n1, t.n2, t.n3, q, roots);
    for (std::size_t c = 0; c < k.size(); ++c) kernel[c] += k[c];
  }
  for (i64 a : units) {
    const i64 ab = q == 1 ? 0 : mod_inverse(a, q);
    acc.add(roots[-a - mul_mod(ab, m, q)] * kernel[static_cast<std::size_t>(mul_mod(a, r, q))]);
  }
  return {acc.value(), q, Method::reduced};
}

cplx s_star_prime_factor(i64 m, const DivisorTriple& t, i64 q2, i64 q1, i64 r) {
  require_modulus(q1, "s_star_prime_factor");
  if (gcd(q1, q2) != 1) throw InvalidArgument("s_star_prime_factor: moduli not coprime");
  const UnitRoots roots(q1);
  const i64 q2b = mod_inverse(q2, q1);
  const i64 twist = mul_mod(mul_mod(q2b, q2b, q1), q2b, q1);
  const auto k = triple_kernel(t.n1, t.n2, t.n3, q1, roots);
  CompensatedSum<cplx> acc;
  for (i64 a : units_mod(q1)) {
    const i64 ab = q1 == 1 ? 0 : mod_inverse(a, q1);
    const i64 phase = -mul_mod(twist, a, q1) - mul_mod(mul_mod(q2, ab, q1), m, q1);
    acc.add(roots[phase] * k[static_cast<std::size_t>(mul_mod(a, r, q1))]);
  }
  return acc.value();
}

CharSumValue s_star_factored(i64 m, i64 n, i64 q1, i64 q2, i64 r) {
  if (gcd(q1, q2) != 1) throw InvalidArgument("s_star_factored: moduli not coprime");
  CompensatedSum<cplx> acc;
  for (const auto& t : divisor_triples(n)) {
    acc.add(s_star_prime_factor(m, t, q2, q1, r) * s_star_prime_factor(m, t, q1, q2, r));
  }
  return {acc.value(), q1 * q2, Method::reduced};
}

double s_dagger_prime_bound(i64 n, i64 q1) {
  const double d3n = static_cast<double>(divisor_triples(n).size());
  return std::pow(static_cast<double>(q1), 1.5) * static_cast<double>(gcd(q1, n)) * d3n;
}

CharSumValue s_dagger_prime(i64 m, i64 n, i64 q2, i64 q1, i64 r, Method method) {
  if (!is_prime(q1)) throw InvalidArgument("s_dagger_prime: q1 must be prime");
  if (n < 1) throw InvalidArgument("s_dagger_prime: n must be positive");
  if (mod(q2 * mod(r, q1), q1) == 0) throw InvalidArgument("s_dagger_prime: q1 divides q2 r");
  const UnitRoots roots(q1);
  const i64 q2b = mod_inverse(q2, q1);
  const i64 twist = mul_mod(mul_mod(q2b, q2b, q1), q2b, q1);
  const auto units = units_mod(q1);
  auto outer = [&](i64 a) {
    const i64 ab = mod_inverse(a, q1);
    return roots[-mul_mod(twist, a, q1) - mul_mod(mul_mod(q2, ab, q1), m, q1)];
  };
  const auto triples = divisor_triples(n);
  CompensatedSum<cplx> acc;
  if (method == Method::naive) {
    for (i64 a : units) {
      CompensatedSum<cplx> inner;
      for (const auto& t : triples) {
        for (i64 b = 0; b < q1; ++b) {
          for (i64 c = 0; c < q1; ++c) {
            for (i64 d = 0; d < q1; ++d) {
              const i64 lin = b * mod(t.n1, q1) + c * mod(t.n2, q1) + d * mod(t.n3, q1);
              const i64 quad = mul_mod(mul_mod(mul_mod(a, b * c, q1), d, q1), r, q1);
              inner.add(roots[lin + quad]);
            }
          }
        }
      }
      acc.add(outer(a) * inner.value());
    }
    return {acc.value(), q1, Method::naive};
  }
  if (n % q1 != 0) {
    const auto kl = kloosterman_row(q1);
    const double d3n = static_cast<double>(triples.size());
    for (i64 a : units) {
      const i64 arb = mod_inverse(mul_mod(a, r, q1), q1);
      acc.add(outer(a) * kl[static_cast<std::size_t>(mod(-mul_mod(n, arb, q1), q1))]);
    }
    return {d3n * static_cast<double>(q1) * acc.value(), q1, Method::reduced};
  }
  for (const auto& t : triples) acc.add(s_star_prime_factor(m, t, q2, q1, r));
  return {acc.value(), q1, Method::reduced};
}

CharSumValue s_dagger(i64 m, i64 n, i64 q, i64 r, Method method) {
  require_modulus(q, "s_dagger");
  if (gcd(r, q) != 1) throw InvalidArgument("s_dagger: gcd(r, q) != 1");
  if (q == 1) return {cplx{1.0, 0.0}, 1, method};
  const UnitRoots roots(q);
  const auto units = units_mod(q);
  const auto inv = inverse_table(q);
  CompensatedSum<cplx> acc;
  if (method == Method::naive) {
    for (i64 a : units) {
      const i64 ab = inv[static_cast<std::size_t>(a)];
      const i64 k = mod(-mul_mod(n, inv[static_cast<std::size_t>(mul_mod(a, r, q))], q), q);
      CompensatedSum<cplx> kl;
      for (i64 x : units) kl.add(roots[x + mul_mod(k, inv[static_cast<std::size_t>(x)], q)]);
      acc.add(roots[-a - mul_mod(ab, m, q)] * kl.value());
    }
    return {acc.value(), q, Method::naive};
  }
  const auto kl = kloosterman_row(q);
  for (i64 a : units) {
    const i64 ab = inv[static_cast<std::size_t>(a)];
    const i64 k = mod(-mul_mod(n, inv[static_cast<std::size_t>(mul_mod(a, r, q))], q), q);
    acc.add(roots[-a - mul_mod(ab, m, q)] * kl[static_cast<std::size_t>(k)]);
  }
  return {acc.value(), q, Method::reduced};
}

namespace {

void validate_t_moduli(i64 q1, i64 q1t, i64 q2, i64 r) {
  if (!is_prime(q1) || !is_prime(q1t) || !is_prime(q2)) {
    throw InvalidArgument("t_sum: q1, q1t, q2 must be primes");
  }
  if (q2 == q1 || q2 == q1t) throw InvalidArgument("t_sum: q2 must differ from q1 and q1t");
  if (gcd(r, q1 * q1t * q2) != 1) throw InvalidArgument("t_sum: r must be coprime to the modulus");
}

// S†(m, alpha; q) for every alpha mod q.
std::vector<cplx> s_dagger_row(i64 m, i64 q, i64 r) {
  const UnitRoots roots(q);
  const auto kl = kloosterman_row(q);
  const auto units = units_mod(q);
  const auto inv = inverse_table(q);
  std::vector<cplx> row(static_cast<std::size_t>(q));
  for (i64 alpha = 0; alpha < q; ++alpha) {
    CompensatedSum<cplx> acc;
    for (i64 a : units) {
      const i64 ab = inv[static_cast<std::size_t>(a)];
      const i64 k = mod(-mul_mod(alpha, inv[static_cast<std::size_t>(mul_mod(a, r, q))], q), q);
      acc.add(roots[-a - mul_mod(ab, m, q)] * kl[static_cast<std::size_t>(k)]);
    }
    row[static_cast<std::size_t>(alpha)] = acc.value();
  }
  return row;
}

}  // namespace

std::vector<cplx> t_sum_all_n(i64 m, i64 q1, i64 q1t, i64 q2, i64 r) {
  validate_t_moduli(q1, q1t, q2, r);
  const i64 big = q1 * q1t * q2;
  const i64 qa = q1 * q2, qb = q1t * q2;
  const auto sa = s_dagger_row(m, qa, r);
  const auto sb = s_dagger_row(m, qb, r);
  std::vector<cplx> prod(static_cast<std::size_t>(big));
  for (i64 alpha = 0; alpha < big; ++alpha) {
    prod[static_cast<std::size_t>(alpha)] =
        sa[static_cast<std::size_t>(alpha % qa)] * std::conj(sb[static_cast<std::size_t>(alpha % qb)]);
  }
  const UnitRoots roots(big);
  std::vector<cplx> out(static_cast<std::size_t>(big));
  for (i64 n = 0; n < big; ++n) {
    CompensatedSum<cplx> acc;
    for (i64 alpha = 0; alpha < big; ++alpha) {
      acc.add(prod[static_cast<std::size_t>(alpha)] * roots.at_reduced(n * alpha % big));
    }
    out[static_cast<std::size_t>(n)] = acc.value();
  }
  return out;
}

CharSumValue t_sum(i64 m, i64 n, i64 q1, i64 q1t, i64 q2, i64 r) {
  validate_t_moduli(q1, q1t, q2, r);
  const i64 big = q1 * q1t * q2;
  const i64 qa = q1 * q2, qb = q1t * q2;
  const auto sa = s_dagger_row(m, qa, r);
  const auto sb = s_dagger_row(m, qb, r);
  const UnitRoots roots(big);
  const i64 nr = mod(n, big);
  CompensatedSum<cplx> acc;
  for (i64 alpha = 0; alpha < big; ++alpha) {
    acc.add(sa[static_cast<std::size_t>(alpha % qa)] *
            std::conj(sb[static_cast<std::size_t>(alpha % qb)]) *
            roots.at_reduced(nr * alpha % big));
  }
  return {acc.value(), big, Method::reduced};
}

double t_sum_scale(i64 q1, i64 q1t, i64 q2) {
  return std::pow(static_cast<double>(q1), 1.5) * std::pow(static_cast<double>(q1t), 1.5) *
         std::pow(static_cast<double>(q2), 2.5);
}

D3CharsumTable::D3CharsumTable(i64 q, i64 smooth_max) : q_(q) {
  require_modulus(q, "D3CharsumTable");
  primes_ = prime_factors(q);
  smooth_values_.push_back(1);
  for (i64 p : primes_) {
    const std::size_t count = smooth_values_.size();
    for (std::size_t i = 0; i < count; ++i) {
      i64 v = smooth_values_[i];
      while (v <= smooth_max / p) {
        v *= p;
        smooth_values_.push_back(v);
      }
    }
  }
  std::sort(smooth_values_.begin(), smooth_values_.end());
  inverse_ = inverse_table(q);
  const UnitRoots roots(q);
  const std::size_t qs = static_cast<std::size_t>(q);
  lambda_.assign(smooth_values_.size() * qs, 0.0);
  std::unordered_map<i64, std::vector<cplx>> memo;
  for (std::size_t i = 0; i < smooth_values_.size(); ++i) {
    for (const auto& t : divisor_triples(smooth_values_[i])) {
      const i64 key = (mod(t.n1, q) * q + mod(t.n2, q)) * q + mod(t.n3, q);
      auto it = memo.find(key);
      if (it == memo.end()) it = memo.emplace(key, triple_kernel(t.n1, t.n2, t.n3, q, roots)).first;
      for (std::size_t c = 0; c < qs; ++c) lambda_[i * qs + c] += it->second[c].real();
    }
  }
}

void D3CharsumTable::split(i64 n, i64& smooth, i64& coprime) const {
  smooth = 1;
  for (i64 p : primes_) {
    while (n % p == 0) {
      n /= p;
      smooth *= p;
    }
  }
  coprime = n;
}

std::size_t D3CharsumTable::smooth_index(i64 smooth) const {
  if (smooth == 1) return 0;
  const auto it = std::lower_bound(smooth_values_.begin(), smooth_values_.end(), smooth);
  if (it == smooth_values_.end() || *it != smooth) {
    throw OutOfRange("D3CharsumTable: smooth part " + std::to_string(smooth) + " not tabulated");
  }
  return static_cast<std::size_t>(it - smooth_values_.begin());
}

double D3CharsumTable::lambda(i64 smooth, i64 c) const { return lambda_at(smooth_index(smooth), mod(c, q_)); }

cplx D3CharsumTable::value(i64 a, i64 n, Sign sign, std::uint32_t d3_coprime_part) const {
  i64 smooth, coprime;
  split(n, smooth, coprime);
  const i64 c = mul_mod(a, inverse(coprime), q_);
  const double kp = lambda(smooth, c), km = lambda(smooth, -c);
  const double v = sign == Sign::plus ? kp - km : kp + km;
  return {static_cast<double>(d3_coprime_part) * v, 0.0};
}

}  // namespace shiftconv
