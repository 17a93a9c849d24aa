#include "shiftconv/circle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "shiftconv/errors.hpp"
#include "shiftconv/parallel.hpp"
#include "shiftconv/special.hpp"
#include "shiftconv/window.hpp"

namespace shiftconv {

namespace {

using boost::multiprecision::cpp_int;
using i128 = __int128;

cpp_int to_cpp_int(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  cpp_int out = static_cast<std::uint64_t>(u >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(u);
  return neg ? cpp_int(-out) : out;
}

i64 to_i64(const cpp_int& v, const char* what) {
  if (v > cpp_int(std::numeric_limits<i64>::max())) throw ResourceError(std::string(what) + " too large");
  return static_cast<i64>(v);
}

void finish_family(ModulusFamily& fam) {
  std::sort(fam.products.begin(), fam.products.end());
  fam.L = 0;
  for (i64 q : fam.products) fam.L += euler_phi(q);
  if (fam.delta <= 0 || fam.delta > Rational(1, 2)) {
    throw InvalidArgument("modulus family: delta must lie in (0, 1/2]");
  }
}

struct Event {
  i64 num;  // position num / den in [0, 1]
  i64 den;
  int jump;
  std::size_t q_index;
};

bool before(const Event& a, const Event& b) {
  return static_cast<i128>(a.num) * b.den < static_cast<i128>(b.num) * a.den;
}

bool same_point(const Event& a, const Event& b) {
  return static_cast<i128>(a.num) * b.den == static_cast<i128>(b.num) * a.den;
}

}  // namespace

double ModulusFamily::Q() const {
  if (product_family) return Q1 * Q2;
  return products.empty() ? 0.0 : static_cast<double>(products.back());
}

double ModulusFamily::delta_value() const { return static_cast<double>(delta); }

Rational default_delta(double Q) {
  if (!(Q >= 1.0)) throw InvalidArgument("default_delta: Q must be >= 1");
  return Rational(1, static_cast<i64>(std::ceil(std::pow(Q, 1.5))));
}

ModulusFamily build_modulus_family(double Q1, double Q2, i64 r, std::optional<Rational> delta) {
  if (!(Q1 > 0.0) || !(Q2 > 0.0)) throw InvalidArgument("build_modulus_family: Q1, Q2 must be positive");
  if (r < 1) throw InvalidArgument("build_modulus_family: r must be positive");
  if (std::max(Q1, Q2) <= std::min(2.0 * Q1, 2.0 * Q2)) {
    throw InvalidArgument("build_modulus_family: dyadic ranges overlap");
  }
  ModulusFamily fam;
  fam.r = r;
  fam.Q1 = Q1;
  fam.Q2 = Q2;
  fam.product_family = true;
  auto admissible = [r](double lo, double hi) {
    std::vector<i64> out;
    for (i64 p : primes_in(static_cast<i64>(std::ceil(lo)), static_cast<i64>(std::floor(hi)))) {
      if (r % p != 0) out.push_back(p);
    }
    return out;
  };
  fam.Q1_list = admissible(Q1, 2.0 * Q1);
  fam.Q2_list = admissible(Q2, 2.0 * Q2);
  if (fam.Q1_list.empty() || fam.Q2_list.empty()) {
    throw InfeasibleRange("build_modulus_family: no admissible prime in a dyadic range");
  }
  for (i64 a : fam.Q1_list) {
    for (i64 b : fam.Q2_list) fam.products.push_back(a * b);
  }
  const double Q = Q1 * Q2;
  fam.delta = delta ? *delta : default_delta(std::max(1.0, Q));
  const double d = static_cast<double>(fam.delta);
  if (d < 0.1 / (Q * Q) || d > 10.0 / Q) {
    throw InvalidArgument("build_modulus_family: delta outside [Q^-2 / 10, 10 / Q]");
  }
  finish_family(fam);
  return fam;
}

ModulusFamily family_from_moduli(std::vector<i64> moduli, Rational delta, i64 r) {
  if (moduli.empty()) throw InvalidArgument("family_from_moduli: empty moduli list");
  std::sort(moduli.begin(), moduli.end());
  if (moduli.front() < 1 || std::adjacent_find(moduli.begin(), moduli.end()) != moduli.end()) {
    throw InvalidArgument("family_from_moduli: moduli must be distinct and positive");
  }
  ModulusFamily fam;
  fam.r = r;
  fam.products = std::move(moduli);
  fam.delta = std::move(delta);
  finish_family(fam);
  return fam;
}

i64 i_tilde_count(const ModulusFamily& fam, double x) {
  const double d = fam.delta_value();
  i64 count = 0;
  for (i64 q : fam.products) {
    const double qd = static_cast<double>(q);
    const auto lo = static_cast<i64>(std::ceil(qd * (x - d)));
    const auto hi = static_cast<i64>(std::floor(qd * (x + d)));
    for (i64 a = lo; a <= hi && a < lo + q; ++a) {
      if (gcd(mod(a, q), q) == 1) ++count;
    }
  }
  return count;
}

double i_tilde(const ModulusFamily& fam, double x) {
  return static_cast<double>(i_tilde_count(fam, x)) / (2.0 * fam.delta_value() * static_cast<double>(fam.L));
}

DiscrepancyReport l2_discrepancy(const ModulusFamily& fam) {
  if (fam.L > (i64{1} << 30)) throw ResourceError("l2_discrepancy: too many intervals");
  const i64 dn = to_i64(numerator(fam.delta), "delta numerator");
  const i64 dd = to_i64(denominator(fam.delta), "delta denominator");
  DiscrepancyReport rep;
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(2 * fam.L));
  i64 level = 0;
  const bool full = 2 * dn == dd;
  for (std::size_t k = 0; k < fam.products.size(); ++k) {
    const i64 q = fam.products[k];
    if (q > (i64{1} << 62) / dd) throw ResourceError("l2_discrepancy: breakpoint denominators overflow");
    const i64 den = q * dd;
    for (i64 a : units_mod(q)) {
      if (full) {
        ++level;
        continue;
      }
      // start in [0, 1), end in (0, 1]
      const i64 s = mod(a * dd - dn * q, den);
      i64 e = mod(a * dd + dn * q, den);
      if (e == 0) e = den;
      if (s > e) ++level;
      events.push_back({s, den, +1, k});
      events.push_back({e, den, -1, k});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (before(a, b)) return true;
    if (before(b, a)) return false;
    return a.jump > b.jump;
  });
  rep.breakpoints = events.size();
  // int c = c0 + sum jump (1 - x), int c^2 = c0^2 + sum (c_after^2 - c_before^2)(1 - x)
  const i64 c0 = level;
  std::vector<i128> first(fam.products.size(), 0), second(fam.products.size(), 0);
  i64 c = c0;
  for (const auto& ev : events) {
    const i64 after = c + ev.jump;
    first[ev.q_index] += static_cast<i128>(ev.num) * ev.jump;
    second[ev.q_index] += static_cast<i128>(ev.num) * (after * after - c * c);
    c = after;
  }
  const i64 c_end = c;
  Rational int_c = c_end, int_c2 = c_end * c_end;
  for (std::size_t k = 0; k < fam.products.size(); ++k) {
    if (first[k] == 0 && second[k] == 0) continue;
    const cpp_int den = cpp_int(fam.products[k]) * dd;
    int_c -= Rational(to_cpp_int(first[k]), den);
    int_c2 -= Rational(to_cpp_int(second[k]), den);
  }
  const Rational w = Rational(1) / (2 * fam.delta * fam.L);
  rep.mass = w * int_c;
  rep.exact = 1 - 2 * w * int_c + w * w * int_c2;
  rep.value = static_cast<double>(rep.exact);

  std::size_t distinct = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    if (ev.num == ev.den) continue;  // x = 1 is x = 0 on the circle
    if (i > 0 && same_point(events[i - 1], ev)) continue;
    ++distinct;
  }
  const bool has_zero = std::any_of(events.begin(), events.end(), [](const Event& e) { return e.num == e.den; }) &&
                        std::none_of(events.begin(), events.end(), [](const Event& e) { return e.num == 0; });
  rep.pieces = std::max<std::size_t>(1, distinct + (has_zero ? 1 : 0));
  const double Q = fam.Q();
  const double L = static_cast<double>(fam.L);
  rep.bound_scale = Q * Q / (fam.delta_value() * L * L);
  rep.ratio = rep.value / rep.bound_scale;
  return rep;
}

MonteCarloReport monte_carlo_discrepancy(const ModulusFamily& fam, std::size_t samples,
                                         std::uint64_t seed) {
  if (samples < 2) throw InvalidArgument("monte_carlo_discrepancy: need at least 2 samples");
  std::mt19937_64 rng(seed);
  const double w = 1.0 / (2.0 * fam.delta_value() * static_cast<double>(fam.L));
  CompensatedSum<double> s1, s2;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double v = 1.0 - w * static_cast<double>(i_tilde_count(fam, x));
    s1.add(v * v);
    s2.add(v * v * v * v);
  }
  const double n = static_cast<double>(samples);
  MonteCarloReport rep;
  rep.samples = samples;
  rep.seed = seed;
  rep.mean = s1.value() / n;
  const double var = std::max(0.0, (s2.value() / n - rep.mean * rep.mean) * n / (n - 1.0));
  rep.standard_error = std::sqrt(var / n);
  return rep;
}

std::vector<cplx> d_tilde_alpha_terms(const ModulusFamily& fam, double alpha,
                                      const ArithmeticTables& tables, double X, i64 r, double H) {
  if (!(X > 0.0) || r < 1) throw InvalidArgument("d_tilde_alpha: X and r must be positive");
  const double Y = static_cast<double>(r) * X;
  const auto W = SmoothWindow::w_shape(H);
  const auto V = SmoothWindow::v_shape();
  const auto n_lo = static_cast<i64>(std::max(1.0, std::ceil(X * W.support_lo())));
  const auto n_hi = static_cast<i64>(std::floor(X * W.support_hi()));
  const auto m_lo = static_cast<i64>(std::max(1.0, std::ceil(Y * V.support_lo())));
  const auto m_hi = static_cast<i64>(std::floor(Y * V.support_hi()));
  if (static_cast<std::size_t>(n_hi) > tables.d3_max() || static_cast<std::size_t>(m_hi) > tables.tau_max()) {
    throw OutOfRange("d_tilde_alpha: tables do not cover n <= " + std::to_string(n_hi) +
                     " and m <= " + std::to_string(m_hi));
  }
  const double rd = static_cast<double>(r);
  std::vector<cplx> fn(static_cast<std::size_t>(n_hi - n_lo + 1));
  for (i64 n = n_lo; n <= n_hi; ++n) {
    const double nd = static_cast<double>(n);
    fn[static_cast<std::size_t>(n - n_lo)] =
        static_cast<double>(tables.d3(static_cast<std::size_t>(n))) * W(nd / X) * e_real(alpha * rd * nd);
  }
  std::vector<cplx> gm(static_cast<std::size_t>(m_hi - m_lo + 1));
  for (i64 m = m_lo; m <= m_hi; ++m) {
    const double md = static_cast<double>(m);
    gm[static_cast<std::size_t>(m - m_lo)] =
        tables.tau0(static_cast<std::size_t>(m)) * V(md / Y) * e_real(-alpha * md);
  }
  std::vector<cplx> terms(fam.products.size());
  parallel_for(fam.products.size(), [&](std::size_t k) {
    const i64 q = fam.products[k];
    std::vector<cplx> S(static_cast<std::size_t>(q)), T(static_cast<std::size_t>(q));
    for (i64 n = n_lo; n <= n_hi; ++n) S[static_cast<std::size_t>(n % q)] += fn[static_cast<std::size_t>(n - n_lo)];
    for (i64 m = m_lo; m <= m_hi; ++m) T[static_cast<std::size_t>(m % q)] += gm[static_cast<std::size_t>(m - m_lo)];
    const UnitRoots roots(q);
    const i64 rq = mod(r, q);
    CompensatedSum<cplx> acc;
    for (i64 a : units_mod(q)) {
      const i64 ar = mul_mod(a, rq, q);
      cplx A{}, B{};
      for (i64 b = 0, ph = 0; b < q; ++b, ph = ph + ar >= q ? ph + ar - q : ph + ar) {
        A += roots.at_reduced(ph) * S[static_cast<std::size_t>(b)];
      }
      const i64 na = q - a == q ? 0 : q - a;
      for (i64 c = 0, ph = 0; c < q; ++c, ph = ph + na >= q ? ph + na - q : ph + na) {
        B += roots.at_reduced(ph) * T[static_cast<std::size_t>(c)];
      }
      acc.add(roots[-a] * A * B);
    }
    terms[k] = acc.value();
  });
  return terms;
}

cplx d_tilde_alpha(const ModulusFamily& fam, double alpha, const ArithmeticTables& tables,
                   double X, i64 r, double H) {
  const auto terms = d_tilde_alpha_terms(fam, alpha, tables, X, r, H);
  CompensatedSum<cplx> acc;
  for (const auto& t : terms) acc.add(t);
  return acc.value() / static_cast<double>(fam.L);
}

DTildeReport d_tilde(const ModulusFamily& fam, const ArithmeticTables& tables, double X, i64 r,
                     double H, int quadrature_points, double tol) {
  if (quadrature_points < 9) throw InvalidArgument("d_tilde: at least 9 quadrature points required");
  if (2 * quadrature_points > 128) throw InvalidArgument("d_tilde: at most 64 quadrature points");
  const double d = fam.delta_value();
  auto integrate = [&](int order) {
    const auto& rule = gauss_legendre(order);
    CompensatedSum<cplx> acc;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double alpha = d * rule.nodes[i];
      acc.add(rule.weights[i] * d_tilde_alpha(fam, alpha, tables, X, r, H) * e_real(-alpha));
    }
    return 0.5 * acc.value();
  };
  DTildeReport rep;
  rep.points = quadrature_points;
  rep.coarse = integrate(quadrature_points);
  rep.value = integrate(2 * quadrature_points);
  rep.change = std::abs(rep.value - rep.coarse) / std::max(std::abs(rep.value), 1e-300);
  if (rep.change > tol) {
    throw AccuracyError("d_tilde: quadrature changed by " + std::to_string(rep.change) +
                        " when the node count was doubled");
  }
  return rep;
}

CuspSup cusp_sum_sup(const ArithmeticTables& tables, double Y, i64 grid, bool zero_window) {
  if (grid < 1000) throw InvalidArgument("cusp_sum_sup: grid must be at least 1000");
  if (!(Y > 0.0)) throw InvalidArgument("cusp_sum_sup: Y must be positive");
  CuspSup out;
  out.ratio = 0.0;
  if (zero_window) return out;
  const auto V = SmoothWindow::v_shape();
  const auto m_lo = static_cast<i64>(std::max(1.0, std::ceil(Y * V.support_lo())));
  const auto m_hi = static_cast<i64>(std::floor(Y * V.support_hi()));
  if (static_cast<std::size_t>(m_hi) > tables.tau_max()) throw OutOfRange("cusp_sum_sup: tau table too short");
  std::vector<double> c(static_cast<std::size_t>(m_hi - m_lo + 1));
  for (i64 m = m_lo; m <= m_hi; ++m) {
    c[static_cast<std::size_t>(m - m_lo)] = tables.tau0(static_cast<std::size_t>(m)) * V(static_cast<double>(m) / Y);
  }
  std::vector<double> vals(static_cast<std::size_t>(grid));
  const UnitRoots roots(grid);
  parallel_for(vals.size(), [&](std::size_t k) {
    CompensatedSum<cplx> acc;
    for (i64 m = m_lo; m <= m_hi; ++m) {
      acc.add(c[static_cast<std::size_t>(m - m_lo)] * roots[-mul_mod(static_cast<i64>(k), m, grid)]);
    }
    vals[k] = std::abs(acc.value());
  });
  const auto it = std::max_element(vals.begin(), vals.end());
  out.max = *it;
  out.argmax = static_cast<double>(it - vals.begin()) / static_cast<double>(grid);
  out.ratio = out.max / std::sqrt(Y);
  return out;
}

}  // namespace shiftconv
