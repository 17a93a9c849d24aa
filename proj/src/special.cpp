#include "shiftconv/special.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "shiftconv/errors.hpp"

namespace shiftconv {

namespace {

double bessel_series(int n, double x) {
  const double h = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= h / k;
  double sum = term;
  const double h2 = h * h;
  for (int k = 1; k < 60; ++k) {
    term *= -h2 / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Miller's backward recurrence normalized by J0 + 2 sum J_{2k} = 1.
double bessel_miller(int n, double x) {
  int start = static_cast<int>(x + 12.0 * std::cbrt(x) + 40.0);
  start = std::max(start, n + 30);
  if (start % 2 != 0) ++start;
  double jp1 = 0.0, j = 1e-300, result = 0.0, norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const double jm1 = (2.0 * k / x) * j - jp1;
    jp1 = j;
    j = jm1;
    // j now holds J_{k-1}
    if (k - 1 == n) result = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      result *= 1e-250;
      norm *= 1e-250;
    }
  }
  norm += j;
  return result / norm;
}

double bessel_hankel(int n, double x) {
  const double mu = 4.0 * n * n;
  double p = 1.0, q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (8.0 * k * x);
    if (k > 2 * n && std::abs(next) > std::abs(last)) break;
    term = next;
    last = term;
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = x - (0.5 * n + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j(int order, double x) {
  if (order < 10 || order > 12) throw InvalidArgument("bessel_j: order must be 10, 11 or 12");
  if (!(x >= 0.0)) throw InvalidArgument("bessel_j: argument must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < 2.0) return bessel_series(order, x);
  if (x < 30.0) return bessel_miller(order, x);
  return bessel_hankel(order, x);
}

double bessel_j11(double x) { return bessel_j(11, x); }

cplx log_gamma(cplx z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
    throw InvalidArgument("log_gamma: pole at nonpositive integer");
  }
  cplx shift{};
  while (z.real() < 0.5 || std::abs(z) < 15.0) {
    shift += std::log(z);
    z += 1.0;
  }
  // Stirling series with B_{2k} / (2k (2k-1)).
  static constexpr std::array<double, 12> c{
      1.0 / 12.0,          -1.0 / 360.0,        1.0 / 1260.0,           -1.0 / 1680.0,
      1.0 / 1188.0,        -691.0 / 360360.0,   1.0 / 156.0,            -3617.0 / 122400.0,
      43867.0 / 244188.0,  -174611.0 / 125400.0, 77683.0 / 5796.0,      -236364091.0 / 1506960.0};
  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  cplx series{};
  cplx p = inv;
  for (double ck : c) {
    series += ck * p;
    p *= inv2;
  }
  const double half_log_two_pi = 0.91893853320467274178;
  return (z - 0.5) * std::log(z) - z + half_log_two_pi + series - shift;
}

const GaussLegendreRule& gauss_legendre(int order) {
  if (order < 1 || order > 128) throw InvalidArgument("gauss_legendre: order out of range");
  static std::array<std::unique_ptr<GaussLegendreRule>, 129> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[static_cast<std::size_t>(order)];
  if (slot) return *slot;
  auto rule = std::make_unique<GaussLegendreRule>();
  rule->nodes.resize(static_cast<std::size_t>(order));
  rule->weights.resize(static_cast<std::size_t>(order));
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule->nodes[static_cast<std::size_t>(i)] = -x;
    rule->nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule->weights[static_cast<std::size_t>(i)] = w;
    rule->weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  slot = std::move(rule);
  return *slot;
}

}  // namespace shiftconv
