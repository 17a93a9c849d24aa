#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shiftconv/convolution.hpp"
#include "shiftconv/errors.hpp"

using namespace shiftconv;

namespace {

std::shared_ptr<const ArithmeticTables> tables() {
  static const auto t = ArithmeticTables::build(60000, 60000);
  return t;
}

// Least-squares slope of ys against xs.
double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("psi_direct examples") {
  const auto& t = *tables();
  CHECK(psi_direct(1, 2, t).value == cplx(1.0));
  CHECK(psi_direct(1, 1, t).value == cplx(0.0));
  const double tau0_3 = 252.0 / std::pow(3.0, 5.5);
  CHECK(psi_direct(2, 2, t).value.real() == doctest::Approx(1.0 + 3.0 * tau0_3).epsilon(1e-14));
  const auto rep = psi_direct(1000, 2, t);
  CHECK(rep.value.imag() == 0.0);
  CHECK(rep.truncations.at("n_max") == 1000);
  CHECK(rep.error_estimate > 0.0);
  CHECK_THROWS_AS(psi_direct(40000, 2, t), OutOfRange);
  CHECK_THROWS_AS(psi_direct(10, 0, t), InvalidArgument);
}

TEST_CASE("loop-order invariance") {
  const auto& t = *tables();
  for (i64 r : {1, 2, 5}) {
    const double x = 9000.0 / static_cast<double>(r);
    const double forward = psi_direct(x, r, t).value.real();
    std::vector<std::size_t> order;
    for (std::size_t n = 1; n <= static_cast<std::size_t>(x); ++n) order.push_back(n);
    std::mt19937_64 rng(static_cast<std::uint64_t>(r));
    std::shuffle(order.begin(), order.end(), rng);
    long double shuffled = 0.0L;
    for (std::size_t n : order) shuffled += static_cast<long double>(t.d3(n)) * t.tau0(r * n - 1);
    CHECK(std::abs(forward - static_cast<double>(shuffled)) <= 1e-9 * std::max(1.0, std::abs(forward)));

    const double smooth = d_smooth(x / 2.5, r, 5.0, t).value.real();
    long double backward = 0.0L;
    const auto W = SmoothWindow::w_shape(5.0);
    for (std::size_t n = static_cast<std::size_t>(x); n >= 1; --n) {
      backward += static_cast<long double>(t.d3(n)) * t.tau0(r * n - 1) * W(static_cast<double>(n) / (x / 2.5));
    }
    CHECK(std::abs(smooth - static_cast<double>(backward)) <= 1e-9 * std::max(1.0, std::abs(smooth)));
  }
}

TEST_CASE("d_smooth sharp limit and comparison with psi") {
  const auto& t = *tables();
  for (double X : {1000.0, 5000.0}) {
    const double H = 1e4;
    const auto sm = d_smooth(X, 1, H, t);
    const auto sharp = sharp_dyadic_sum(X, 1, t);
    CHECK(sm.value.imag() == 0.0);
    double bound = 0.0;
    const auto W = SmoothWindow::w_shape(H);
    for (i64 n = static_cast<i64>(X * W.support_lo()); n <= static_cast<i64>(X * W.support_hi()) + 1; ++n) {
      const double w = W(static_cast<double>(n) / X);
      if (w > 0.0 && w < 1.0) bound += t.d3(n) * std::abs(t.tau0(n - 1));
    }
    CHECK(std::abs(sm.value - sharp.value) <= bound + 1e-9);

    const double H5 = 5.0;
    const double dyadic = (psi_direct(2 * X, 1, t).value - psi_direct(X, 1, t).value).real();
    const double D = d_smooth(X, 1, H5, t).value.real();
    MESSAGE("X=" << X << ": |psi(2X) - psi(X) - D| / (X / H) = " << std::abs(dyadic - D) / (X / H5));
  }
}

TEST_CASE("r = 2 reads tau0 only at odd indices") {
  const auto base = tables();
  std::vector<BigInt> tau(base->tau_values().begin(), base->tau_values().begin() + 20001);
  for (std::size_t n = 2; n < tau.size(); n += 2) tau[n] = 0;
  const auto odd_only = ArithmeticTables::from_tau(std::move(tau), 20000);
  CHECK(d_smooth(3000, 2, 5.0, *base).value == d_smooth(3000, 2, 5.0, *odd_only).value);
  CHECK(psi_direct(9000, 2, *base).value == psi_direct(9000, 2, *odd_only).value);
  CHECK(d_smooth(3000, 1, 5.0, *base).value != d_smooth(3000, 1, 5.0, *odd_only).value);
}

TEST_CASE("choose_parameters") {
  const auto p = choose_parameters(1e10, 1);
  CHECK(p.exponent_delta == doctest::Approx(1.0 / 35.0).epsilon(1e-14));
  CHECK(p.Q2 == doctest::Approx(1e4).epsilon(1e-12));
  CHECK(p.Q1 == doctest::Approx(std::pow(10.0, 1.0 + 10.0 / 35.0)).epsilon(1e-12));
  CHECK(p.interval_halfwidth == doctest::Approx(1e-10));
  CHECK_FALSE(p.degenerate);
  const auto b = choose_parameters(1e10, 10);
  CHECK(std::abs(b.exponent_delta) <= 1e-12);
  CHECK(b.degenerate);
  CHECK(choose_parameters(1e5, 10000).out_of_range);
  CHECK_FALSE(choose_parameters(1e5, 9000).out_of_range);
  CHECK_THROWS_AS(choose_parameters(1.0, 1), InvalidArgument);

  std::mt19937_64 rng(35);
  for (int i = 0; i < 100; ++i) {
    const double X = std::pow(10.0, std::uniform_real_distribution<double>(1.0, 15.0)(rng));
    const i64 r = 1 + static_cast<i64>(rng() % 1000);
    const auto c = choose_parameters(X, r);
    CHECK(std::abs(c.Q1 * c.Q2 - c.Q) <= 1e-9 * c.Q);
    CHECK(c.H == doctest::Approx(std::pow(X, c.exponent_delta)).epsilon(1e-12));
    CHECK(c.Q == doctest::Approx(static_cast<double>(r) * std::pow(X, 0.5 + c.exponent_delta)).epsilon(1e-12));
    CHECK(c.degenerate == (c.exponent_delta <= 1e-12));
  }
}

TEST_CASE("exponent scan: divisor-sum oracle and majorant") {
  const auto& t = *tables();
  const auto grid = geometric_grid(1000, 50000, 8);
  CHECK(grid.front() == 1000.0);
  CHECK(grid.back() == 50000.0);

  // sum_{n <= x} d3(n) ~ x (L^2/2 + (3 gamma - 1) L + 3 gamma^2 - 3 gamma_1 - 3 gamma + 1), L = log x
  constexpr double g = std::numbers::egamma, g1 = -0.0728158454836767;
  std::vector<double> lx, ly;
  for (double x : grid) {
    const double L = std::log(x);
    lx.push_back(L);
    ly.push_back(std::log(x * (0.5 * L * L + (3 * g - 1) * L + 3 * g * g - 3 * g1 - 3 * g + 1)));
  }
  const auto ones = exponent_scan(grid, 1, t, ScanCoefficients::ones);
  MESSAGE("slope with unit coefficients: " << ones.slope << ", asymptotic oracle: " << slope(lx, ly));
  CHECK(ones.slope == doctest::Approx(slope(lx, ly)).epsilon(0.02));
  CHECK(ones.slope > 1.0);

  const auto scan = exponent_scan(grid, 1, t, ScanCoefficients::tau0, true);
  for (const auto& p : scan.points) CHECK(std::abs(p.psi) <= p.majorant);
  MESSAGE("slope with tau0, r = 1, x in [1e3, 5e4]: " << scan.slope);
  CHECK(scan.slope < 1.0);

  const auto warn = exponent_scan({1.0, 2.0, 3.0}, 1, t);
  CHECK(warn.warnings.size() == 1);
  CHECK(warn.points.size() == 2);
}

TEST_CASE("decomposition: doubling the truncations from the base formulas") {
  const auto fam = build_modulus_family(2.1, 5.2, 1, Rational(1, 100));
  REQUIRE(fam.products == std::vector<i64>{21});
  const double X = 100, H = 5;
  const i64 M0 = decompose_base_M(fam.Q(), X), N0 = decompose_base_N(fam.Q(), X, H);
  const double Q = 2.1 * 5.2;
  CHECK(fam.Q() == doctest::Approx(Q));
  CHECK(M0 == static_cast<i64>(std::ceil(10.0 * Q * Q * std::log(Q) / X)));
  CHECK(N0 == static_cast<i64>(std::ceil(10.0 * Q * Q * Q * H * std::log(Q) / X)));

  DecomposeOptions opt;
  opt.display_checks = true;
  Decomposer dec(tables(), fam, X, 1, H, opt);
  double prev = 1e300;
  for (int k = 0; k <= 3; ++k) {
    dec.options().M = M0 << k;
    dec.options().N = N0 << k;
    const auto d = dec.run(0.0);
    MESSAGE("M=" << (M0 << k) << " N=" << (N0 << k) << " residual=" << d.residual);
    CHECK(d.residual < prev);
    prev = d.residual;
    CHECK(std::abs(d.direct - d_tilde_alpha(fam, 0.0, *tables(), X, 1, H)) <= 1e-12 * std::abs(d.direct));
    CHECK(std::abs(d.transformed - (d.d0_part + d.d1_part + d.d_minus_part)) <= 1e-12 * std::abs(d.transformed));
    CHECK(std::abs(d.plus_identity_ratio - 1.0) <= 1e-6);
    if (k == 0) {
      MESSAGE("zero-frequency display relative difference " << d.zero_frequency_display_rel
              << ", F+ display ratios " << d.plus_display_ratio << " / " << d.plus_display_coprime_ratio);
    }
  }
}
