#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shiftconv/errors.hpp"
#include "shiftconv/voronoi.hpp"

using namespace shiftconv;

namespace {

std::shared_ptr<const ArithmeticTables> tables() {
  static const auto t = ArithmeticTables::build(200000, 10000);
  return t;
}

ModulatedWindow v_window(double Y) { return {SmoothWindow::v_shape(), Y, 0.0, 1.0}; }
ModulatedWindow w_window(double X, double H) { return {SmoothWindow::w_shape(H), X, 0.0, 1.0}; }

// Held-out family: scales not used by default_fit_family.
std::array<ModulatedWindow, 3> alt_family() { return {v_window(150), v_window(700), v_window(3000)}; }

}  // namespace

TEST_CASE("gl2 identity examples") {
  const auto r1 = verify_gl2(tables(), 1, 1, v_window(200));
  CHECK(r1.rel_diff <= 1e-6);
  const auto r5 = verify_gl2(tables(), 5, 2, v_window(500));
  CHECK(r5.rel_diff <= 1e-6);
  CHECK(r5.tail_estimate <= 1e-6);
  CHECK(r5.rel_diff == doctest::Approx(r5.abs_diff / std::max(std::abs(r5.lhs), std::abs(r5.rhs))));
  CHECK_THROWS_AS(verify_gl2(tables(), 6, 3, v_window(100)), InvalidArgument);
  CHECK(gl2_initial_truncation(5, 500) == static_cast<i64>(std::ceil(10.0 * 25 * std::log(2500.0) / 500)));
}

TEST_CASE("gl2 conjugation and truncation doubling") {
  for (i64 q : {7, 12}) {
    Gl2Verifier v(tables(), q, v_window(1000));
    for (i64 a : units_mod(q)) {
      const auto r = v.report(a);
      const auto c = v.report(q - a);
      CHECK(r.rel_diff <= 1e-6);
      CHECK(std::abs(r.lhs - std::conj(c.lhs)) <= 1e-12 * std::abs(r.lhs));
      CHECK(std::abs(r.rhs - std::conj(c.rhs)) <= 1e-9 * std::abs(r.rhs));
      const cplx doubled = v.dual(a, 2 * r.truncation);
      const double change = std::abs(doubled - r.rhs) / std::max(std::abs(r.lhs), std::abs(r.rhs));
      CHECK(change <= r.tail_estimate);
    }
  }
}

TEST_CASE("gl2 with a modulated window") {
  const ModulatedWindow g{SmoothWindow::v_shape(), 300.0, -0.0015, 1.0};
  for (i64 a : {1, 4}) CHECK(verify_gl2(tables(), 9, a, g).rel_diff <= 1e-6);
}

TEST_CASE("gl2 accuracy error when the tail cannot settle") {
  Gl2Options o;
  o.max_truncation = 10;
  CHECK_THROWS_AS(verify_gl2(tables(), 7, 1, v_window(100), o), AccuracyError);
}

TEST_CASE("gl2 with a shared G table") {
  Gl2Options o;
  o.g_table = std::make_shared<GTable>(v_window(100));
  for (i64 q : {9, 16}) {
    Gl2Verifier shared(tables(), q, v_window(100), o);
    for (i64 a : {i64{1}, q - 1}) {
      const auto r = shared.report(a);
      CHECK(r.rel_diff <= 1e-6);
      CHECK(std::abs(r.rhs - verify_gl2(tables(), q, a, v_window(100)).rhs) <= 1e-9 * std::abs(r.rhs));
    }
  }
  CHECK(o.g_table->covered() > 0.0);
  CHECK_THROWS_AS(Gl2Verifier(tables(), 5, v_window(200), o), InvalidArgument);
}

TEST_CASE("main term at q = 1 matches the Laurent expansion of zeta^3") {
  constexpr double gamma = std::numbers::egamma;
  constexpr double gamma1 = -0.0728158454836767;
  const auto P = fit_main_term(1, default_fit_family(), 1);
  MESSAGE("q=1 fit: " << P.A0 << ", " << P.A1 << ", " << P.A2 << "; condition " << P.condition);
  CHECK(P.A0 == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(P.A1 == doctest::Approx(3 * gamma).epsilon(1e-6));
  CHECK(P.A2 == doctest::Approx(3 * gamma * gamma - 3 * gamma1).epsilon(1e-6));
  CHECK(P(0.0) == P.A2);
}

TEST_CASE("main term fit: residual, scaling and family independence") {
  const auto P3 = fit_main_term(3, default_fit_family(), 1);
  CHECK(P3.fit_residual <= 1e-4);

  auto scaled = default_fit_family();
  for (auto& f : scaled) f.amplitude = 7.5;
  const auto S3 = fit_main_term(3, scaled, 1);
  CHECK(S3.A0 == doctest::Approx(P3.A0).epsilon(1e-7));
  CHECK(S3.A1 == doctest::Approx(P3.A1).epsilon(1e-7));
  CHECK(S3.A2 == doctest::Approx(P3.A2).epsilon(1e-7));

  for (i64 q : {2, 3, 4, 5}) {
    const auto a = fit_main_term(q, default_fit_family(), 1);
    const auto b = fit_main_term(q, alt_family(), 1);
    const double s = std::max({std::abs(a.A0), std::abs(a.A1), std::abs(a.A2)});
    CHECK(std::abs(a.A0 - b.A0) <= 1e-3 * s);
    CHECK(std::abs(a.A1 - b.A1) <= 1e-3 * s);
    CHECK(std::abs(a.A2 - b.A2) <= 1e-3 * s);
    MESSAGE("q=" << q << " A = (" << a.A0 << ", " << a.A1 << ", " << a.A2 << "), |A|max q^-0 = " << a.coefficient_max);
  }

  CHECK_THROWS_AS(fit_main_term(3, {v_window(100), v_window(200), v_window(1600)}, 1), InvalidArgument);
  CHECK_THROWS_AS(fit_main_term(4, default_fit_family(), 2), InvalidArgument);
}

TEST_CASE("gl3 identity: q = 1 collapse and held-out windows") {
  const auto P1 = fit_main_term(1, default_fit_family(), 1);
  const auto r1 = verify_gl3(1, 1, w_window(100, 5), P1);
  CHECK(r1.rel_diff <= 1e-4);
  CHECK(std::abs(r1.dual_plus) == 0.0);

  const auto P3 = fit_main_term(3, default_fit_family(), 1);
  const auto reps = verify_gl3_all(3, w_window(300, 5), P3);
  REQUIRE(reps.size() == 2);
  for (const auto& r : reps) CHECK(r.rel_diff <= 1e-4);
  CHECK(std::abs(reps[0].lhs - std::conj(reps[1].lhs)) <= 1e-12 * std::abs(reps[0].lhs));
  CHECK(std::abs(reps[0].rhs - std::conj(reps[1].rhs)) <= 1e-6 * std::abs(reps[0].rhs));
  const auto single = verify_gl3(3, 2, w_window(300, 5), P3);
  CHECK(std::abs(single.rhs - reps[1].rhs) <= 1e-12 * std::abs(single.rhs));
  CHECK_THROWS_AS(verify_gl3(3, 3, w_window(300, 5), P3), InvalidArgument);
}

TEST_CASE("gl3 conventions: pairing at q = 2, phase at q = 3") {
  for (i64 q : {2, 3}) {
    const auto P = fit_main_term(q, default_fit_family(), 1);
    const auto r = verify_gl3(q, 1, w_window(200, 5), P);
    double best = 1e300, literal = 0.0;
    std::string best_name;
    for (const auto& c : r.conventions) {
      MESSAGE("q=" << q << " convention " << c.convention << ": rel_diff " << c.rel_diff);
      if (c.rel_diff < best) {
        best = c.rel_diff;
        best_name = c.convention;
      }
      if (c.convention == Gl3Convention::literal().name()) literal = c.rel_diff;
    }
    CHECK(best <= 1e-4);
    CHECK(r.rel_diff == doctest::Approx(best).epsilon(1e-9));
    if (q == 3) CHECK(literal > 100 * best);
  }
}
