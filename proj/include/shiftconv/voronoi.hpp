#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "shiftconv/arith.hpp"
#include "shiftconv/expsums.hpp"
#include "shiftconv/transforms.hpp"

namespace shiftconv {

struct VoronoiReport {
  cplx lhs;
  cplx rhs;
  double abs_diff = 0.0;
  double rel_diff = 0.0;
  i64 truncation = 0;           // last dual index included
  double tail_estimate = 0.0;   // |last dual block| / max(|lhs|, |rhs|)
  double tail_abs_sum = 0.0;    // sum of |terms| in the last block, same scaling
};

// rel_diff = |lhs - rhs| / max(|lhs|, |rhs|, 1e-30).
void finalize_report(VoronoiReport& r);

struct Gl2Options {
  double tol = 1e-6;
  i64 max_truncation = 2'000'000;
  GQuadratureOptions quadrature{};
  // Shared G interpolant for the same window, e.g. across moduli. When unset
  // the verifier builds its own once a table is cheaper than direct evaluation.
  std::shared_ptr<GTable> g_table;
};

// Starting dual truncation 10 q^2 max(1, log(q Y)) / Y.
i64 gl2_initial_truncation(i64 q, double Y);

// sum tau0(m) e_q(a m) g(m) = (2 pi / q) sum tau0(m) e_q(-abar m) G(m / q^2),
// with G(m / q^2) cached per modulus so all residues a share it.
class Gl2Verifier {
 public:
  Gl2Verifier(std::shared_ptr<const ArithmeticTables> tables, i64 q, ModulatedWindow g,
              Gl2Options options = {});
  VoronoiReport report(i64 a);
  cplx lhs(i64 a) const;
  // (2 pi / q) sum_{m <= M} tau0(m) e_q(-abar m) G(m / q^2)
  cplx dual(i64 a, i64 M);

 private:
  void extend(i64 M);
  std::shared_ptr<const ArithmeticTables> tables_;
  i64 q_;
  ModulatedWindow g_;
  Gl2Options opt_;
  std::vector<cplx> weights_;  // tau0(m) G(m / q^2), index m
};

VoronoiReport verify_gl2(std::shared_ptr<const ArithmeticTables> tables, i64 q, i64 a,
                         const ModulatedWindow& g, const Gl2Options& options = {});

// Which dual coefficients pair with which transform, and the phase carried by
// the term containing F_+.
enum class Gl3Pairing { standard, swapped };
struct Gl3Convention {
  Gl3Pairing pairing = Gl3Pairing::standard;
  cplx plus_phase{0.0, 1.0};
  static Gl3Convention corrected() { return {Gl3Pairing::standard, {0.0, 1.0}}; }
  static Gl3Convention literal() { return {Gl3Pairing::standard, {1.0, 0.0}}; }
  std::string name() const;
};

struct Gl3Options {
  double tol = 1e-4;
  ContourSpec contour{};
  i64 max_truncation = 40'000'000;
  double y_max = 2e5;  // largest n / q^3 the transforms are tabulated for
  Gl3Convention convention = Gl3Convention::corrected();
};

struct MainTermPoly {
  i64 q = 1;
  double A0 = 0.0, A1 = 0.0, A2 = 0.0;  // P(t) = A0 t^2 + A1 t + A2, t = log y
  double fit_residual = 0.0;
  double condition = 0.0;
  double coefficient_max = 0.0;
  std::vector<i64> truncations;
  double operator()(double t) const { return (A0 * t + A1) * t + A2; }
};

// Dual sums sum D_{3,+-}(a, q; n) F_+-(n / q^3) for every unit a at once, in
// the four pairings. Extends in doubling blocks.
class Gl3DualSums {
 public:
  struct Components {
    cplx mm, pp, mp, pm;  // D-F-, D+F+, D-F+, D+F-
  };

  Gl3DualSums(i64 q, const ModulatedWindow& f, const Gl3Options& options);

  i64 modulus() const { return q_; }
  const std::vector<i64>& residues() const { return units_; }
  const MellinBarnesTransform& f_minus() const { return *fm_; }
  const MellinBarnesTransform& f_plus() const { return *fp_; }

  // Sum over n in [n_from, n_to], one entry per residue in residues().
  std::vector<Components> block(i64 n_from, i64 n_to) const;

  // Dual contribution (pi^{3/2} / (2 q^3)) (sum_- + phase sum_+) under a convention.
  cplx combine(const Components& c, const Gl3Convention& conv) const;

 private:
  i64 q_;
  std::vector<i64> units_;
  std::unique_ptr<MellinBarnesTransform> fm_, fp_;
  std::unique_ptr<D3CharsumTable> table_;
  double y_cap_;
};

// Starting dual truncation 10 q^3 H max(1, log(q X)) / X.
i64 gl3_initial_truncation(i64 q, double X, double H);

cplx gl3_lhs(i64 q, i64 a, const ModulatedWindow& f);
cplx gl3_main_term(const MainTermPoly& P, const ModulatedWindow& f);

// Residual of the identity under one convention.
struct ConventionResidual {
  std::string convention;
  cplx rhs;
  double rel_diff;
};

struct Gl3Report : VoronoiReport {
  cplx main_term;
  cplx dual_minus;  // pairing-dependent sums before the prefactor
  cplx dual_plus;
  std::vector<ConventionResidual> conventions;
};

// Runs the adaptive dual sums and returns reports for all residues.
std::vector<Gl3Report> verify_gl3_all(i64 q, const ModulatedWindow& f, const MainTermPoly& P,
                                      const Gl3Options& options = {});

Gl3Report verify_gl3(i64 q, i64 a, const ModulatedWindow& f, const MainTermPoly& P,
                     const Gl3Options& options = {});

// Fits P(log y, q) from three dilates (scale ratios >= 4).
MainTermPoly fit_main_term(i64 q, const std::array<ModulatedWindow, 3>& family, i64 a,
                           const Gl3Options& options = {});

// Default fitting family: V windows at scales base * {1, 4, 16}.
std::array<ModulatedWindow, 3> default_fit_family(double base = 100.0);

}  // namespace shiftconv
