#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shiftconv/arith.hpp"
#include "shiftconv/circle.hpp"
#include "shiftconv/transforms.hpp"
#include "shiftconv/voronoi.hpp"

namespace shiftconv {

struct SumReport {
  cplx value;
  double x_or_X = 0.0;
  i64 r = 1;
  double H = 0.0;  // 0 for sharp sums
  std::map<std::string, i64> truncations;
  double error_estimate = 0.0;  // rounding bound on the accumulated sum
  double wall_time = 0.0;       // seconds
};

// sum_{1 <= n <= x} d3(n) tau0(r n - 1), tau0(0) = 0.
SumReport psi_direct(double x, i64 r, const ArithmeticTables& tables);

// sum_{1 <= n <= x} d3(n) coeff(r n - 1) for an arbitrary coefficient sequence.
double psi_with(double x, i64 r, const std::vector<std::uint32_t>& d3,
                const std::function<double(std::size_t)>& coeff);

// sum_{1 <= n <= x} d3(n) d(r n - 1), a majorant of |psi| since |tau0(m)| <= d(m).
double psi_majorant(double x, i64 r);

// sum_n d3(n) tau0(r n - 1) W(n / X) with the W window of sharpness H.
SumReport d_smooth(double X, i64 r, double H, const ArithmeticTables& tables);

// sum_{X <= n <= 2X} d3(n) tau0(r n - 1).
SumReport sharp_dyadic_sum(double X, i64 r, const ArithmeticTables& tables);

struct DecomposeOptions {
  // Fixed dual truncations for every modulus. Unset: start from the base
  // formulas and double until two consecutive blocks are below 0.1 tol.
  std::optional<i64> M, N;
  double tol = 1e-3;
  ContourSpec contour{};
  Gl3Convention convention = Gl3Convention::corrected();
  i64 max_M = 2'000'000;
  i64 max_N = 200'000'000;
  // Ranges for the displayed-normalization cross-checks.
  i64 display_M = 12;
  i64 display_N = 48;
  bool display_checks = true;
};

struct Decomposition {
  cplx direct;
  cplx transformed;
  cplx d0_part;       // main term of the n-sum against the dual m-sum
  cplx d1_part;       // F_+ dual terms
  cplx d_minus_part;  // F_- dual terms
  double residual = 0.0;
  i64 M_base = 0, N_base = 0;
  std::vector<i64> moduli, M_used, N_used;
  std::vector<MainTermPoly> main_terms;
  // Zero-frequency term rewritten with S(1, m; q) in place of S(-1, m; q).
  cplx zero_frequency_display;
  double zero_frequency_display_rel = 0.0;
  // Displayed F_+ forms over m <= display_M, n <= display_N, divided by the
  // composed value over the same ranges: s_star with 1/q^4, and d3(n) s_dagger
  // with 1/q^3 restricted to (n, q) = 1.
  cplx plus_display_ratio;
  cplx plus_display_coprime_ratio;
  // Same ranges, -2 pi^{5/2} q^-4 sum tau0(m) G F_+ Im s_star(-m, n; q): the
  // F_+ part of the composition rewritten with s_star, so this ratio is 1.
  cplx plus_identity_ratio;
};

i64 decompose_base_M(double Q, double Y);
i64 decompose_base_N(double Q, double X, double H);

// Voronoi-expanded rebuild of d_tilde_alpha. Fitted main-term polynomials are
// cached per modulus so several alphas can share them.
class Decomposer {
 public:
  Decomposer(std::shared_ptr<const ArithmeticTables> tables, ModulusFamily fam, double X, i64 r,
             double H, DecomposeOptions options = {});

  Decomposition run(double alpha);
  const MainTermPoly& main_term(i64 q);
  const DecomposeOptions& options() const { return opt_; }
  DecomposeOptions& options() { return opt_; }

 private:
  std::shared_ptr<const ArithmeticTables> tables_;
  ModulusFamily fam_;
  double X_, H_;
  i64 r_;
  DecomposeOptions opt_;
  std::map<i64, MainTermPoly> main_terms_;
};

Decomposition decompose_d_tilde_alpha(const ModulusFamily& fam, double alpha, double X, i64 r,
                                      double H, std::shared_ptr<const ArithmeticTables> tables,
                                      const ContourSpec& contour = {},
                                      DecomposeOptions options = {});

// V windows at scales base * {1, 4, 16} with base = 100 max(1, q^3 / 125), so
// the dual sums of the fit stay short for larger moduli.
std::array<ModulatedWindow, 3> fit_family_for(i64 q);

struct ParameterChoice {
  double X = 0.0;
  i64 r = 1;
  double exponent_delta = 0.0;
  double H = 0.0;
  double interval_halfwidth = 0.0;
  double Q = 0.0, Q1 = 0.0, Q2 = 0.0;
  bool degenerate = false;    // exponent_delta <= 0
  bool out_of_range = false;  // r >= X^{4/5}
};

ParameterChoice choose_parameters(double X, i64 r);

struct ScanPoint {
  double x = 0.0;
  double log_x = 0.0;
  double log_abs_psi = 0.0;
  double psi = 0.0;
  double majorant = 0.0;
};

struct ScanReport {
  std::vector<ScanPoint> points;
  double slope = 0.0;
  std::vector<std::string> warnings;
};

enum class ScanCoefficients { tau0, ones };

// Least-squares slope of log|psi(x)| against log x; points with psi = 0 are dropped.
ScanReport exponent_scan(const std::vector<double>& x_grid, i64 r, const ArithmeticTables& tables,
                         ScanCoefficients coefficients = ScanCoefficients::tau0,
                         bool with_majorant = false);

// x_lo * ratio^k for k = 0 .. count - 1.
std::vector<double> geometric_grid(double x_lo, double x_hi, std::size_t count);

}  // namespace shiftconv
