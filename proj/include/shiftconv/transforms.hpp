#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shiftconv/numeric.hpp"
#include "shiftconv/window.hpp"

namespace shiftconv {

struct ContourSpec {
  double sigma = 0.125;
  double height = 0.0;  // 0 selects the adaptive height
  double step = 0.01;
  // Panel width and relative threshold of the adaptive height rule.
  double panel = 5.0;
  double decay_tol = 1e-12;
};

// f~(s) = integral of f(x) x^s dx (note x^s, not x^{s-1}).
cplx mellin_tilde(const ModulatedWindow& f, cplx s, double rel_tol = 1e-12);

// Integral of f(x) (log x)^k dx.
cplx log_moment(const ModulatedWindow& f, int k);

struct GQuadratureOptions {
  int order = 16;
  double panels_per_oscillation = 1.0;
  std::size_t transition_panels = 8;
  double refine = 1.0;  // multiplies every panel count
};

// G(y) = integral of g(x) J_11(4 pi sqrt(x y)) dx.
cplx transform_G(const ModulatedWindow& g, double y, const GQuadratureOptions& opt = {});

// transform_G interpolated in u = sqrt(y) on Chebyshev-Lobatto panels. Each
// panel spans one period of J_11(4 pi u v) at v = sqrt(g.hi()), so the
// interpolant agrees with transform_G to rounding.
class GTable {
 public:
  explicit GTable(ModulatedWindow g, GQuadratureOptions opt = {}, int nodes = 24);

  const ModulatedWindow& window() const { return g_; }
  const GQuadratureOptions& quadrature() const { return opt_; }
  // Largest y covered so far.
  double covered() const;
  // transform_G evaluations ensure(y_max) would need.
  std::size_t cost_to(double y_max) const;
  // Not safe to call concurrently with anything else.
  void ensure(double y_max);
  // Requires 0 <= y <= covered().
  cplx operator()(double y) const;

 private:
  ModulatedWindow g_;
  GQuadratureOptions opt_;
  double width_;
  std::vector<double> nodes_, bary_;
  std::vector<std::vector<cplx>> panels_;
};

// Mellin-Barnes transform
//   F_+-(y) = (1/2 pi i) int_{(sigma)} (pi^3 y)^{-s} R_+-(s) f~(-s) ds
// with R_-(s) = Gamma^3(s/2)/Gamma^3((1-s)/2), R_+(s) = Gamma^3((1+s)/2)/Gamma^3((2-s)/2),
// evaluated on a fine log-grid by two FFTs and interpolated.
class MellinBarnesTransform {
 public:
  MellinBarnesTransform(const ModulatedWindow& f, Sign sign, const ContourSpec& contour,
                        double y_min, double y_max);

  Sign sign() const { return sign_; }
  const ContourSpec& contour() const { return contour_; }
  double height() const { return height_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }

  // Interpolated value; y must lie in [y_min, y_max].
  cplx operator()(double y) const;
  // Trapezoid sum of the vertical-line integral at y (no interpolation).
  cplx direct(double y) const;

 private:
  Sign sign_;
  ContourSpec contour_;
  double y_min_, y_max_;
  double height_ = 0.0;
  // integrand samples at t_k = k step, |k| <= k_max
  std::vector<cplx> phi_;
  std::ptrdiff_t k_max_ = 0;
  // (pi^3 y)^sigma F(y) on u_j = u_lo + j du, u = log(pi^3 y)
  double u_lo_ = 0.0, du_ = 0.0;
  std::vector<cplx> scaled_;
};

// Single value of F_+-(y) by direct trapezoid quadrature on the contour.
cplx transform_F(const ModulatedWindow& f, double y, Sign sign, const ContourSpec& contour = {});

// I(n) = int h(x) F_+(x/(q1 q2)^3) conj(F_+(x/(q1t q2)^3)) e(-n x/(q1 q1t q2)) dx,
// with F_+ the transform of f.
cplx integral_I(i64 n, i64 q1, i64 q1t, i64 q2, const ModulatedWindow& h,
                const MellinBarnesTransform& f_plus);

}  // namespace shiftconv
