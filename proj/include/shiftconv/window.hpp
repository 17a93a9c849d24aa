#pragma once

#include <array>

#include "shiftconv/numeric.hpp"

namespace shiftconv {

enum class WindowShape { W, V, generic };

// Compactly supported C-infinity bump: 0 outside [support_lo, support_hi],
// 1 on [flat_lo, flat_hi], glued by S(t) = psi(t) / (psi(t) + psi(1 - t)) with
// psi(t) = exp(-1/t).
class SmoothWindow {
 public:
  static SmoothWindow w_shape(double H);
  static SmoothWindow v_shape();
  static SmoothWindow generic(double support_lo, double flat_lo, double flat_hi, double support_hi);
  // Identically zero.
  static SmoothWindow zero();

  WindowShape shape() const { return shape_; }
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }
  double flat_lo() const { return flat_lo_; }
  double flat_hi() const { return flat_hi_; }
  // 1 / (narrowest transition width); equals H for the W shape.
  double sharpness() const { return sharpness_; }
  bool is_zero() const { return zero_; }

  double operator()(double x) const { return derivative(x, 0); }
  // j-th derivative, 0 <= j <= 3.
  double derivative(double x, int j) const;

 private:
  SmoothWindow(WindowShape shape, double lo, double flo, double fhi, double hi);
  WindowShape shape_;
  double support_lo_, flat_lo_, flat_hi_, support_hi_;
  double sharpness_;
  bool zero_ = false;
};

double window_eval(const SmoothWindow& w, double x, int j);

// j-th derivative of the glue S on (0, 1), 0 <= j <= 3.
double glue(double t, int j);

// x -> amplitude * w(x / scale) * e(frequency * x).
struct ModulatedWindow {
  SmoothWindow window = SmoothWindow::v_shape();
  double scale = 1.0;
  double frequency = 0.0;
  cplx amplitude = 1.0;

  cplx operator()(double x) const;
  double lo() const { return scale * window.support_lo(); }
  double hi() const { return scale * window.support_hi(); }
  // Window breakpoints in x: lo, flat_lo, flat_hi, hi.
  std::array<double, 4> breakpoints() const;
  bool is_zero() const { return window.is_zero() || amplitude == cplx{}; }
};

}  // namespace shiftconv
