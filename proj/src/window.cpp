#include "shiftconv/window.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "shiftconv/errors.hpp"

namespace shiftconv {

namespace {

// Truncated Taylor polynomial c0 + c1 h + c2 h^2 + c3 h^3.
struct Jet {
  std::array<double, 4> c{};

  static Jet variable(double x) { return Jet{{x, 1.0, 0.0, 0.0}}; }
  static Jet constant(double x) { return Jet{{x, 0.0, 0.0, 0.0}}; }

  Jet operator+(const Jet& o) const {
    Jet r;
    for (int k = 0; k < 4; ++k) r.c[k] = c[k] + o.c[k];
    return r;
  }
  Jet operator-(const Jet& o) const {
    Jet r;
    for (int k = 0; k < 4; ++k) r.c[k] = c[k] - o.c[k];
    return r;
  }
  Jet operator*(const Jet& o) const {
    Jet r;
    for (int k = 0; k < 4; ++k) {
      for (int j = 0; j <= k; ++j) r.c[k] += c[j] * o.c[k - j];
    }
    return r;
  }
  Jet reciprocal() const {
    Jet r;
    r.c[0] = 1.0 / c[0];
    for (int k = 1; k < 4; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += c[j] * r.c[k - j];
      r.c[k] = -s * r.c[0];
    }
    return r;
  }
  Jet exp() const {
    Jet r;
    r.c[0] = std::exp(c[0]);
    for (int k = 1; k < 4; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += j * c[j] * r.c[k - j];
      r.c[k] = s / k;
    }
    return r;
  }
  double derivative(int j) const {
    static constexpr std::array<double, 4> fact{1.0, 1.0, 2.0, 6.0};
    return c[static_cast<std::size_t>(j)] * fact[static_cast<std::size_t>(j)];
  }
};

}  // namespace

double glue(double t, int j) {
  if (j < 0 || j > 3) throw InvalidArgument("glue: derivative order must be in [0, 3]");
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return j == 0 ? 1.0 : 0.0;
  const Jet x = Jet::variable(t);
  const Jet one = Jet::constant(1.0);
  // S = 1 / (1 + exp(u)), u = 1/t - 1/(1-t)
  const Jet u = x.reciprocal() - (one - x).reciprocal();
  if (u.c[0] > 0.0) {
    const Jet e = (Jet::constant(0.0) - u).exp();
    return (e * (one + e).reciprocal()).derivative(j);
  }
  return (one + u.exp()).reciprocal().derivative(j);
}

SmoothWindow::SmoothWindow(WindowShape shape, double lo, double flo, double fhi, double hi)
    : shape_(shape), support_lo_(lo), flat_lo_(flo), flat_hi_(fhi), support_hi_(hi) {
  sharpness_ = 1.0 / std::min(flo - lo, hi - fhi);
}

SmoothWindow SmoothWindow::w_shape(double H) {
  if (!(H > 1.0)) throw InvalidArgument("W window: sharpness H must exceed 1");
  return SmoothWindow(WindowShape::W, 1.0 - 1.0 / H, 1.0, 2.0, 2.0 + 1.0 / H);
}

SmoothWindow SmoothWindow::v_shape() { return SmoothWindow(WindowShape::V, 0.5, 0.75, 2.5, 3.0); }

SmoothWindow SmoothWindow::generic(double lo, double flo, double fhi, double hi) {
  if (!(lo > 0.0 && lo < flo && flo <= fhi && fhi < hi)) {
    throw InvalidArgument("generic window: need 0 < support_lo < flat_lo <= flat_hi < support_hi");
  }
  return SmoothWindow(WindowShape::generic, lo, flo, fhi, hi);
}

SmoothWindow SmoothWindow::zero() {
  SmoothWindow w(WindowShape::generic, 1.0, 1.5, 1.5, 2.0);
  w.zero_ = true;
  return w;
}

double SmoothWindow::derivative(double x, int j) const {
  if (j < 0 || j > 3) throw InvalidArgument("window: derivative order must be in [0, 3]");
  if (zero_ || x <= support_lo_ || x >= support_hi_) return 0.0;
  if (x >= flat_lo_ && x <= flat_hi_) return j == 0 ? 1.0 : 0.0;
  if (x < flat_lo_) {
    const double w = flat_lo_ - support_lo_;
    return glue((x - support_lo_) / w, j) / std::pow(w, j);
  }
  const double w = support_hi_ - flat_hi_;
  return glue((support_hi_ - x) / w, j) / std::pow(-w, j);
}

double window_eval(const SmoothWindow& w, double x, int j) { return w.derivative(x, j); }

cplx ModulatedWindow::operator()(double x) const {
  const double w = window(x / scale);
  if (w == 0.0) return 0.0;
  return amplitude * w * e_real(frequency * x);
}

std::array<double, 4> ModulatedWindow::breakpoints() const {
  return {scale * window.support_lo(), scale * window.flat_lo(), scale * window.flat_hi(),
          scale * window.support_hi()};
}

}  // namespace shiftconv
