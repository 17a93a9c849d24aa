#include "shiftconv/transforms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <string>

#include "shiftconv/errors.hpp"
#include "shiftconv/parallel.hpp"
#include "shiftconv/quadrature.hpp"
#include "shiftconv/special.hpp"

namespace shiftconv {

namespace {

constexpr int kOrder = 20;
constexpr int kMaxDoublings = 14;

struct Piece {
  double a, b;
  bool transition;
};

// Breakpoint pieces of a modulated window with nonzero length.
std::vector<Piece> pieces(const ModulatedWindow& f) {
  const auto x = f.breakpoints();
  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (x[i + 1] > x[i]) out.push_back({x[i], x[i + 1], i != 1});
  }
  return out;
}

template <class Body>
cplx refine_until_stable(Body&& body, double rel_tol, double floor_scale) {
  cplx prev = body(1.0);
  double refine = 2.0;
  for (int it = 0; it < kMaxDoublings; ++it, refine *= 2.0) {
    const cplx cur = body(refine);
    const double scale = std::max(std::abs(cur), floor_scale);
    if (std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  throw AccuracyError("quadrature did not converge after repeated refinement");
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Forward DFT out_k = sum_j in_j exp(-2 pi i j k / N), in place.
void fft_forward(std::vector<cplx>& data) {
  const int n = static_cast<int>(data.size());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw ResourceError("FFT plan creation failed");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

cplx gamma_ratio(Sign sign, cplx s) {
  cplx a, b;
  if (sign == Sign::minus) {
    a = 0.5 * s;
    b = 0.5 * (1.0 - s);
  } else {
    a = 0.5 * (1.0 + s);
    b = 0.5 * (2.0 - s);
  }
  return std::exp(3.0 * (log_gamma(a) - log_gamma(b)));
}

}  // namespace

cplx mellin_tilde(const ModulatedWindow& f, cplx s, double rel_tol) {
  if (f.is_zero()) return 0.0;
  const auto ps = pieces(f);
  double floor_scale = 0.0;
  for (const auto& [a, b, tr] : ps) {
    floor_scale += std::abs(f.amplitude) * (b - a) *
                   std::max(std::pow(a, s.real()), std::pow(b, s.real()));
  }
  auto body = [&](double refine) {
    CompensatedSum<cplx> total;
    for (const auto& [a, b, tr] : ps) {
      const double va = std::log(a), vb = std::log(b);
      const double osc = (std::abs(s.imag()) * (vb - va) +
                          kTwoPi * std::abs(f.frequency) * (b - a)) / kTwoPi;
      const auto panels = static_cast<std::size_t>(refine * (4.0 + std::ceil(osc)));
      total.add(integrate_gl<cplx>(
          [&](double v) {
            const double x = std::exp(v);
            return f(x) * std::exp((s + 1.0) * v);
          },
          va, vb, panels, kOrder));
    }
    return total.value();
  };
  return refine_until_stable(body, rel_tol, floor_scale);
}

cplx log_moment(const ModulatedWindow& f, int k) {
  if (f.is_zero()) return 0.0;
  const auto ps = pieces(f);
  double floor_scale = 0.0;
  for (const auto& [a, b, tr] : ps) {
    floor_scale += std::abs(f.amplitude) * (b - a) * std::pow(std::abs(std::log(b)) + 1.0, k);
  }
  floor_scale *= 1e-2;
  auto body = [&](double refine) {
    CompensatedSum<cplx> total;
    for (const auto& [a, b, tr] : ps) {
      const double osc = std::abs(f.frequency) * (b - a);
      const auto panels = static_cast<std::size_t>(refine * (4.0 + std::ceil(osc)));
      total.add(integrate_gl<cplx>(
          [&](double x) { return f(x) * std::pow(std::log(x), k); }, a, b, panels, kOrder));
    }
    return total.value();
  };
  return refine_until_stable(body, 1e-13, floor_scale);
}

cplx transform_G(const ModulatedWindow& g, double y, const GQuadratureOptions& opt) {
  if (!(y >= 0.0)) throw InvalidArgument("transform_G: y must be nonnegative");
  if (y == 0.0 || g.is_zero()) return 0.0;
  const double omega = 4.0 * kPi * std::sqrt(y);
  const double sy = std::sqrt(y);
  const auto ps = pieces(g);
  CompensatedSum<cplx> total;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto [a, b, transition] = ps[i];
    const double va = std::sqrt(a), vb = std::sqrt(b);
    const double osc = 2.0 * sy * (vb - va) + std::abs(g.frequency) * (b - a);
    const double base = transition ? static_cast<double>(opt.transition_panels) : 2.0;
    const auto panels = static_cast<std::size_t>(
        std::ceil(opt.refine * std::max(base, std::ceil(opt.panels_per_oscillation * osc) + base)));
    total.add(integrate_gl<cplx>(
        [&](double v) {
          const double x = v * v;
          return g(x) * (2.0 * v * bessel_j11(omega * v));
        },
        va, vb, panels, opt.order));
  }
  return total.value();
}

GTable::GTable(ModulatedWindow g, GQuadratureOptions opt, int nodes)
    : g_(std::move(g)), opt_(opt) {
  if (nodes < 4) throw InvalidArgument("GTable: at least 4 nodes per panel");
  width_ = 0.5 / std::sqrt(std::max(g_.hi(), 1e-300));
  for (int j = 0; j < nodes; ++j) {
    nodes_.push_back(std::cos(kPi * j / (nodes - 1)));
    bary_.push_back((j % 2 ? -1.0 : 1.0) * (j == 0 || j == nodes - 1 ? 0.5 : 1.0));
  }
}

double GTable::covered() const {
  const double u = width_ * static_cast<double>(panels_.size());
  return u * u;
}

std::size_t GTable::cost_to(double y_max) const {
  const auto need = static_cast<std::size_t>(std::ceil(std::sqrt(std::max(y_max, 0.0)) / width_));
  return need > panels_.size() ? (need - panels_.size()) * nodes_.size() : 0;
}

void GTable::ensure(double y_max) {
  const auto need = static_cast<std::size_t>(std::ceil(std::sqrt(std::max(y_max, 0.0)) / width_));
  if (need <= panels_.size()) return;
  const std::size_t first = panels_.size(), n = nodes_.size();
  panels_.resize(need, std::vector<cplx>(n));
  parallel_for((need - first) * n, [&](std::size_t k) {
    const std::size_t p = first + k / n, j = k % n;
    const double u = width_ * (static_cast<double>(p) + 0.5 * (1.0 - nodes_[j]));
    panels_[p][j] = transform_G(g_, u * u, opt_);
  });
}

cplx GTable::operator()(double y) const {
  const double u = std::sqrt(y) / width_;
  auto p = static_cast<std::size_t>(u);
  if (p == panels_.size() && u == static_cast<double>(p) && p > 0) --p;
  if (!(y >= 0.0) || p >= panels_.size()) throw OutOfRange("GTable: y beyond the tabulated range");
  const double t = 1.0 - 2.0 * (u - static_cast<double>(p));
  const auto& v = panels_[p];
  cplx num{};
  double den = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double d = t - nodes_[j];
    if (d == 0.0) return v[j];
    const double w = bary_[j] / d;
    num += w * v[j];
    den += w;
  }
  return num / den;
}

MellinBarnesTransform::MellinBarnesTransform(const ModulatedWindow& f, Sign sign,
                                             const ContourSpec& contour, double y_min,
                                             double y_max)
    : sign_(sign), contour_(contour), y_min_(y_min), y_max_(y_max) {
  if (!(contour.step > 0.0)) throw InvalidArgument("contour step must be positive");
  if (contour.height > 0.0 && contour.step > contour.height / 100.0) {
    throw InvalidArgument("contour step must not exceed height/100");
  }
  if (!(y_min > 0.0) || !(y_max >= y_min)) throw InvalidArgument("invalid y range for F transform");
  const double sigma = contour.sigma;
  const double dt = contour.step;
  const double pi3 = kPi * kPi * kPi;
  const auto panel_steps = static_cast<std::ptrdiff_t>(std::max(1.0, std::round(contour.panel / dt)));

  std::size_t n = std::size_t{1} << 20;
  if (contour.height > 0.0) {
    while (static_cast<double>(n) * dt < 4.0 * contour.height) n <<= 1;
  }
  for (;;) {
    if (n > (std::size_t{1} << 24)) throw ResourceError("F transform: FFT size limit exceeded");
    const double dv = kTwoPi / (static_cast<double>(n) * dt);
    const auto nn = static_cast<std::ptrdiff_t>(n);
    std::vector<cplx> buf(n, cplx{});
    if (!f.is_zero()) {
      const double v0 = std::log(f.lo());
      const double v1 = std::log(f.hi());
      const auto count = static_cast<std::ptrdiff_t>(std::ceil((v1 - v0) / dv)) + 1;
      if (count >= nn) {
        n <<= 1;
        continue;
      }
      for (std::ptrdiff_t j = 0; j < count; ++j) {
        const double v = v0 + dv * static_cast<double>(j);
        buf[static_cast<std::size_t>(j)] = f(std::exp(v)) * std::exp((1.0 - sigma) * v);
      }
      fft_forward(buf);
      for (std::ptrdiff_t k = 0; k < nn; ++k) {
        const std::ptrdiff_t kk = k < nn / 2 ? k : k - nn;
        const double t = dt * static_cast<double>(kk);
        buf[static_cast<std::size_t>(k)] *= dv * std::polar(1.0, -t * v0);
      }
    }
    // buf holds f~(-sigma - i t_k) at FFT positions.
    const std::ptrdiff_t k_limit = nn / 2 - 1;
    const std::ptrdiff_t k_requested =
        contour.height > 0.0 ? static_cast<std::ptrdiff_t>(std::ceil(contour.height / dt)) : k_limit;
    std::vector<cplx> pos, neg;  // t >= 0 and t < 0 samples
    double running = 0.0;
    int quiet = 0;
    std::ptrdiff_t k_end = 0;
    bool decayed = false;
    std::vector<double> panel_mass;
    for (std::ptrdiff_t start = 0; start <= std::min(k_requested, k_limit); start += panel_steps) {
      const std::ptrdiff_t stop = std::min({start + panel_steps, k_requested + 1, k_limit + 1});
      double mass = 0.0;
      for (std::ptrdiff_t k = start; k < stop; ++k) {
        const double t = dt * static_cast<double>(k);
        const cplx vp = gamma_ratio(sign, cplx(sigma, t)) * buf[static_cast<std::size_t>(k)];
        pos.push_back(vp);
        mass += std::abs(vp);
        if (k > 0) {
          const cplx vn = gamma_ratio(sign, cplx(sigma, -t)) * buf[static_cast<std::size_t>(nn - k)];
          neg.push_back(vn);
          mass += std::abs(vn);
        }
      }
      running += mass;
      panel_mass.push_back(mass);
      k_end = stop - 1;
      if (mass < contour.decay_tol * running) {
        ++quiet;
      } else {
        quiet = 0;
      }
      if (contour.height <= 0.0 && quiet >= 3) {
        decayed = true;
        break;
      }
    }
    if (contour.height > 0.0) {
      if (k_requested > k_limit) {
        n <<= 1;
        continue;
      }
      const std::size_t m = panel_mass.size();
      decayed = m >= 3;
      for (std::size_t i = m >= 3 ? m - 3 : 0; i < m; ++i) {
        decayed = decayed && panel_mass[i] < contour.decay_tol * running;
      }
      if (!decayed) {
        throw AccuracyError("contour too short: integrand not below " +
                            std::to_string(contour.decay_tol) + " of its mass at height " +
                            std::to_string(contour.height));
      }
    } else if (!decayed) {
      if (f.is_zero()) {
        decayed = true;
      } else {
        if (n >= (std::size_t{1} << 23)) {
          throw AccuracyError("adaptive contour height: integrand did not decay within t = " +
                              std::to_string(dt * static_cast<double>(k_limit)));
        }
        n <<= 1;
        continue;
      }
    }
    k_max_ = k_end;
    height_ = dt * static_cast<double>(k_end);
    phi_.assign(static_cast<std::size_t>(2 * k_max_ + 1), cplx{});
    for (std::ptrdiff_t k = 0; k <= k_max_; ++k) phi_[static_cast<std::size_t>(k_max_ + k)] = pos[static_cast<std::size_t>(k)];
    for (std::ptrdiff_t k = 1; k <= k_max_; ++k) phi_[static_cast<std::size_t>(k_max_ - k)] = neg[static_cast<std::size_t>(k - 1)];

    // Second transform onto the u = log(pi^3 y) grid.
    du_ = dv;
    const double u_hi = std::log(pi3 * y_max) + 8.0;
    const double u_lo = std::log(pi3 * y_min) - 8.0;
    const double period = kTwoPi / dt;
    const double u0 = u_hi + 40.0 - period;
    if (u_lo < u0 + 1.0) throw InvalidArgument("F transform: y range too wide for the contour step");
    std::fill(buf.begin(), buf.end(), cplx{});
    for (std::ptrdiff_t k = -k_max_; k <= k_max_; ++k) {
      const double t = dt * static_cast<double>(k);
      const std::size_t pos_k = static_cast<std::size_t>(k >= 0 ? k : k + nn);
      buf[pos_k] = phi_[static_cast<std::size_t>(k + k_max_)] * std::polar(1.0, -t * u0);
    }
    fft_forward(buf);
    const auto l0 = static_cast<std::ptrdiff_t>(std::floor((u_lo - u0) / du_));
    const auto l1 = static_cast<std::ptrdiff_t>(std::ceil((u_hi - u0) / du_));
    u_lo_ = u0 + du_ * static_cast<double>(l0);
    scaled_.resize(static_cast<std::size_t>(l1 - l0 + 1));
    const double norm = dt / kTwoPi;
    for (std::ptrdiff_t l = l0; l <= l1; ++l) {
      scaled_[static_cast<std::size_t>(l - l0)] = norm * buf[static_cast<std::size_t>(l)];
    }
    return;
  }
}

cplx MellinBarnesTransform::operator()(double y) const {
  if (!(y >= y_min_ * (1.0 - 1e-12) && y <= y_max_ * (1.0 + 1e-12))) {
    throw OutOfRange("F transform evaluated outside its y range");
  }
  const double pi3 = kPi * kPi * kPi;
  const double u = std::log(pi3 * y);
  constexpr int kPoints = 10;
  static constexpr std::array<double, kPoints> w{1, -9, 36, -84, 126, -126, 84, -36, 9, -1};
  const double pos = (u - u_lo_) / du_;
  auto j0 = static_cast<std::ptrdiff_t>(std::floor(pos)) - kPoints / 2 + 1;
  j0 = std::clamp<std::ptrdiff_t>(j0, 0, static_cast<std::ptrdiff_t>(scaled_.size()) - kPoints);
  cplx num{};
  double den = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double d = pos - static_cast<double>(j0 + i);
    const cplx v = scaled_[static_cast<std::size_t>(j0 + i)];
    if (d == 0.0) return v * std::pow(pi3 * y, -contour_.sigma);
    const double c = w[static_cast<std::size_t>(i)] / d;
    num += c * v;
    den += c;
  }
  return (num / den) * std::pow(pi3 * y, -contour_.sigma);
}

cplx MellinBarnesTransform::direct(double y) const {
  if (!(y > 0.0)) throw InvalidArgument("F transform: y must be positive");
  const double pi3 = kPi * kPi * kPi;
  const double u = std::log(pi3 * y);
  const double dt = contour_.step;
  CompensatedSum<cplx> acc;
  for (std::ptrdiff_t k = -k_max_; k <= k_max_; ++k) {
    const double t = dt * static_cast<double>(k);
    acc.add(phi_[static_cast<std::size_t>(k + k_max_)] * std::polar(1.0, -t * u));
  }
  return dt / kTwoPi * acc.value() * std::pow(pi3 * y, -contour_.sigma);
}

cplx transform_F(const ModulatedWindow& f, double y, Sign sign, const ContourSpec& contour) {
  return MellinBarnesTransform(f, sign, contour, y, y).direct(y);
}

cplx integral_I(i64 n, i64 q1, i64 q1t, i64 q2, const ModulatedWindow& h,
                const MellinBarnesTransform& f_plus) {
  if (f_plus.sign() != Sign::plus) throw InvalidArgument("integral_I: expects the F_+ transform");
  if (h.is_zero()) return 0.0;
  const double ca = std::pow(static_cast<double>(q1 * q2), 3);
  const double cb = std::pow(static_cast<double>(q1t * q2), 3);
  const double big = static_cast<double>(q1 * q1t * q2);
  const double freq = -static_cast<double>(n) / big;
  const auto ps = pieces(h);
  double floor_scale = 0.0;
  auto integrand = [&](double x) {
    return h(x) * f_plus(x / ca) * std::conj(f_plus(x / cb)) * e_real(freq * x);
  };
  for (const auto& [a, b, tr] : ps) {
    floor_scale += std::abs(integrate_gl<cplx>(
        [&](double x) { return cplx(std::abs(integrand(x))); }, a, b, 16, kOrder));
  }
  floor_scale *= 1e-3;
  auto body = [&](double refine) {
    CompensatedSum<cplx> total;
    for (const auto& [a, b, tr] : ps) {
      const double osc = std::abs(freq) * (b - a) + std::log(b / a);
      const auto panels = static_cast<std::size_t>(refine * (8.0 + std::ceil(2.0 * osc)));
      total.add(integrate_gl<cplx>(integrand, a, b, panels, kOrder));
    }
    return total.value();
  };
  return refine_until_stable(body, 1e-9, floor_scale);
}

}  // namespace shiftconv
