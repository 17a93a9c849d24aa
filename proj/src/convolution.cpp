#include "shiftconv/convolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "shiftconv/errors.hpp"
#include "shiftconv/expsums.hpp"
#include "shiftconv/window.hpp"

namespace shiftconv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_tables(const ArithmeticTables& t, i64 n_hi, i64 m_hi, const char* who) {
  if (n_hi > static_cast<i64>(t.d3_max()) || m_hi > static_cast<i64>(t.tau_max())) {
    throw OutOfRange(std::string(who) + ": tables must cover d3 up to " + std::to_string(n_hi) +
                     " and tau up to " + std::to_string(m_hi));
  }
}

}  // namespace

SumReport psi_direct(double x, i64 r, const ArithmeticTables& tables) {
  if (!(x > 0.0) || r < 1) throw InvalidArgument("psi_direct: x and r must be positive");
  const auto t0 = Clock::now();
  const auto n_hi = static_cast<i64>(std::floor(x));
  require_tables(tables, n_hi, r * n_hi - 1, "psi_direct");
  CompensatedSum<double> acc;
  double abs_sum = 0.0;
  for (i64 n = 1; n <= n_hi; ++n) {
    const double term = static_cast<double>(tables.d3(static_cast<std::size_t>(n))) *
                        tables.tau0(static_cast<std::size_t>(r * n - 1));
    acc.add(term);
    abs_sum += std::abs(term);
  }
  SumReport rep;
  rep.value = acc.value();
  rep.x_or_X = x;
  rep.r = r;
  rep.truncations["n_max"] = n_hi;
  rep.error_estimate = 4.0 * kEps * abs_sum;
  rep.wall_time = seconds_since(t0);
  return rep;
}

double psi_with(double x, i64 r, const std::vector<std::uint32_t>& d3,
                const std::function<double(std::size_t)>& coeff) {
  const auto n_hi = static_cast<i64>(std::floor(x));
  if (n_hi >= static_cast<i64>(d3.size())) throw OutOfRange("psi_with: d3 table too short");
  CompensatedSum<double> acc;
  for (i64 n = 1; n <= n_hi; ++n) {
    const auto m = static_cast<std::size_t>(r * n - 1);
    if (m == 0) continue;
    acc.add(static_cast<double>(d3[static_cast<std::size_t>(n)]) * coeff(m));
  }
  return acc.value();
}

double psi_majorant(double x, i64 r) {
  const auto n_hi = static_cast<i64>(std::floor(x));
  if (n_hi < 1) return 0.0;
  const auto d3 = shared_d3(static_cast<std::size_t>(n_hi));
  const auto d = sieve_divisors(static_cast<std::size_t>(std::max<i64>(r * n_hi, 1)));
  CompensatedSum<double> acc;
  for (i64 n = 1; n <= n_hi; ++n) {
    acc.add(static_cast<double>((*d3)[static_cast<std::size_t>(n)]) * d[static_cast<std::size_t>(r * n - 1)]);
  }
  return acc.value();
}

SumReport d_smooth(double X, i64 r, double H, const ArithmeticTables& tables) {
  if (!(X > 0.0) || r < 1) throw InvalidArgument("d_smooth: X and r must be positive");
  const auto t0 = Clock::now();
  const auto W = SmoothWindow::w_shape(H);
  const auto n_lo = static_cast<i64>(std::max(1.0, std::ceil(X * W.support_lo())));
  const auto n_hi = static_cast<i64>(std::floor(X * W.support_hi()));
  require_tables(tables, n_hi, r * n_hi - 1, "d_smooth");
  CompensatedSum<double> acc;
  double abs_sum = 0.0;
  for (i64 n = n_lo; n <= n_hi; ++n) {
    const double w = W(static_cast<double>(n) / X);
    if (w == 0.0) continue;
    const double term = static_cast<double>(tables.d3(static_cast<std::size_t>(n))) *
                        tables.tau0(static_cast<std::size_t>(r * n - 1)) * w;
    acc.add(term);
    abs_sum += std::abs(term);
  }
  SumReport rep;
  rep.value = acc.value();
  rep.x_or_X = X;
  rep.r = r;
  rep.H = H;
  rep.truncations["n_min"] = n_lo;
  rep.truncations["n_max"] = n_hi;
  rep.error_estimate = 4.0 * kEps * abs_sum;
  rep.wall_time = seconds_since(t0);
  return rep;
}

SumReport sharp_dyadic_sum(double X, i64 r, const ArithmeticTables& tables) {
  if (!(X > 0.0) || r < 1) throw InvalidArgument("sharp_dyadic_sum: X and r must be positive");
  const auto t0 = Clock::now();
  const auto n_lo = static_cast<i64>(std::max(1.0, std::ceil(X)));
  const auto n_hi = static_cast<i64>(std::floor(2.0 * X));
  require_tables(tables, n_hi, r * n_hi - 1, "sharp_dyadic_sum");
  CompensatedSum<double> acc;
  double abs_sum = 0.0;
  for (i64 n = n_lo; n <= n_hi; ++n) {
    const double term = static_cast<double>(tables.d3(static_cast<std::size_t>(n))) *
                        tables.tau0(static_cast<std::size_t>(r * n - 1));
    acc.add(term);
    abs_sum += std::abs(term);
  }
  SumReport rep;
  rep.value = acc.value();
  rep.x_or_X = X;
  rep.r = r;
  rep.truncations["n_min"] = n_lo;
  rep.truncations["n_max"] = n_hi;
  rep.error_estimate = 4.0 * kEps * abs_sum;
  rep.wall_time = seconds_since(t0);
  return rep;
}

i64 decompose_base_M(double Q, double Y) {
  return std::max<i64>(1, static_cast<i64>(std::ceil(10.0 * Q * Q * std::log(std::max(Q, 2.0)) / Y)));
}

i64 decompose_base_N(double Q, double X, double H) {
  return std::max<i64>(1, static_cast<i64>(std::ceil(10.0 * Q * Q * Q * H * std::log(std::max(Q, 2.0)) / X)));
}

std::array<ModulatedWindow, 3> fit_family_for(i64 q) {
  const double qd = static_cast<double>(q);
  return default_fit_family(100.0 * std::max(1.0, qd * qd * qd / 125.0));
}

Decomposer::Decomposer(std::shared_ptr<const ArithmeticTables> tables, ModulusFamily fam, double X,
                       i64 r, double H, DecomposeOptions options)
    : tables_(std::move(tables)), fam_(std::move(fam)), X_(X), H_(H), r_(r), opt_(std::move(options)) {
  if (!tables_) throw InvalidArgument("decompose: tables required");
  if (!(X > 0.0) || r < 1 || !(H > 1.0)) throw InvalidArgument("decompose: need X > 0, r >= 1, H > 1");
  for (i64 q : fam_.products) {
    if (q < 2) throw InvalidArgument("decompose: moduli must exceed 1");
    if (gcd(q, r) != 1) throw InvalidArgument("decompose: moduli must be coprime to r");
  }
}

const MainTermPoly& Decomposer::main_term(i64 q) {
  auto it = main_terms_.find(q);
  if (it != main_terms_.end()) return it->second;
  Gl3Options o;
  o.contour = opt_.contour;
  o.convention = opt_.convention;
  return main_terms_.emplace(q, fit_main_term(q, fit_family_for(q), 1, o)).first->second;
}

Decomposition Decomposer::run(double alpha) {
  Decomposition out;
  const double Y = static_cast<double>(r_) * X_;
  const double L = static_cast<double>(fam_.L);
  out.direct = d_tilde_alpha(fam_, alpha, *tables_, X_, r_, H_);
  const double Q = fam_.Q();
  out.M_base = decompose_base_M(Q, Y);
  out.N_base = decompose_base_N(Q, X_, H_);

  const ModulatedWindow f{SmoothWindow::w_shape(H_), X_, alpha * static_cast<double>(r_), 1.0};
  const ModulatedWindow g{SmoothWindow::v_shape(), Y, -alpha, 1.0};
  Gl2Options o2;
  o2.tol = opt_.tol;
  o2.max_truncation = std::max(opt_.max_M, opt_.M.value_or(0));
  Gl3Options o3;
  o3.tol = opt_.tol;
  o3.contour = opt_.contour;
  o3.convention = opt_.convention;
  o3.max_truncation = std::max(opt_.max_N, opt_.N.value_or(0));
  o3.y_max = std::numeric_limits<double>::max();
  const bool standard = opt_.convention.pairing == Gl3Pairing::standard;
  const cplx phase = opt_.convention.plus_phase;

  CompensatedSum<cplx> d0, d1, dm, disp0;
  cplx prog_r{}, disp1{}, prog_c{}, disp11{}, ident{};
  for (i64 q : fam_.products) {
    const auto& P = main_term(q);
    out.main_terms.push_back(P);
    out.moduli.push_back(q);
    const cplx main = gl3_main_term(P, f);
    const auto units = units_mod(q);
    const std::size_t na = units.size();
    const UnitRoots roots(q);
    const double qd = static_cast<double>(q);

    // m-sums: B(a) = sum tau0(m) e_q(-a m) g(m) via the twist -a.
    Gl2Verifier gv(tables_, q, g, o2);
    std::vector<cplx> Bdual(na);
    double scaleB = 1e-300;
    for (std::size_t i = 0; i < na; ++i) scaleB = std::max(scaleB, std::abs(gv.lhs(q - units[i])));
    i64 M = 0;
    if (opt_.M) {
      M = *opt_.M;
      for (std::size_t i = 0; i < na; ++i) Bdual[i] = gv.dual(q - units[i], M);
    } else {
      i64 hi = out.M_base;
      int quiet = 0;
      for (;;) {
        if (hi > o2.max_truncation) throw AccuracyError("decompose: m-sum did not settle");
        double worst = 0.0;
        for (std::size_t i = 0; i < na; ++i) {
          const cplx v = gv.dual(q - units[i], hi);
          worst = std::max(worst, std::abs(v - Bdual[i]));
          Bdual[i] = v;
        }
        M = hi;
        quiet = worst <= 0.1 * opt_.tol * scaleB ? quiet + 1 : 0;
        if (quiet >= 2) break;
        hi *= 2;
      }
    }

    // n-sums: A(a) = main + dual at the twist a r.
    Gl3DualSums sums(q, f, o3);
    const auto& res = sums.residues();
    double scaleA = 1e-300;
    for (i64 c : res) scaleA = std::max(scaleA, std::abs(gl3_lhs(q, c, f)));
    std::vector<Gl3DualSums::Components> tot(res.size());
    i64 N = 0;
    if (opt_.N) {
      N = *opt_.N;
      tot = sums.block(1, N);
    } else {
      i64 lo = 1, hi = out.N_base;
      int quiet = 0;
      for (;;) {
        if (hi > o3.max_truncation) throw AccuracyError("decompose: n-sum did not settle");
        const auto blk = sums.block(lo, hi);
        double worst = 0.0;
        for (std::size_t i = 0; i < res.size(); ++i) {
          tot[i].mm += blk[i].mm;
          tot[i].pp += blk[i].pp;
          tot[i].mp += blk[i].mp;
          tot[i].pm += blk[i].pm;
          worst = std::max(worst, std::abs(sums.combine(blk[i], opt_.convention)));
        }
        N = hi;
        quiet = worst <= 0.1 * opt_.tol * scaleA ? quiet + 1 : 0;
        if (quiet >= 2) break;
        lo = hi + 1;
        hi *= 2;
      }
    }
    out.M_used.push_back(M);
    out.N_used.push_back(N);

    const double pref3 = std::pow(kPi, 1.5) / (2.0 * qd * qd * qd);
    CompensatedSum<cplx> d0q, d1q, dmq, disp0q;
    for (std::size_t i = 0; i < na; ++i) {
      const i64 a = units[i];
      const i64 ar = mul_mod(a, r_, q);
      const auto j = static_cast<std::size_t>(std::lower_bound(res.begin(), res.end(), ar) - res.begin());
      const auto& c = tot[j];
      const cplx minus = pref3 * (standard ? c.mm : c.pm);
      const cplx plus = pref3 * phase * (standard ? c.pp : c.mp);
      const cplx w = roots[-a] * Bdual[i];
      d0q.add(main * w);
      d1q.add(plus * w);
      dmq.add(minus * w);
      disp0q.add(main * roots[a] * Bdual[i]);
    }
    d0.add(d0q.value() / L);
    d1.add(d1q.value() / L);
    dm.add(dmq.value() / L);
    disp0.add(disp0q.value() / L);

    if (opt_.display_checks) {
      const i64 Md = opt_.display_M, Nd = opt_.display_N;
      std::vector<cplx> tg(static_cast<std::size_t>(Md + 1));
      for (i64 m = 1; m <= Md; ++m) {
        tg[static_cast<std::size_t>(m)] =
            tables_->tau0(static_cast<std::size_t>(m)) * transform_G(g, static_cast<double>(m) / (qd * qd));
      }
      std::vector<cplx> Fp(static_cast<std::size_t>(Nd + 1));
      for (i64 n = 1; n <= Nd; ++n) Fp[static_cast<std::size_t>(n)] = sums.f_plus()(static_cast<double>(n) / (qd * qd * qd));
      const auto d3 = shared_d3(static_cast<std::size_t>(Nd));
      for (std::size_t i = 0; i < na; ++i) {
        const i64 a = units[i];
        const i64 ab = mod_inverse(a, q);
        cplx Bd{}, plus_all{}, plus_cop{};
        for (i64 m = 1; m <= Md; ++m) Bd += roots[mul_mod(ab, m, q)] * tg[static_cast<std::size_t>(m)];
        Bd *= kTwoPi / qd;
        const i64 ar = mul_mod(a, r_, q);
        for (i64 n = 1; n <= Nd; ++n) {
          const cplx t = d3_charsum(ar, q, n, Sign::plus).value * Fp[static_cast<std::size_t>(n)];
          plus_all += t;
          if (gcd(n, q) == 1) plus_cop += t;
        }
        prog_r += roots[-a] * pref3 * phase * plus_all * Bd / L;
        prog_c += roots[-a] * pref3 * phase * plus_cop * Bd / L;
      }
      const double p52 = std::pow(kPi, 2.5);
      for (i64 m = 1; m <= Md; ++m) {
        const cplx gm = tg[static_cast<std::size_t>(m)];
        if (gm == cplx{}) continue;
        cplx s1{}, s11{}, sim{};
        for (i64 n = 1; n <= Nd; ++n) {
          const cplx F = Fp[static_cast<std::size_t>(n)];
          s1 += s_star(m, n, q, r_).value * F;
          sim += s_star(-m, n, q, r_).value.imag() * F;
          if (gcd(n, q) == 1) {
            s11 += static_cast<double>((*d3)[static_cast<std::size_t>(n)]) * s_dagger(m, n, q, r_).value * F;
          }
        }
        disp1 += p52 / std::pow(qd, 4) * gm * s1 / L;
        disp11 += p52 / std::pow(qd, 3) * gm * s11 / L;
        ident += -2.0 * p52 / std::pow(qd, 4) * gm * sim / L;
      }
    }
  }
  out.d0_part = d0.value();
  out.d1_part = d1.value();
  out.d_minus_part = dm.value();
  out.transformed = out.d0_part + out.d1_part + out.d_minus_part;
  out.residual = std::abs(out.direct - out.transformed) / std::max(std::abs(out.direct), 1e-300);
  out.zero_frequency_display = disp0.value();
  out.zero_frequency_display_rel =
      std::abs(out.zero_frequency_display - out.d0_part) / std::max(std::abs(out.d0_part), 1e-300);
  if (opt_.display_checks) {
    out.plus_display_ratio = std::abs(prog_r) > 0.0 ? disp1 / prog_r : cplx{};
    out.plus_display_coprime_ratio = std::abs(prog_c) > 0.0 ? disp11 / prog_c : cplx{};
    out.plus_identity_ratio = std::abs(prog_r) > 0.0 ? ident / prog_r : cplx{};
  }
  return out;
}

Decomposition decompose_d_tilde_alpha(const ModulusFamily& fam, double alpha, double X, i64 r,
                                      double H, std::shared_ptr<const ArithmeticTables> tables,
                                      const ContourSpec& contour, DecomposeOptions options) {
  options.contour = contour;
  Decomposer d(std::move(tables), fam, X, r, H, std::move(options));
  return d.run(alpha);
}

ParameterChoice choose_parameters(double X, i64 r) {
  if (!(X > 1.0)) throw InvalidArgument("choose_parameters: X must exceed 1");
  if (r < 1) throw InvalidArgument("choose_parameters: r must be positive");
  ParameterChoice p;
  p.X = X;
  p.r = r;
  const double lr = std::log(static_cast<double>(r)), lx = std::log(X);
  p.exponent_delta = 1.0 / 35.0 - (2.0 / 7.0) * (lr / lx);
  p.H = std::pow(X, p.exponent_delta);
  const double rd = static_cast<double>(r);
  p.interval_halfwidth = 1.0 / (rd * X);
  p.Q = rd * X * std::pow(X, -0.5 + p.exponent_delta);
  p.Q2 = std::pow(X, 0.4);
  p.Q1 = rd * std::pow(X, 0.1 + p.exponent_delta);
  p.degenerate = p.exponent_delta <= 1e-12;
  p.out_of_range = lr >= 0.8 * lx;
  return p;
}

std::vector<double> geometric_grid(double x_lo, double x_hi, std::size_t count) {
  if (!(x_lo > 0.0) || !(x_hi >= x_lo) || count == 0) throw InvalidArgument("geometric_grid: bad range");
  std::vector<double> out;
  if (count == 1) return {x_lo};
  const double ratio = std::pow(x_hi / x_lo, 1.0 / static_cast<double>(count - 1));
  for (std::size_t k = 0; k < count; ++k) out.push_back(x_lo * std::pow(ratio, static_cast<double>(k)));
  out.back() = x_hi;
  return out;
}

ScanReport exponent_scan(const std::vector<double>& x_grid, i64 r, const ArithmeticTables& tables,
                         ScanCoefficients coefficients, bool with_majorant) {
  if (x_grid.empty()) throw InvalidArgument("exponent_scan: empty grid");
  ScanReport rep;
  const auto x_max = *std::max_element(x_grid.begin(), x_grid.end());
  const auto n_max = static_cast<i64>(std::floor(x_max));
  require_tables(tables, n_max, coefficients == ScanCoefficients::tau0 ? r * n_max - 1 : 0, "exponent_scan");
  const std::vector<std::uint32_t> d3(tables.d3_values().begin(), tables.d3_values().end());
  auto coeff = [&](std::size_t m) {
    return coefficients == ScanCoefficients::tau0 ? tables.tau0(m) : 1.0;
  };
  for (double x : x_grid) {
    if (!(x >= 1.0)) throw InvalidArgument("exponent_scan: grid points must be >= 1");
    const double v = psi_with(x, r, d3, coeff);
    if (v == 0.0) {
      rep.warnings.push_back("dropped x = " + std::to_string(x) + ": psi vanishes");
      continue;
    }
    ScanPoint p;
    p.x = x;
    p.log_x = std::log(x);
    p.psi = v;
    p.log_abs_psi = std::log(std::abs(v));
    if (with_majorant) p.majorant = psi_majorant(x, r);
    rep.points.push_back(p);
  }
  if (rep.points.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rep.points.size());
    for (const auto& p : rep.points) {
      sx += p.log_x;
      sy += p.log_abs_psi;
      sxx += p.log_x * p.log_x;
      sxy += p.log_x * p.log_abs_psi;
    }
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  } else {
    rep.warnings.push_back("fewer than two usable points; slope undefined");
    rep.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace shiftconv
