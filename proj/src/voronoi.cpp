#include "shiftconv/voronoi.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "shiftconv/errors.hpp"
#include "shiftconv/parallel.hpp"

namespace shiftconv {

namespace {

constexpr i64 kChunk = 1 << 15;

double scale_of(const VoronoiReport& r) {
  return std::max({std::abs(r.lhs), std::abs(r.rhs), 1e-30});
}

}  // namespace

void finalize_report(VoronoiReport& r) {
  r.abs_diff = std::abs(r.lhs - r.rhs);
  r.rel_diff = r.abs_diff / scale_of(r);
}

i64 gl2_initial_truncation(i64 q, double Y) {
  const double qd = static_cast<double>(q);
  const double m = 10.0 * qd * qd * std::max(1.0, std::log(qd * Y)) / Y;
  return std::max<i64>(1, static_cast<i64>(std::ceil(m)));
}

Gl2Verifier::Gl2Verifier(std::shared_ptr<const ArithmeticTables> tables, i64 q, ModulatedWindow g,
                         Gl2Options options)
    : tables_(std::move(tables)), q_(q), g_(std::move(g)), opt_(std::move(options)) {
  if (q < 1) throw InvalidArgument("verify_gl2: q must be positive");
  if (!tables_) throw InvalidArgument("verify_gl2: tables required");
  if (g_.hi() >= static_cast<double>(tables_->tau_max()) + 1.0) {
    throw OutOfRange("verify_gl2: tau table does not cover the support of g");
  }
  if (opt_.g_table) {
    const auto& w = opt_.g_table->window();
    const bool same = w.scale == g_.scale && w.frequency == g_.frequency && w.amplitude == g_.amplitude &&
                      w.window.shape() == g_.window.shape() && w.breakpoints() == g_.breakpoints();
    if (!same) throw InvalidArgument("verify_gl2: g_table was built for a different window");
  }
  weights_.push_back(0.0);
}

void Gl2Verifier::extend(i64 M) {
  const i64 have = static_cast<i64>(weights_.size()) - 1;
  if (M <= have) return;
  if (M > static_cast<i64>(tables_->tau_max())) {
    throw OutOfRange("verify_gl2: dual truncation " + std::to_string(M) +
                     " exceeds the tau table limit " + std::to_string(tables_->tau_max()));
  }
  weights_.resize(static_cast<std::size_t>(M + 1));
  const double q2 = static_cast<double>(q_) * static_cast<double>(q_);
  const i64 count = M - have;
  auto& table = opt_.g_table;
  if (!table && count > 4096) table = std::make_shared<GTable>(g_, opt_.quadrature);
  const bool tabulated = table && table->cost_to(static_cast<double>(M) / q2) < static_cast<std::size_t>(count);
  if (tabulated) table->ensure(static_cast<double>(M) / q2);
  const auto chunks = static_cast<std::size_t>((count + 255) / 256);
  parallel_for(chunks, [&](std::size_t c) {
    const i64 from = have + 1 + static_cast<i64>(c) * 256;
    const i64 to = std::min(M, from + 255);
    for (i64 m = from; m <= to; ++m) {
      const double t0 = tables_->tau0(static_cast<std::size_t>(m));
      weights_[static_cast<std::size_t>(m)] =
          t0 == 0.0 ? cplx{}
          : tabulated ? t0 * (*table)(static_cast<double>(m) / q2)
                      : t0 * transform_G(g_, static_cast<double>(m) / q2, opt_.quadrature);
    }
  });
}

cplx Gl2Verifier::lhs(i64 a) const {
  const auto lo = static_cast<i64>(std::max(1.0, std::ceil(g_.lo())));
  const auto hi = static_cast<i64>(std::floor(g_.hi()));
  const UnitRoots roots(q_);
  CompensatedSum<cplx> acc;
  for (i64 m = lo; m <= hi; ++m) {
    const cplx gm = g_(static_cast<double>(m));
    if (gm == cplx{}) continue;
    acc.add(tables_->tau0(static_cast<std::size_t>(m)) * roots[mul_mod(a, m, q_)] * gm);
  }
  return acc.value();
}

cplx Gl2Verifier::dual(i64 a, i64 M) {
  extend(M);
  const i64 ab = mod_inverse(a, q_);
  const UnitRoots roots(q_);
  CompensatedSum<cplx> acc;
  for (i64 m = 1; m <= M; ++m) acc.add(roots[-mul_mod(ab, m, q_)] * weights_[static_cast<std::size_t>(m)]);
  return kTwoPi / static_cast<double>(q_) * acc.value();
}

VoronoiReport Gl2Verifier::report(i64 a) {
  if (gcd(a, q_) != 1) throw InvalidArgument("verify_gl2: gcd(a, q) != 1");
  VoronoiReport r;
  r.lhs = lhs(a);
  const i64 ab = mod_inverse(a, q_);
  const UnitRoots roots(q_);
  const double pref = kTwoPi / static_cast<double>(q_);
  const double scale = std::max(std::abs(r.lhs), 1e-30);
  const double quiet = 0.1 * opt_.tol * scale;
  i64 lo = 1, hi = gl2_initial_truncation(q_, g_.scale);
  CompensatedSum<cplx> total;
  int consecutive = 0;
  double last_block = 0.0, last_abs = 0.0;
  for (;;) {
    if (hi > opt_.max_truncation) {
      throw AccuracyError("verify_gl2: dual sum did not settle below truncation " +
                          std::to_string(opt_.max_truncation));
    }
    extend(hi);
    CompensatedSum<cplx> block;
    double abs_sum = 0.0;
    for (i64 m = lo; m <= hi; ++m) {
      const cplx term = pref * roots[-mul_mod(ab, m, q_)] * weights_[static_cast<std::size_t>(m)];
      block.add(term);
      abs_sum += std::abs(term);
    }
    total.add(block.value());
    last_block = std::abs(block.value());
    last_abs = abs_sum;
    consecutive = last_block <= quiet ? consecutive + 1 : 0;
    r.truncation = hi;
    if (consecutive >= 2) break;
    lo = hi + 1;
    hi *= 2;
  }
  r.rhs = total.value();
  finalize_report(r);
  r.tail_estimate = last_block / scale_of(r);
  r.tail_abs_sum = last_abs / scale_of(r);
  if (r.tail_estimate > opt_.tol) throw AccuracyError("verify_gl2: tail estimate exceeds tolerance");
  return r;
}

VoronoiReport verify_gl2(std::shared_ptr<const ArithmeticTables> tables, i64 q, i64 a,
                         const ModulatedWindow& g, const Gl2Options& options) {
  if (gcd(a, q) != 1) throw InvalidArgument("verify_gl2: gcd(a, q) != 1");
  Gl2Verifier v(std::move(tables), q, g, options);
  return v.report(a);
}

std::string Gl3Convention::name() const {
  std::string s = pairing == Gl3Pairing::standard ? "standard" : "swapped";
  if (plus_phase == cplx(1.0, 0.0)) return s + "/phase=1";
  if (plus_phase == cplx(0.0, 1.0)) return s + "/phase=i";
  if (plus_phase == cplx(0.0, -1.0)) return s + "/phase=-i";
  return s + "/phase=custom";
}

i64 gl3_initial_truncation(i64 q, double X, double H) {
  const double qd = static_cast<double>(q);
  const double n = 10.0 * qd * qd * qd * H * std::max(1.0, std::log(qd * X)) / X;
  return std::max<i64>(1, static_cast<i64>(std::ceil(n)));
}

Gl3DualSums::Gl3DualSums(i64 q, const ModulatedWindow& f, const Gl3Options& options) : q_(q) {
  if (q < 1) throw InvalidArgument("verify_gl3: q must be positive");
  units_ = units_mod(q);
  if (q == 1) units_ = {1};
  const double q3 = std::pow(static_cast<double>(q), 3);
  y_cap_ = std::min(options.y_max, static_cast<double>(options.max_truncation) / q3);
  fm_ = std::make_unique<MellinBarnesTransform>(f, Sign::minus, options.contour, 1.0 / q3, y_cap_);
  fp_ = std::make_unique<MellinBarnesTransform>(f, Sign::plus, options.contour, 1.0 / q3, y_cap_);
  table_ = std::make_unique<D3CharsumTable>(q, static_cast<i64>(y_cap_ * q3) + 1);
}

std::vector<Gl3DualSums::Components> Gl3DualSums::block(i64 n_from, i64 n_to) const {
  const double q3 = std::pow(static_cast<double>(q_), 3);
  if (static_cast<double>(n_to) > y_cap_ * q3 * (1.0 + 1e-12)) {
    throw AccuracyError("verify_gl3: dual truncation exceeds the tabulated transform range");
  }
  const auto d3 = shared_d3(static_cast<std::size_t>(n_to));
  const std::size_t na = units_.size();
  const i64 count = n_to - n_from + 1;
  const auto chunks = static_cast<std::size_t>((count + kChunk - 1) / kChunk);
  std::vector<std::vector<Components>> partial(chunks, std::vector<Components>(na));
  parallel_for(chunks, [&](std::size_t c) {
    const i64 from = n_from + static_cast<i64>(c) * kChunk;
    const i64 to = std::min(n_to, from + kChunk - 1);
    auto& acc = partial[c];
    for (i64 n = from; n <= to; ++n) {
      const double y = static_cast<double>(n) / q3;
      const cplx fm = (*fm_)(y);
      const cplx fp = (*fp_)(y);
      i64 smooth, coprime;
      table_->split(n, smooth, coprime);
      const double d3p = static_cast<double>((*d3)[static_cast<std::size_t>(coprime)]);
      const i64 inv = table_->inverse(coprime);
      const std::size_t si = table_->smooth_index(smooth);
      for (std::size_t i = 0; i < na; ++i) {
        const i64 cres = mul_mod(units_[i], inv, q_);
        const double lp = table_->lambda_at(si, cres);
        const double lm = table_->lambda_at(si, cres == 0 ? 0 : q_ - cres);
        const double dplus = d3p * (lp - lm);
        const double dminus = d3p * (lp + lm);
        acc[i].mm += dminus * fm;
        acc[i].pp += dplus * fp;
        acc[i].mp += dminus * fp;
        acc[i].pm += dplus * fm;
      }
    }
  });
  std::vector<Components> out(na);
  for (std::size_t i = 0; i < na; ++i) {
    CompensatedSum<cplx> mm, pp, mp, pm;
    for (const auto& p : partial) {
      mm.add(p[i].mm);
      pp.add(p[i].pp);
      mp.add(p[i].mp);
      pm.add(p[i].pm);
    }
    out[i] = {mm.value(), pp.value(), mp.value(), pm.value()};
  }
  return out;
}

cplx Gl3DualSums::combine(const Components& c, const Gl3Convention& conv) const {
  const double pref = std::pow(kPi, 1.5) / (2.0 * std::pow(static_cast<double>(q_), 3));
  if (conv.pairing == Gl3Pairing::standard) return pref * (c.mm + conv.plus_phase * c.pp);
  return pref * (c.pm + conv.plus_phase * c.mp);
}

cplx gl3_lhs(i64 q, i64 a, const ModulatedWindow& f) {
  const auto lo = static_cast<i64>(std::max(1.0, std::ceil(f.lo())));
  const auto hi = static_cast<i64>(std::floor(f.hi()));
  const auto d3 = shared_d3(static_cast<std::size_t>(std::max<i64>(hi, 1)));
  const UnitRoots roots(q);
  CompensatedSum<cplx> acc;
  for (i64 n = lo; n <= hi; ++n) {
    const cplx fn = f(static_cast<double>(n));
    if (fn == cplx{}) continue;
    acc.add(static_cast<double>((*d3)[static_cast<std::size_t>(n)]) * roots[mul_mod(a, n, q)] * fn);
  }
  return acc.value();
}

cplx gl3_main_term(const MainTermPoly& P, const ModulatedWindow& f) {
  const cplx m0 = log_moment(f, 0), m1 = log_moment(f, 1), m2 = log_moment(f, 2);
  return (P.A0 * m2 + P.A1 * m1 + P.A2 * m0) / static_cast<double>(P.q);
}

namespace {

const std::array<Gl3Convention, 4>& all_conventions() {
  static const std::array<Gl3Convention, 4> c{
      Gl3Convention::corrected(), Gl3Convention::literal(),
      Gl3Convention{Gl3Pairing::swapped, {1.0, 0.0}}, Gl3Convention{Gl3Pairing::swapped, {0.0, 1.0}}};
  return c;
}

struct AdaptiveDual {
  std::vector<Gl3DualSums::Components> totals;
  std::vector<Gl3DualSums::Components> last;
  i64 truncation = 0;
};

// Doubling blocks until two consecutive blocks are below 0.1 tol scale_a for every residue.
AdaptiveDual run_adaptive(const Gl3DualSums& sums, const std::vector<double>& scales, i64 n0,
                          const Gl3Options& options) {
  const std::size_t na = sums.residues().size();
  AdaptiveDual out;
  out.totals.assign(na, {});
  std::vector<int> consecutive(na, 0);
  i64 lo = 1, hi = std::max<i64>(n0, 64);
  for (;;) {
    if (hi > options.max_truncation) {
      throw AccuracyError("verify_gl3: dual sum did not settle below truncation " +
                          std::to_string(options.max_truncation));
    }
    const auto blk = sums.block(lo, hi);
    bool done = true;
    for (std::size_t i = 0; i < na; ++i) {
      out.totals[i].mm += blk[i].mm;
      out.totals[i].pp += blk[i].pp;
      out.totals[i].mp += blk[i].mp;
      out.totals[i].pm += blk[i].pm;
      const double size = std::abs(sums.combine(blk[i], options.convention));
      consecutive[i] = size <= 0.1 * options.tol * scales[i] ? consecutive[i] + 1 : 0;
      done = done && consecutive[i] >= 2;
    }
    out.last = blk;
    out.truncation = hi;
    if (done) return out;
    lo = hi + 1;
    hi *= 2;
  }
}

}  // namespace

std::vector<Gl3Report> verify_gl3_all(i64 q, const ModulatedWindow& f, const MainTermPoly& P,
                                      const Gl3Options& options) {
  if (P.q != q) throw InvalidArgument("verify_gl3: main-term polynomial fitted for another modulus");
  Gl3DualSums sums(q, f, options);
  const auto& res = sums.residues();
  const cplx main = gl3_main_term(P, f);
  std::vector<cplx> lhs(res.size());
  std::vector<double> scales(res.size());
  for (std::size_t i = 0; i < res.size(); ++i) {
    lhs[i] = gl3_lhs(q, res[i], f);
    scales[i] = std::max(std::abs(lhs[i]), 1e-30);
  }
  const double H = f.window.sharpness();
  const auto dual = run_adaptive(sums, scales, gl3_initial_truncation(q, f.scale, H), options);
  std::vector<Gl3Report> out(res.size());
  for (std::size_t i = 0; i < res.size(); ++i) {
    auto& r = out[i];
    const auto& t = dual.totals[i];
    r.lhs = lhs[i];
    r.main_term = main;
    r.rhs = main + sums.combine(t, options.convention);
    if (options.convention.pairing == Gl3Pairing::standard) {
      r.dual_minus = t.mm;
      r.dual_plus = t.pp;
    } else {
      r.dual_minus = t.pm;
      r.dual_plus = t.mp;
    }
    r.truncation = dual.truncation;
    finalize_report(r);
    r.tail_estimate = std::abs(sums.combine(dual.last[i], options.convention)) / scale_of(r);
    const auto& l = dual.last[i];
    const double pref = std::pow(kPi, 1.5) / (2.0 * std::pow(static_cast<double>(q), 3));
    r.tail_abs_sum = pref * (std::abs(l.mm) + std::abs(l.pp)) / scale_of(r);
    for (const auto& c : all_conventions()) {
      const cplx rhs = main + sums.combine(t, c);
      const double rel = std::abs(r.lhs - rhs) / std::max({std::abs(r.lhs), std::abs(rhs), 1e-30});
      r.conventions.push_back({c.name(), rhs, rel});
    }
    if (r.tail_estimate > options.tol) throw AccuracyError("verify_gl3: tail estimate exceeds tolerance");
  }
  return out;
}

Gl3Report verify_gl3(i64 q, i64 a, const ModulatedWindow& f, const MainTermPoly& P,
                     const Gl3Options& options) {
  if (gcd(a, q) != 1) throw InvalidArgument("verify_gl3: gcd(a, q) != 1");
  const auto all = verify_gl3_all(q, f, P, options);
  const auto units = q == 1 ? std::vector<i64>{1} : units_mod(q);
  const auto it = std::find(units.begin(), units.end(), mod(a, q) == 0 ? 1 : mod(a, q));
  return all[static_cast<std::size_t>(it - units.begin())];
}

std::array<ModulatedWindow, 3> default_fit_family(double base) {
  std::array<ModulatedWindow, 3> fam;
  for (int i = 0; i < 3; ++i) {
    fam[static_cast<std::size_t>(i)] = ModulatedWindow{SmoothWindow::v_shape(), base * std::pow(4.0, i), 0.0, 1.0};
  }
  return fam;
}

MainTermPoly fit_main_term(i64 q, const std::array<ModulatedWindow, 3>& family, i64 a,
                           const Gl3Options& options) {
  if (gcd(a, q) != 1) throw InvalidArgument("fit_main_term: gcd(a, q) != 1");
  std::array<double, 3> scales{};
  for (std::size_t i = 0; i < 3; ++i) scales[i] = family[i].scale;
  std::sort(scales.begin(), scales.end());
  if (scales[1] < 4.0 * scales[0] * (1 - 1e-12) || scales[2] < 4.0 * scales[1] * (1 - 1e-12)) {
    throw InvalidArgument("fit_main_term: dilates must be separated by a factor of at least 4");
  }
  Gl3Options fit_opt = options;
  fit_opt.tol = std::min(options.tol, 1e-7);
  Eigen::Matrix3d M;
  Eigen::Vector3d rhs;
  std::array<cplx, 3> target{};
  std::array<std::array<cplx, 3>, 3> moments{};
  MainTermPoly P;
  P.q = q;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& f = family[i];
    Gl3DualSums sums(q, f, fit_opt);
    const auto& res = sums.residues();
    const auto it = std::find(res.begin(), res.end(), q == 1 ? 1 : mod(a, q));
    const std::size_t ia = static_cast<std::size_t>(it - res.begin());
    std::vector<double> sc(res.size());
    std::vector<cplx> lhs(res.size());
    for (std::size_t j = 0; j < res.size(); ++j) {
      lhs[j] = gl3_lhs(q, res[j], f);
      sc[j] = std::max(std::abs(lhs[j]), 1e-30);
    }
    const auto dual = run_adaptive(sums, sc, gl3_initial_truncation(q, f.scale, f.window.sharpness()), fit_opt);
    P.truncations.push_back(dual.truncation);
    target[i] = lhs[ia] - sums.combine(dual.totals[ia], fit_opt.convention);
    for (int k = 0; k < 3; ++k) moments[i][static_cast<std::size_t>(k)] = log_moment(f, 2 - k) / static_cast<double>(q);
    for (int k = 0; k < 3; ++k) M(static_cast<int>(i), k) = moments[i][static_cast<std::size_t>(k)].real();
    rhs(static_cast<int>(i)) = target[i].real();
  }
  Eigen::Vector3d colscale;
  for (int k = 0; k < 3; ++k) colscale(k) = M.col(k).norm();
  Eigen::Matrix3d Ms = M;
  for (int k = 0; k < 3; ++k) Ms.col(k) /= colscale(k);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(Ms, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  P.condition = sv(0) / std::max(sv(2), 1e-300);
  if (P.condition > 1e8) {
    throw DegenerateFamily("fit_main_term: ill-conditioned system (condition " +
                           std::to_string(P.condition) + ")");
  }
  const Eigen::Vector3d x = svd.solve(rhs).cwiseQuotient(colscale);
  P.A0 = x(0);
  P.A1 = x(1);
  P.A2 = x(2);
  P.coefficient_max = x.cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < 3; ++i) {
    const cplx main = P.A0 * moments[i][0] + P.A1 * moments[i][1] + P.A2 * moments[i][2];
    P.fit_residual = std::max(P.fit_residual, std::abs(target[i] - main) / std::max(std::abs(target[i]), 1e-30));
  }
  return P;
}

}  // namespace shiftconv
