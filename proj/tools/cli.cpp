#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "shiftconv/arith.hpp"
#include "shiftconv/build_id.hpp"
#include "shiftconv/circle.hpp"
#include "shiftconv/convolution.hpp"
#include "shiftconv/errors.hpp"
#include "shiftconv/expsums.hpp"
#include "shiftconv/parallel.hpp"
#include "shiftconv/tau_io.hpp"
#include "shiftconv/voronoi.hpp"

namespace shiftconv::cli {

using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<CommandSpec> make_commands() {
  std::vector<CommandSpec> c;
  c.push_back({"sieve", "d3 sieve up to n; emits d3 on [from, to]",
               {{"n", "1000", "sieve limit"}, {"from", "1", "first emitted n"}, {"to", "", "last emitted n (default min(n, 100))"}},
               {},
               Format::csv});
  c.push_back({"tau", "Ramanujan tau and its normalization on [from, to]",
               {{"n", "100", "table limit"}, {"from", "1", "first emitted n"}, {"to", "", "last emitted n (default min(n, 100))"}},
               {},
               Format::csv});
  c.push_back({"kloosterman", "Kloosterman sum S(a, b; q)", {{"a", "1", ""}, {"b", "1", ""}, {"q", "7", "modulus"}}, {}});
  c.push_back({"charsum", "character sums: d3plus, d3minus, s_star, s_dagger, s_dagger_prime, t_sum",
               {{"kind", "d3plus", "which sum"},
                {"a", "1", ""},
                {"q", "7", "modulus (q1 q2 for s_star / s_dagger)"},
                {"n", "1", ""},
                {"m", "1", ""},
                {"r", "1", "shift"},
                {"q1", "5", "prime for s_dagger_prime and t_sum"},
                {"q1t", "7", "second prime for t_sum"},
                {"q2", "3", "cofactor prime"},
                {"method", "reduced", "naive or reduced"}},
               {}});
  c.push_back({"voronoi2", "GL(2) Voronoi identity for the twisted tau sum",
               {{"q", "5", "modulus"}, {"a", "1", "twist"}, {"Y", "500", "window scale"}},
               {{"tol", 1e-6}}});
  c.push_back({"voronoi3", "GL(3) Voronoi identity for the twisted d3 sum",
               {{"q", "2", "modulus"}, {"a", "1", "twist"}, {"X", "100", "window scale"}, {"H", "5", "window sharpness"}},
               {{"tol", 1e-4}}});
  c.push_back({"jutila", "moduli family, mass and exact L2 discrepancy",
               {{"Q1", "2.1", ""}, {"Q2", "5.2", ""}, {"r", "1", ""},
                {"delta", "", "half-width p/q (default 1/ceil(Q^{3/2}))"},
                {"samples", "0", "Monte Carlo samples (0 skips)"}, {"seed", "20240601", "Monte Carlo seed"}},
               {}});
  c.push_back({"dtilde", "circle-method approximation of the smoothed sum",
               {{"Q1", "3.5", ""}, {"Q2", "11", ""}, {"r", "1", ""}, {"X", "200", ""}, {"H", "5", ""},
                {"delta", "", "half-width p/q (default 1/(r X))"}, {"points", "17", "Gauss-Legendre nodes"},
                {"alpha", "", "evaluate the alpha-integrand only"}},
               {{"quadrature", 1e-6}}});
  c.push_back({"decompose", "Voronoi-expanded rebuild of the alpha-integrand",
               {{"Q1", "2.1", ""}, {"Q2", "5.2", ""}, {"r", "1", ""}, {"X", "100", ""}, {"H", "5", ""},
                {"delta", "", "half-width p/q (default 1/(r X))"}, {"alpha", "0", ""},
                {"M", "", "fixed m-truncation"}, {"N", "", "fixed n-truncation"}},
               {{"tol", 1e-3}}});
  c.push_back({"psi", "shifted convolution sum over n <= x", {{"x", "1000", ""}, {"r", "1", "shift"}}, {}, Format::csv});
  c.push_back({"scan", "log-log growth scan of psi",
               {{"x_lo", "1000", ""}, {"x_hi", "100000", ""}, {"count", "8", "grid points"}, {"r", "1", "shift"},
                {"coefficients", "tau0", "tau0 or ones"}, {"majorant", "0", "also emit the divisor majorant"}},
               {},
               Format::csv});
  c.push_back({"params", "parameter choice for given X and r", {{"X", "1e10", ""}, {"r", "1", ""}}, {}});
  return c;
}

double parse_real(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw InvalidArgument("invalid number for " + key + ": '" + s + "'");
  }
  return v;
}

i64 parse_int(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  i64 v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec == std::errc() && res.ptr == t.data() + t.size() && !t.empty()) return v;
  const double d = parse_real(key, s);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) throw InvalidArgument("invalid integer for " + key + ": '" + s + "'");
  return static_cast<i64>(d);
}

Rational parse_rational(const std::string& key, const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) {
    const double d = parse_real(key, s);
    if (d <= 0.0 || d > 0.5) throw InvalidArgument(key + " must lie in (0, 1/2]");
    const i64 inv = static_cast<i64>(std::llround(1.0 / d));
    if (std::abs(1.0 / static_cast<double>(inv) - d) > 1e-15 * d) {
      throw InvalidArgument(key + ": give a non-unit fraction as p/q");
    }
    return Rational(1, inv);
  }
  const i64 p = parse_int(key, s.substr(0, slash));
  const i64 q = parse_int(key, s.substr(slash + 1));
  if (p <= 0 || q <= 0) throw InvalidArgument(key + " must be a positive fraction");
  return Rational(p, q);
}

class Args {
 public:
  explicit Args(const RunConfig& c) : c_(c) {}
  bool has(const std::string& k) const {
    const auto it = c_.params.find(k);
    return it != c_.params.end() && !it->second.empty();
  }
  const std::string& text(const std::string& k) const {
    const auto it = c_.params.find(k);
    if (it == c_.params.end() || it->second.empty()) throw InvalidArgument("missing parameter " + k);
    return it->second;
  }
  double real(const std::string& k) const { return parse_real(k, text(k)); }
  i64 integer(const std::string& k) const { return parse_int(k, text(k)); }
  i64 positive(const std::string& k) const {
    const i64 v = integer(k);
    if (v < 1) throw InvalidArgument(k + " must be positive");
    return v;
  }
  double positive_real(const std::string& k) const {
    const double v = real(k);
    if (!(v > 0.0)) throw InvalidArgument(k + " must be positive");
    return v;
  }
  Rational rational(const std::string& k) const { return parse_rational(k, text(k)); }
  double tol(const std::string& k) const { return c_.tolerances.at(k); }

 private:
  const RunConfig& c_;
};

json cjson(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

struct Result {
  json inputs = json::object();
  json outputs = json::object();
  json truncations = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::shared_ptr<const ArithmeticTables> load_tables(std::size_t tau_max, std::size_t d3_max) {
  std::optional<std::filesystem::path> dir;
  if (const char* e = std::getenv("SHIFTCONV_CACHE_DIR"); e != nullptr && *e != '\0') dir = std::filesystem::path(e);
  auto tau = load_or_compute_tau(std::max<std::size_t>(tau_max, 1), dir);
  tau.resize(std::max<std::size_t>(tau_max, 1) + 1);
  return ArithmeticTables::from_tau(std::move(tau), std::max<std::size_t>(d3_max, 1));
}

json report_json(const VoronoiReport& r) {
  return json{{"lhs", cjson(r.lhs)},          {"rhs", cjson(r.rhs)},
              {"abs_diff", r.abs_diff},       {"rel_diff", r.rel_diff},
              {"truncation", r.truncation},   {"tail_estimate", r.tail_estimate},
              {"tail_abs_sum", r.tail_abs_sum}};
}

json poly_json(const MainTermPoly& P) {
  return json{{"q", P.q},
              {"A0", P.A0},
              {"A1", P.A1},
              {"A2", P.A2},
              {"fit_residual", P.fit_residual},
              {"condition", P.condition},
              {"truncations", P.truncations}};
}

void cmd_sieve(const Args& a, Result& res) {
  const i64 n = a.positive("n");
  const i64 from = a.positive("from");
  const i64 to = a.has("to") ? a.integer("to") : std::min<i64>(n, 100);
  if (to > n || from > to) throw InvalidArgument("sieve: need 1 <= from <= to <= n");
  res.inputs = {{"n", n}, {"from", from}, {"to", to}};
  const auto d3 = sieve_d3(static_cast<std::size_t>(n));
  std::uint64_t total = 0;
  std::uint32_t mx = 0;
  for (i64 k = 1; k <= n; ++k) {
    total += d3[static_cast<std::size_t>(k)];
    mx = std::max(mx, d3[static_cast<std::size_t>(k)]);
  }
  res.outputs = {{"d3_sum", total}, {"d3_max", mx}};
  res.columns = {"n", "d3"};
  for (i64 k = from; k <= to; ++k) res.rows.push_back({k, d3[static_cast<std::size_t>(k)]});
}

void cmd_tau(const Args& a, Result& res) {
  const i64 n = a.positive("n");
  const i64 from = a.positive("from");
  const i64 to = a.has("to") ? a.integer("to") : std::min<i64>(n, 100);
  if (to > n || from > to) throw InvalidArgument("tau: need 1 <= from <= to <= n");
  res.inputs = {{"n", n}, {"from", from}, {"to", to}};
  const auto t = load_tables(static_cast<std::size_t>(n), 1);
  const auto checked = check_tau_relations(t->tau_values().subspan(0, static_cast<std::size_t>(n) + 1));
  res.outputs = {{"relations_checked", checked}};
  res.columns = {"n", "tau", "tau0"};
  for (i64 k = from; k <= to; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    res.rows.push_back({k, t->tau(kk).str(), t->tau0(kk)});
  }
}

void cmd_kloosterman(const Args& a, Result& res) {
  const i64 x = a.integer("a"), y = a.integer("b"), q = a.positive("q");
  res.inputs = {{"a", x}, {"b", y}, {"q", q}};
  const auto v = kloosterman(x, y, q);
  res.outputs = {{"value", cjson(v.value)}, {"abs", std::abs(v.value)}, {"weil_ratio", std::abs(v.value) / (2.0 * std::sqrt(static_cast<double>(q)))}};
}

void cmd_charsum(const Args& a, Result& res) {
  const std::string kind = a.text("kind");
  const std::string mtext = a.text("method");
  if (mtext != "naive" && mtext != "reduced") throw InvalidArgument("method must be naive or reduced");
  const Method method = mtext == "naive" ? Method::naive : Method::reduced;
  res.inputs = {{"kind", kind}, {"method", mtext}};
  cplx v;
  if (kind == "d3plus" || kind == "d3minus") {
    const i64 x = a.integer("a"), q = a.positive("q"), n = a.positive("n");
    res.inputs.update(json{{"a", x}, {"q", q}, {"n", n}});
    v = d3_charsum(x, q, n, kind == "d3plus" ? Sign::plus : Sign::minus, method).value;
  } else if (kind == "s_star" || kind == "s_dagger") {
    const i64 m = a.integer("m"), n = a.positive("n"), q = a.positive("q"), r = a.positive("r");
    res.inputs.update(json{{"m", m}, {"n", n}, {"q", q}, {"r", r}});
    v = kind == "s_star" ? s_star(m, n, q, r, method).value : s_dagger(m, n, q, r, method).value;
  } else if (kind == "s_dagger_prime") {
    const i64 m = a.integer("m"), n = a.positive("n"), q1 = a.positive("q1"), q2 = a.positive("q2"), r = a.positive("r");
    res.inputs.update(json{{"m", m}, {"n", n}, {"q1", q1}, {"q2", q2}, {"r", r}});
    v = s_dagger_prime(m, n, q2, q1, r, method).value;
    res.outputs["bound"] = s_dagger_prime_bound(n, q1);
  } else if (kind == "t_sum") {
    const i64 m = a.integer("m"), n = a.integer("n"), q1 = a.positive("q1"), q1t = a.positive("q1t"),
              q2 = a.positive("q2"), r = a.positive("r");
    res.inputs.update(json{{"m", m}, {"n", n}, {"q1", q1}, {"q1t", q1t}, {"q2", q2}, {"r", r}});
    v = t_sum(m, n, q1, q1t, q2, r).value;
    res.outputs["scale"] = t_sum_scale(q1, q1t, q2);
  } else {
    throw InvalidArgument("unknown charsum kind '" + kind + "'");
  }
  res.outputs["value"] = cjson(v);
  res.outputs["abs"] = std::abs(v);
}

void cmd_voronoi2(const Args& a, Result& res) {
  const i64 q = a.positive("q"), x = a.integer("a");
  const double Y = a.positive_real("Y");
  res.inputs = {{"q", q}, {"a", x}, {"Y", Y}};
  Gl2Options opt;
  opt.tol = a.tol("tol");
  const ModulatedWindow g{SmoothWindow::v_shape(), Y, 0.0, 1.0};
  auto cover = static_cast<std::size_t>(std::max(3.0 * Y + 2.0, 64.0 * static_cast<double>(q * q)));
  for (;;) {
    try {
      const auto r = verify_gl2(load_tables(cover, 1), q, x, g, opt);
      res.outputs = report_json(r);
      res.truncations = {{"M", r.truncation}};
      return;
    } catch (const OutOfRange&) {
      if (cover >= static_cast<std::size_t>(opt.max_truncation)) throw;
      cover = std::min<std::size_t>(2 * cover, static_cast<std::size_t>(opt.max_truncation));
    }
  }
}

void cmd_voronoi3(const Args& a, Result& res) {
  const i64 q = a.positive("q"), x = a.integer("a");
  const double X = a.positive_real("X"), H = a.real("H");
  res.inputs = {{"q", q}, {"a", x}, {"X", X}, {"H", H}};
  Gl3Options opt;
  opt.tol = a.tol("tol");
  const ModulatedWindow f{SmoothWindow::w_shape(H), X, 0.0, 1.0};
  const auto P = fit_main_term(q, fit_family_for(q), 1, opt);
  const auto r = verify_gl3(q, x, f, P, opt);
  res.outputs = report_json(r);
  res.outputs["main_term"] = cjson(r.main_term);
  res.outputs["main_term_poly"] = poly_json(P);
  json conv = json::array();
  for (const auto& c : r.conventions) conv.push_back({{"convention", c.convention}, {"rel_diff", c.rel_diff}});
  res.outputs["conventions"] = conv;
  res.truncations = {{"N", r.truncation}};
}

ModulusFamily family_from(const Args& a, const Rational* fallback) {
  const double Q1 = a.positive_real("Q1"), Q2 = a.positive_real("Q2");
  const i64 r = a.positive("r");
  std::optional<Rational> delta;
  if (a.has("delta")) {
    delta = a.rational("delta");
  } else if (fallback != nullptr) {
    delta = *fallback;
  }
  return build_modulus_family(Q1, Q2, r, delta);
}

json family_json(const ModulusFamily& fam) {
  return json{{"Q1", fam.Q1},         {"Q2", fam.Q2},
              {"r", fam.r},           {"Q1_list", fam.Q1_list},
              {"Q2_list", fam.Q2_list}, {"moduli", fam.products},
              {"delta", fam.delta.str()}, {"L", fam.L}};
}

void cmd_jutila(const Args& a, Result& res) {
  const auto fam = family_from(a, nullptr);
  const i64 samples = a.integer("samples");
  if (samples < 0) throw InvalidArgument("samples must be nonnegative");
  res.inputs = {{"Q1", fam.Q1}, {"Q2", fam.Q2}, {"r", fam.r}, {"samples", samples}, {"seed", a.integer("seed")}};
  res.outputs["family"] = family_json(fam);
  const auto d = l2_discrepancy(fam);
  res.outputs["mass"] = d.mass.str();
  res.outputs["mass_is_one"] = d.mass == 1;
  res.outputs["discrepancy"] = d.value;
  res.outputs["discrepancy_exact"] = d.exact.str();
  res.outputs["breakpoints"] = d.breakpoints;
  res.outputs["pieces"] = d.pieces;
  res.outputs["bound_scale"] = d.bound_scale;
  res.outputs["ratio"] = d.ratio;
  if (samples > 0) {
    const auto mc = monte_carlo_discrepancy(fam, static_cast<std::size_t>(samples),
                                            static_cast<std::uint64_t>(a.integer("seed")));
    res.outputs["monte_carlo"] = {{"mean", mc.mean}, {"standard_error", mc.standard_error}, {"samples", mc.samples}};
  }
}

void cmd_dtilde(const Args& a, Result& res) {
  const double X = a.positive_real("X"), H = a.real("H");
  const i64 r = a.positive("r");
  const Rational fallback(1, static_cast<i64>(std::llround(static_cast<double>(r) * X)));
  const auto fam = family_from(a, &fallback);
  res.inputs = {{"Q1", fam.Q1}, {"Q2", fam.Q2}, {"r", r}, {"X", X}, {"H", H}, {"delta", fam.delta.str()}};
  res.outputs["family"] = family_json(fam);
  const double Y = static_cast<double>(r) * X;
  const auto tables = load_tables(static_cast<std::size_t>(std::ceil(3.0 * Y)) + 1,
                                  static_cast<std::size_t>(std::ceil(3.0 * X)) + 1);
  if (a.has("alpha")) {
    const double alpha = a.real("alpha");
    res.inputs["alpha"] = alpha;
    res.outputs["d_tilde_alpha"] = cjson(d_tilde_alpha(fam, alpha, *tables, X, r, H));
    return;
  }
  const i64 points = a.positive("points");
  res.inputs["points"] = points;
  const auto dt = d_tilde(fam, *tables, X, r, H, static_cast<int>(points), a.tol("quadrature"));
  const auto D = d_smooth(X, r, H, *tables);
  res.outputs["d_tilde"] = cjson(dt.value);
  res.outputs["d_tilde_coarse"] = cjson(dt.coarse);
  res.outputs["quadrature_change"] = dt.change;
  res.outputs["d_smooth"] = D.value.real();
  res.outputs["abs_error"] = std::abs(D.value - dt.value);
  res.truncations = {{"points", 2 * points}};
}

void cmd_decompose(const Args& a, Result& res) {
  const double X = a.positive_real("X"), H = a.real("H");
  const i64 r = a.positive("r");
  const Rational fallback(1, static_cast<i64>(std::llround(static_cast<double>(r) * X)));
  const auto fam = family_from(a, &fallback);
  const double alpha = a.real("alpha");
  res.inputs = {{"Q1", fam.Q1}, {"Q2", fam.Q2}, {"r", r}, {"X", X}, {"H", H}, {"delta", fam.delta.str()}, {"alpha", alpha}};
  DecomposeOptions opt;
  opt.tol = a.tol("tol");
  if (a.has("M")) opt.M = a.positive("M");
  if (a.has("N")) opt.N = a.positive("N");
  const double Y = static_cast<double>(r) * X;
  std::size_t cover = static_cast<std::size_t>(std::ceil(3.0 * Y)) + 1;
  if (opt.M) cover = std::max(cover, static_cast<std::size_t>(*opt.M));
  Decomposition d;
  for (;;) {
    try {
      const auto tables = load_tables(cover, static_cast<std::size_t>(std::ceil(3.0 * X)) + 1);
      d = decompose_d_tilde_alpha(fam, alpha, X, r, H, tables, ContourSpec{}, opt);
      break;
    } catch (const OutOfRange&) {
      if (cover >= static_cast<std::size_t>(opt.max_M)) throw;
      cover = std::min<std::size_t>(4 * cover, static_cast<std::size_t>(opt.max_M));
    }
  }
  res.outputs["family"] = family_json(fam);
  res.outputs["direct"] = cjson(d.direct);
  res.outputs["transformed"] = cjson(d.transformed);
  res.outputs["d0_part"] = cjson(d.d0_part);
  res.outputs["d1_part"] = cjson(d.d1_part);
  res.outputs["d_minus_part"] = cjson(d.d_minus_part);
  res.outputs["residual"] = d.residual;
  res.outputs["zero_frequency_display"] = cjson(d.zero_frequency_display);
  res.outputs["zero_frequency_display_rel"] = d.zero_frequency_display_rel;
  res.outputs["plus_display_ratio"] = cjson(d.plus_display_ratio);
  res.outputs["plus_display_coprime_ratio"] = cjson(d.plus_display_coprime_ratio);
  res.outputs["plus_identity_ratio"] = cjson(d.plus_identity_ratio);
  json polys = json::array();
  for (const auto& P : d.main_terms) polys.push_back(poly_json(P));
  res.outputs["main_term_polys"] = polys;
  res.truncations = {{"M_base", d.M_base}, {"N_base", d.N_base}, {"moduli", d.moduli}, {"M", d.M_used}, {"N", d.N_used}};
}

void cmd_psi(const Args& a, Result& res) {
  const double x = a.positive_real("x");
  const i64 r = a.positive("r");
  res.inputs = {{"x", x}, {"r", r}};
  const auto n = static_cast<std::size_t>(std::floor(x));
  const auto tables = load_tables(std::max<std::size_t>(static_cast<std::size_t>(r) * n, 1), n);
  const auto rep = psi_direct(x, r, *tables);
  res.outputs = {{"psi", rep.value.real()}, {"error_estimate", rep.error_estimate}};
  res.truncations = {{"n_max", rep.truncations.at("n_max")}};
}

void cmd_scan(const Args& a, Result& res) {
  const double lo = a.positive_real("x_lo"), hi = a.positive_real("x_hi");
  const i64 count = a.positive("count"), r = a.positive("r");
  const std::string coeff = a.text("coefficients");
  if (coeff != "tau0" && coeff != "ones") throw InvalidArgument("coefficients must be tau0 or ones");
  const bool majorant = a.integer("majorant") != 0;
  res.inputs = {{"x_lo", lo}, {"x_hi", hi}, {"count", count}, {"r", r}, {"coefficients", coeff}, {"majorant", majorant}};
  const auto grid = geometric_grid(lo, hi, static_cast<std::size_t>(count));
  const auto n = static_cast<std::size_t>(std::floor(hi));
  const auto tables = load_tables(coeff == "tau0" ? static_cast<std::size_t>(r) * n : 1, n);
  const auto rep = exponent_scan(grid, r, *tables, coeff == "tau0" ? ScanCoefficients::tau0 : ScanCoefficients::ones, majorant);
  res.outputs = {{"slope", rep.slope}, {"warnings", rep.warnings}};
  res.columns = {"x", "log_x", "psi", "log_abs_psi"};
  if (majorant) res.columns.push_back("majorant");
  for (const auto& p : rep.points) {
    std::vector<json> row{p.x, p.log_x, p.psi, p.log_abs_psi};
    if (majorant) row.push_back(p.majorant);
    res.rows.push_back(std::move(row));
  }
}

void cmd_params(const Args& a, Result& res) {
  const double X = a.real("X");
  const i64 r = a.positive("r");
  res.inputs = {{"X", X}, {"r", r}};
  const auto p = choose_parameters(X, r);
  res.outputs = {{"X", p.X},
                 {"r", p.r},
                 {"exponent_delta", p.exponent_delta},
                 {"H", p.H},
                 {"interval_halfwidth", p.interval_halfwidth},
                 {"Q", p.Q},
                 {"Q1", p.Q1},
                 {"Q2", p.Q2},
                 {"degenerate", p.degenerate},
                 {"out_of_range", p.out_of_range}};
}

std::string cell(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_structured()) return cell(json(v.dump()));
  return v.dump();
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out.emplace_back(prefix, j);
  }
}

void write_csv(std::ostream& os, const RunConfig& cfg, const Result& res, double wall) {
  os << "# schema_version=" << kSchemaVersion << "\n";
  os << "# command=" << cfg.command << "\n";
  os << "# build_id=" << kBuildId << "\n";
  std::vector<std::pair<std::string, json>> meta;
  flatten(res.inputs, "input", meta);
  for (const auto& [k, v] : cfg.tolerances) meta.emplace_back("tolerance." + k, v);
  flatten(res.truncations, "truncation", meta);
  if (!res.columns.empty()) {
    flatten(res.outputs, "output", meta);
    for (const auto& [k, v] : meta) os << "# " << k << "=" << cell(v) << "\n";
    for (std::size_t i = 0; i < res.columns.size(); ++i) os << (i ? "," : "") << res.columns[i];
    os << "\n";
    for (const auto& row : res.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
      os << "\n";
    }
  } else {
    std::vector<std::pair<std::string, json>> cols = meta;
    flatten(res.outputs, "output", cols);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].first;
    os << "\n";
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cell(cols[i].second);
    os << "\n";
  }
  os << "# wall_time_s=" << json(wall).dump() << "\n";
}

void write_json(std::ostream& os, const RunConfig& cfg, const Result& res, double wall) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = cfg.command;
  doc["build_id"] = kBuildId;
  doc["inputs"] = res.inputs;
  json tol = json::object();
  for (const auto& [k, v] : cfg.tolerances) tol[k] = v;
  doc["tolerances"] = tol;
  doc["outputs"] = res.outputs;
  doc["truncations"] = res.truncations;
  if (!res.columns.empty()) {
    json rows = json::array();
    for (const auto& row : res.rows) {
      json o = json::object();
      for (std::size_t i = 0; i < row.size(); ++i) o[res.columns[i]] = row[i];
      rows.push_back(o);
    }
    doc["rows"] = rows;
  }
  doc["wall_time_s"] = wall;
  os << doc.dump(2) << "\n";
}

}  // namespace

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> c = make_commands();
  return c;
}

const CommandSpec& command_spec(const std::string& name) {
  for (const auto& c : commands()) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("unknown command '" + name + "'");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

RunConfig parse_command_line(int argc, const char* const* argv) {
  CLI::App app{"Shifted convolution sums of d3 and tau: sieves, character sums, Voronoi identities, circle method"};
  app.require_subcommand(1);
  struct Slot {
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> opts;
    std::vector<std::string> tols;
    CLI::Option* tol_opt = nullptr;
    std::string config, output, format;
    unsigned threads = 1;
    CLI::Option *config_opt = nullptr, *output_opt = nullptr, *format_opt = nullptr, *threads_opt = nullptr;
  };
  std::vector<std::unique_ptr<Slot>> slots;
  for (const auto& spec : commands()) {
    auto s = std::make_unique<Slot>();
    s->sub = app.add_subcommand(spec.name, spec.help);
    for (const auto& p : spec.params) {
      auto& v = s->values[p.name];
      std::string help = p.help;
      if (!p.default_value.empty()) help += (help.empty() ? "" : " ") + std::string("[default ") + p.default_value + "]";
      s->opts[p.name] = s->sub->add_option("--" + p.name, v, help)->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
    std::string tol_help = "tolerance override NAME=VALUE";
    for (const auto& [k, d] : spec.tolerances) tol_help += "; " + k + " (default " + json(d).dump() + ")";
    s->tol_opt = s->sub->add_option("--tol", s->tols, tol_help);
    s->config_opt = s->sub->add_option("--config", s->config, "key=value file; flags take precedence");
    s->output_opt = s->sub->add_option("--output", s->output, "output file (stdout when omitted)");
    s->format_opt = s->sub->add_option("--format", s->format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->threads_opt = s->sub->add_option("--threads", s->threads, "worker threads")->check(CLI::Range(1u, 256u));
    slots.push_back(std::move(s));
  }
  app.parse(argc, argv);

  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& s = *slots[i];
    if (!s.sub->parsed()) continue;
    const auto& spec = commands()[i];
    RunConfig cfg;
    cfg.command = spec.name;
    cfg.format = spec.default_format;
    std::map<std::string, std::string> file;
    if (s.config_opt->count() > 0) file = read_config_file(s.config);
    auto from_file = [&](const std::string& key) -> const std::string* {
      const auto it = file.find(key);
      return it == file.end() ? nullptr : &it->second;
    };
    for (const auto& [k, v] : file) {
      const bool known_param = s.values.count(k) > 0;
      const bool known_tol = k.rfind("tol.", 0) == 0 &&
                             std::any_of(spec.tolerances.begin(), spec.tolerances.end(),
                                         [&](const auto& t) { return "tol." + t.first == k; });
      const bool known_global = k == "output" || k == "format" || k == "threads";
      if (!known_param && !known_tol && !known_global) {
        throw InvalidArgument("unknown config key '" + k + "' for command " + spec.name);
      }
    }
    for (const auto& p : spec.params) {
      std::string v = p.default_value;
      if (s.opts[p.name]->count() > 0) {
        v = s.values[p.name];
      } else if (const auto* f = from_file(p.name)) {
        v = *f;
      }
      cfg.params[p.name] = v;
    }
    for (const auto& [k, d] : spec.tolerances) {
      cfg.tolerances[k] = d;
      if (const auto* f = from_file("tol." + k)) cfg.tolerances[k] = parse_real("tol." + k, *f);
    }
    for (const auto& t : s.tols) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw InvalidArgument("--tol expects NAME=VALUE, got '" + t + "'");
      const std::string name = trim(t.substr(0, eq));
      if (cfg.tolerances.count(name) == 0) {
        throw InvalidArgument("unknown tolerance '" + name + "' for command " + spec.name);
      }
      cfg.tolerances[name] = parse_real("--tol " + name, t.substr(eq + 1));
    }
    for (const auto& [k, v] : cfg.tolerances) {
      if (!(v > 0.0)) throw InvalidArgument("tolerance " + k + " must be positive");
    }
    std::string fmt = s.format_opt->count() > 0 ? s.format : (from_file("format") ? *from_file("format") : "");
    if (!fmt.empty()) {
      if (fmt != "csv" && fmt != "json") throw InvalidArgument("format must be csv or json");
      cfg.format = fmt == "csv" ? Format::csv : Format::json;
    }
    if (s.output_opt->count() > 0) {
      cfg.output_path = s.output;
    } else if (const auto* f = from_file("output")) {
      cfg.output_path = *f;
    }
    if (s.threads_opt->count() > 0) {
      cfg.threads = s.threads;
    } else if (const auto* f = from_file("threads")) {
      const i64 t = parse_int("threads", *f);
      if (t < 1 || t > 256) throw InvalidArgument("threads must lie in [1, 256]");
      cfg.threads = static_cast<unsigned>(t);
    }
    return cfg;
  }
  throw InvalidArgument("no command given");
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  Result res;
  try {
    command_spec(config.command);
    set_thread_count(config.threads);
    const Args a(config);
    const std::string& c = config.command;
    if (c == "sieve") cmd_sieve(a, res);
    else if (c == "tau") cmd_tau(a, res);
    else if (c == "kloosterman") cmd_kloosterman(a, res);
    else if (c == "charsum") cmd_charsum(a, res);
    else if (c == "voronoi2") cmd_voronoi2(a, res);
    else if (c == "voronoi3") cmd_voronoi3(a, res);
    else if (c == "jutila") cmd_jutila(a, res);
    else if (c == "dtilde") cmd_dtilde(a, res);
    else if (c == "decompose") cmd_decompose(a, res);
    else if (c == "psi") cmd_psi(a, res);
    else if (c == "scan") cmd_scan(a, res);
    else if (c == "params") cmd_params(a, res);
  } catch (const AccuracyError& e) {
    err << "accuracy error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateFamily& e) {
    err << "degenerate family: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream buf;
  if (config.format == Format::csv) {
    write_csv(buf, config, res, wall);
  } else {
    write_json(buf, config, res, wall);
  }
  if (config.output_path) {
    std::ofstream f(*config.output_path, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << *config.output_path << "\n";
      return 1;
    }
    f << buf.str();
  } else {
    out << buf.str();
  }
  return 0;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_command_line(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << "usage: shiftconv <command> [--option value ...]\ncommands:\n";
    for (const auto& c : commands()) {
      out << "  " << c.name << "  " << c.help << "\n";
      for (const auto& p : c.params) {
        out << "      --" << p.name;
        if (!p.default_value.empty()) out << " [" << p.default_value << "]";
        if (!p.help.empty()) out << "  " << p.help;
        out << "\n";
      }
      for (const auto& [k, d] : c.tolerances) out << "      --tol " << k << "=VALUE [" << json(d).dump() << "]\n";
    }
    out << "common: --format csv|json --output FILE --threads N --config FILE\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return run(cfg, out, err);
}

}  // namespace shiftconv::cli
