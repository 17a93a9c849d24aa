#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shiftconv/arith.hpp"
#include "shiftconv/circle.hpp"
#include "shiftconv/convolution.hpp"
#include "shiftconv/errors.hpp"
#include "shiftconv/expsums.hpp"
#include "shiftconv/parallel.hpp"
#include "shiftconv/voronoi.hpp"

namespace py = pybind11;
using namespace shiftconv;

namespace {

Method method_of(const std::string& m) {
  if (m == "naive") return Method::naive;
  if (m == "reduced") return Method::reduced;
  throw InvalidArgument("method must be 'naive' or 'reduced'");
}

py::dict report_dict(const VoronoiReport& r) {
  py::dict d;
  d["lhs"] = r.lhs;
  d["rhs"] = r.rhs;
  d["abs_diff"] = r.abs_diff;
  d["rel_diff"] = r.rel_diff;
  d["truncation"] = r.truncation;
  d["tail_estimate"] = r.tail_estimate;
  return d;
}

Rational to_rational(const py::object& o) {
  // accepts fractions.Fraction, int or a (numerator, denominator) pair
  if (py::hasattr(o, "numerator") && py::hasattr(o, "denominator")) {
    return Rational(o.attr("numerator").cast<i64>(), o.attr("denominator").cast<i64>());
  }
  auto t = o.cast<std::pair<i64, i64>>();
  return Rational(t.first, t.second);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Shifted convolution sums of d3 and normalized tau";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<OutOfRange>(m, "OutOfRange", PyExc_IndexError);
  py::register_exception<AccuracyError>(m, "AccuracyError", PyExc_ArithmeticError);
  py::register_exception<InfeasibleRange>(m, "InfeasibleRange", PyExc_ValueError);
  py::register_exception<DegenerateFamily>(m, "DegenerateFamily", PyExc_ArithmeticError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);

  m.def("set_thread_count", &set_thread_count, py::arg("n"));

  m.def("sieve_d3", &sieve_d3, py::arg("n_max"));
  m.def(
      "compute_tau",
      [](std::size_t n_max) {
        const auto tau = compute_tau(n_max);
        py::list out;
        for (const auto& t : tau) out.append(py::int_(py::str(t.str())));
        return out;
      },
      py::arg("n_max"), "tau(n) for 0 <= n <= n_max as Python ints");

  py::class_<ArithmeticTables, std::shared_ptr<ArithmeticTables>>(m, "ArithmeticTables")
      .def_static(
          "build",
          [](std::size_t tau_max, std::size_t d3_max) {
            return std::const_pointer_cast<ArithmeticTables>(ArithmeticTables::build(tau_max, d3_max));
          },
          py::arg("tau_max"), py::arg("d3_max"))
      .def_property_readonly("tau_max", &ArithmeticTables::tau_max)
      .def_property_readonly("d3_max", &ArithmeticTables::d3_max)
      .def("tau", [](const ArithmeticTables& t, std::size_t n) { return py::int_(py::str(t.tau(n).str())); })
      .def("tau0", &ArithmeticTables::tau0)
      .def("d3", &ArithmeticTables::d3);

  m.def(
      "kloosterman", [](i64 a, i64 b, i64 q) { return kloosterman(a, b, q).value; }, py::arg("a"), py::arg("b"),
      py::arg("q"));
  m.def(
      "d3_charsum",
      [](i64 a, i64 q, i64 n, int sign, const std::string& method) {
        return d3_charsum(a, q, n, sign > 0 ? Sign::plus : Sign::minus, method_of(method)).value;
      },
      py::arg("a"), py::arg("q"), py::arg("n"), py::arg("sign"), py::arg("method") = "reduced");
  m.def(
      "s_star",
      [](i64 mm, i64 n, i64 q, i64 r, const std::string& method) { return s_star(mm, n, q, r, method_of(method)).value; },
      py::arg("m"), py::arg("n"), py::arg("q"), py::arg("r") = 1, py::arg("method") = "reduced");
  m.def(
      "s_dagger",
      [](i64 mm, i64 n, i64 q, i64 r, const std::string& method) { return s_dagger(mm, n, q, r, method_of(method)).value; },
      py::arg("m"), py::arg("n"), py::arg("q"), py::arg("r") = 1, py::arg("method") = "reduced");
  m.def(
      "s_dagger_prime",
      [](i64 mm, i64 n, i64 q2, i64 q1, i64 r, const std::string& method) {
        return s_dagger_prime(mm, n, q2, q1, r, method_of(method)).value;
      },
      py::arg("m"), py::arg("n"), py::arg("q2"), py::arg("q1"), py::arg("r") = 1, py::arg("method") = "reduced");

  m.def(
      "verify_gl2",
      [](std::shared_ptr<ArithmeticTables> t, i64 q, i64 a, double Y, double tol) {
        Gl2Options o;
        o.tol = tol;
        const ModulatedWindow g{SmoothWindow::v_shape(), Y, 0.0, 1.0};
        return report_dict(verify_gl2(t, q, a, g, o));
      },
      py::arg("tables"), py::arg("q"), py::arg("a"), py::arg("Y"), py::arg("tol") = 1e-6);
  m.def(
      "verify_gl3",
      [](i64 q, i64 a, double X, double H, double tol) {
        Gl3Options o;
        o.tol = tol;
        const ModulatedWindow f{SmoothWindow::w_shape(H), X, 0.0, 1.0};
        const auto P = fit_main_term(q, fit_family_for(q), 1, o);
        auto d = report_dict(verify_gl3(q, a, f, P, o));
        d["main_term_coefficients"] = std::vector<double>{P.A0, P.A1, P.A2};
        return d;
      },
      py::arg("q"), py::arg("a"), py::arg("X"), py::arg("H") = 5.0, py::arg("tol") = 1e-4);

  py::class_<ModulusFamily>(m, "ModulusFamily")
      .def_readonly("r", &ModulusFamily::r)
      .def_readonly("Q1_list", &ModulusFamily::Q1_list)
      .def_readonly("Q2_list", &ModulusFamily::Q2_list)
      .def_readonly("products", &ModulusFamily::products)
      .def_readonly("L", &ModulusFamily::L)
      .def_property_readonly("delta", &ModulusFamily::delta_value)
      .def_property_readonly("Q", &ModulusFamily::Q);
  m.def(
      "build_modulus_family",
      [](double Q1, double Q2, i64 r, const py::object& delta) {
        std::optional<Rational> d;
        if (!delta.is_none()) d = to_rational(delta);
        return build_modulus_family(Q1, Q2, r, d);
      },
      py::arg("Q1"), py::arg("Q2"), py::arg("r") = 1, py::arg("delta") = py::none());
  m.def("i_tilde", &i_tilde, py::arg("family"), py::arg("x"));
  m.def(
      "l2_discrepancy",
      [](const ModulusFamily& fam) {
        const auto d = l2_discrepancy(fam);
        py::dict out;
        out["value"] = d.value;
        out["mass_is_one"] = d.mass == 1;
        out["pieces"] = d.pieces;
        out["ratio"] = d.ratio;
        return out;
      },
      py::arg("family"));
  m.def(
      "d_tilde_alpha",
      [](const ModulusFamily& fam, double alpha, const ArithmeticTables& t, double X, i64 r, double H) {
        return d_tilde_alpha(fam, alpha, t, X, r, H);
      },
      py::arg("family"), py::arg("alpha"), py::arg("tables"), py::arg("X"), py::arg("r") = 1, py::arg("H") = 5.0);
  m.def(
      "d_tilde",
      [](const ModulusFamily& fam, const ArithmeticTables& t, double X, i64 r, double H, int points) {
        return d_tilde(fam, t, X, r, H, points).value;
      },
      py::arg("family"), py::arg("tables"), py::arg("X"), py::arg("r") = 1, py::arg("H") = 5.0,
      py::arg("points") = 17);

  m.def(
      "psi_direct", [](double x, i64 r, const ArithmeticTables& t) { return psi_direct(x, r, t).value.real(); },
      py::arg("x"), py::arg("r"), py::arg("tables"));
  m.def(
      "d_smooth",
      [](double X, i64 r, double H, const ArithmeticTables& t) { return d_smooth(X, r, H, t).value.real(); },
      py::arg("X"), py::arg("r"), py::arg("H"), py::arg("tables"));
  m.def(
      "choose_parameters",
      [](double X, i64 r) {
        const auto p = choose_parameters(X, r);
        py::dict d;
        d["X"] = p.X;
        d["r"] = p.r;
        d["exponent_delta"] = p.exponent_delta;
        d["H"] = p.H;
        d["interval_halfwidth"] = p.interval_halfwidth;
        d["Q"] = p.Q;
        d["Q1"] = p.Q1;
        d["Q2"] = p.Q2;
        d["degenerate"] = p.degenerate;
        d["out_of_range"] = p.out_of_range;
        return d;
      },
      py::arg("X"), py::arg("r") = 1);
}
