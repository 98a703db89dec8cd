#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "perdde/commands.hpp"
#include "perdde/error.hpp"

namespace py = pybind11;
using namespace perdde;

namespace {

LinearPair make_pair(const Mat& A, const Mat& B, double tau, double period) {
  LinearPair lp{A, B, tau, period};
  lp.validate();
  return lp;
}

CommandOptions make_options(const std::string& out_dir, std::optional<std::uint64_t> seed,
                            std::optional<int> threads, bool force) {
  CommandOptions o;
  o.out_dir = out_dir;
  o.seed = seed;
  o.threads = threads;
  o.force = force;
  return o;
}

}  // namespace

PYBIND11_MODULE(_perdde, m) {
  m.doc() = "Periodic solutions of forced delay differential equations";

  static py::exception<Error> error_type(m, "PerddeError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.attr("__version__") = kVersion;
  m.attr("SCHEMA_VERSION") = kSchemaVersion;

  py::class_<TrigPoly>(m, "TrigPoly")
      .def(py::init<int, double, int>(), py::arg("dim"), py::arg("period"), py::arg("degree"))
      .def(py::init<int, double, int, Vec>(), py::arg("dim"), py::arg("period"), py::arg("degree"), py::arg("coeffs"))
      .def_property_readonly("dim", &TrigPoly::dim)
      .def_property_readonly("period", &TrigPoly::period)
      .def_property_readonly("degree", &TrigPoly::degree)
      .def_property(
          "coeffs", [](const TrigPoly& u) { return u.coeffs(); },
          [](TrigPoly& u, const Vec& c) {
            if (c.size() != u.size()) throw Error(ErrorCode::Precondition, "coefficient vector has the wrong length");
            u.coeffs() = c;
          })
      .def("__call__", [](const TrigPoly& u, double t) { return u(t); }, py::arg("t"))
      .def("lambda_", &TrigPoly::lambda, py::arg("k"))
      .def("with_degree", &TrigPoly::with_degree, py::arg("degree"))
      .def("derivative", [](const TrigPoly& u) { return derivative(u); })
      .def("delay_shift", [](const TrigPoly& u, double tau) { return delay_shift(u, tau); }, py::arg("tau"))
      .def("sup_norm", [](const TrigPoly& u, int m) { return sup_norm(u, m); }, py::arg("m"))
      .def("__add__", [](const TrigPoly& a, const TrigPoly& b) { return a + b; })
      .def("__sub__", [](const TrigPoly& a, const TrigPoly& b) { return a - b; })
      .def("__rmul__", [](const TrigPoly& a, double s) { return s * a; })
      .def("__mul__", [](const TrigPoly& a, double s) { return s * a; });

  m.def("lambda_k", &lambda_k, py::arg("k"), py::arg("period"));
  m.def("collocation_size", &collocation_size, py::arg("degree"));
  m.def("sample", &sample, py::arg("u"), py::arg("m"));
  m.def("project", &project, py::arg("samples"), py::arg("period"), py::arg("degree"));

  m.def(
      "block_pair",
      [](const Mat& A, const Mat& B, double tau, double period, int k) {
        const BlockPair bp = block_pair(make_pair(A, B, tau, period), k);
        py::dict d;
        d["k"] = bp.k;
        d["X"] = bp.X;
        d["Y"] = bp.Y;
        d["h"] = bp.h;
        d["Mk"] = bp.Mk;
        d["normalized_h"] = bp.normalized_h();
        return d;
      },
      py::arg("A"), py::arg("B"), py::arg("tau"), py::arg("period"), py::arg("k"));

  m.def(
      "nonresonance_test",
      [](const Mat& A, const Mat& B, double tau, double period, int chi) {
        return certificate_json(nonresonance_test(make_pair(A, B, tau, period), chi)).dump();
      },
      py::arg("A"), py::arg("B"), py::arg("tau"), py::arg("period"), py::arg("chi") = 1);

  m.def(
      "small_delay_eigentest",
      [](const Mat& M, double period) {
        const EigenTestResult r = small_delay_eigentest(M, period);
        return py::make_tuple(r.pass, r.offending_k);
      },
      py::arg("M"), py::arg("period"));

  m.def("sign_of_det", &sign_of_det, py::arg("M"));

  m.def(
      "monodromy",
      [](const Mat& A, const Mat& B, double tau, double period, int m_nodes) {
        py::gil_scoped_release release;
        return monodromy(make_pair(A, B, tau, period), m_nodes);
      },
      py::arg("A"), py::arg("B"), py::arg("tau"), py::arg("period"), py::arg("m"));

  m.def(
      "floquet_report",
      [](const Mat& A, const Mat& B, double tau, double period, int m_nodes) {
        FloquetReport r;
        {
          py::gil_scoped_release release;
          r = floquet_report(make_pair(A, B, tau, period), m_nodes);
        }
        return floquet_json(r).dump();
      },
      py::arg("A"), py::arg("B"), py::arg("tau"), py::arg("period"), py::arg("m"));

  m.def(
      "ode_poincare_degree",
      [](const Mat& M, double period) {
        const OdeDegree d = ode_poincare_degree(M, period);
        py::dict out;
        out["sign"] = d.sign;
        out["expected"] = d.expected;
        out["consistent"] = d.consistent;
        out["determinant"] = d.determinant;
        return out;
      },
      py::arg("M"), py::arg("period"));

  m.def("command_names", &command_names);

  m.def(
      "run_command",
      [](const std::string& command, const std::string& config, const std::string& out_dir,
         std::optional<std::uint64_t> seed, std::optional<int> threads, bool force) {
        nlohmann::json cfg;
        try {
          cfg = nlohmann::json::parse(config);
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorCode::ConfigInvalid, e.what());
        }
        CommandResult r;
        {
          py::gil_scoped_release release;
          r = run_command(command, cfg, make_options(out_dir, seed, threads, force));
        }
        return py::make_tuple(r.exit_code, r.headline, r.report.dump(), r.files);
      },
      py::arg("command"), py::arg("config"), py::arg("out_dir") = "", py::arg("seed") = std::nullopt,
      py::arg("threads") = std::nullopt, py::arg("force") = false);
}
