#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "multisym/error.hpp"
#include "multisym/latex.hpp"
#include "multisym/theory.hpp"

namespace py = pybind11;
using namespace multisym;

namespace {

Symbol symbol_named(const std::string& name) {
  const auto syms = parse(name).symbols();
  if (syms.size() != 1 || parse(name) != Expr::symbol(*syms.begin())) {
    throw InputError("'" + name + "' is not a single symbol");
  }
  return *syms.begin();
}

ChartKind kind_named(const std::string& name) {
  for (ChartKind k : {ChartKind::M, ChartKind::E, ChartKind::J1E, ChartKind::J1Estar, ChartKind::Pi, ChartKind::MPi,
                      ChartKind::J1PiStar}) {
    if (chart_kind_name(k) == name) return k;
  }
  throw InputError("unknown chart kind '" + name + "'");
}

// (report JSON text or None, exit code, error message or None)
py::tuple run(const std::string& command, const std::string& path, int samples, std::optional<double> tol, bool latex,
              const std::string& connection, std::optional<std::string> grid) {
  try {
    const TheorySpec spec = load_spec(path);
    RunOptions opt;
    opt.samples = samples;
    opt.tol = tol;
    opt.latex = latex;
    if (connection != "trivial" && connection != "spec") throw InputError("connection must be 'trivial' or 'spec'");
    opt.spec_connection = connection == "spec";
    if (grid) opt.grid_shape = parse_grid_shape(*grid);
    RunResult r;
    {
      py::gil_scoped_release release;
      r = execute(command, spec, opt);
    }
    return py::make_tuple(r.report.dump(), r.exit_code, py::none());
  } catch (const Error& e) {
    return py::make_tuple(py::none(), static_cast<int>(e.code()), std::string(e.what()));
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multisymplectic field theory workbench";
  py::register_exception<Error>(m, "MultisymError", PyExc_ValueError);

  py::class_<Expr>(m, "Expr")
      .def("__str__", &Expr::str)
      .def("__repr__", [](const Expr& e) { return "Expr('" + e.str() + "')"; })
      .def("__eq__", [](const Expr& a, const Expr& b) { return a == b; })
      .def("__hash__", [](const Expr& e) { return py::hash(py::str(e.str())); })
      .def("__add__", [](const Expr& a, const Expr& b) { return a + b; })
      .def("__sub__", [](const Expr& a, const Expr& b) { return a - b; })
      .def("__mul__", [](const Expr& a, const Expr& b) { return a * b; })
      .def("__truediv__", [](const Expr& a, const Expr& b) { return a / b; })
      .def("__neg__", [](const Expr& a) { return -a; })
      .def("__pow__", [](const Expr& a, int n) { return a.pow(n); })
      .def("latex", [](const Expr& e) { return latex(e); })
      .def("symbols", [](const Expr& e) {
        std::vector<std::string> out;
        for (const Symbol& s : e.symbols()) out.push_back(s.name());
        return out;
      })
      .def("diff", [](const Expr& e, const std::string& s) { return differentiate(e, symbol_named(s)); })
      .def("subs", [](const Expr& e, const std::map<std::string, Expr>& a) {
        Assignment as;
        for (const auto& [k, v] : a) as.emplace(symbol_named(k), v);
        return substitute(e, as);
      })
      .def("evaluate", [](const Expr& e, const std::map<std::string, double>& p) {
        Point pt;
        for (const auto& [k, v] : p) pt.emplace(symbol_named(k), v);
        return evaluate(e, pt);
      })
      .def("zero_test", [](const Expr& e, int samples) {
        return std::string(verdict_name(is_zero(e, samples).verdict));
      }, py::arg("samples") = 64);

  m.def("parse", [](const std::string& text) { return parse(text); }, py::arg("text"));
  m.def("parse_on", [](const std::string& text, const std::string& kind, int mm, int n) {
    return parse(text, Chart(kind_named(kind), mm, n));
  }, py::arg("text"), py::arg("chart"), py::arg("m"), py::arg("N"));
  m.def("chart_dimension", [](const std::string& kind, int mm, int n) {
    return chart_dimension(kind_named(kind), mm, n);
  }, py::arg("chart"), py::arg("m"), py::arg("N"));
  m.def("chart_coordinates", [](const std::string& kind, int mm, int n) {
    const Chart chart(kind_named(kind), mm, n);
    std::vector<std::string> out;
    for (const Symbol& s : chart.coordinates()) out.push_back(s.name());
    return out;
  }, py::arg("chart"), py::arg("m"), py::arg("N"));
  m.def("momenta", [](const std::string& lagrangian, int mm, int n) {
    const BundleSpec b = BundleSpec::make(mm, n);
    const LagrangianSystem sys(b, parse(lagrangian, b.chart(ChartKind::J1E)));
    return momenta(sys);
  }, py::arg("lagrangian"), py::arg("m"), py::arg("N"));
  m.def("_run", &run, py::arg("command"), py::arg("theory"), py::arg("samples") = 16, py::arg("tol") = py::none(),
        py::arg("latex") = false, py::arg("connection") = "trivial", py::arg("grid") = py::none());
}
