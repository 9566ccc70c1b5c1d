#include "multisym/theory.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "multisym/error.hpp"

namespace multisym {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw InputError(path + ": " + what); }

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) fail(path, "missing field '" + key + "'");
  return j.at(key);
}

int positive_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long>() < 1) fail(path, "expected a positive integer");
  return j.get<int>();
}

Expr expression(const Json& j, const Chart& chart, const std::string& path) {
  if (!j.is_string()) fail(path, "expected an expression string");
  try {
    return parse(j.get<std::string>(), chart);
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

std::vector<Expr> expressions(const Json& j, const Chart& chart, std::size_t count, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of expression strings");
  if (j.size() != count) fail(path, "expected " + std::to_string(count) + " entries, got " + std::to_string(j.size()));
  std::vector<Expr> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(expression(j[i], chart, path + "[" + std::to_string(i) + "]"));
  return out;
}

// A number, or a constant expression that may use pi.
double constant(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) fail(path, "expected a number");
  const Symbol pi = Symbol::auxiliary("pi");
  try {
    const std::vector<Symbol> allowed{pi};
    const Expr e = parse(j.get<std::string>(), allowed);
    return evaluate(e, Point{{pi, M_PI}});
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

std::vector<double> constants(const Json& j, std::size_t count, const std::string& path) {
  if (!j.is_array() || j.size() != count) fail(path, "expected an array of " + std::to_string(count) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(constant(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void only_keys(const Json& j, const std::set<std::string>& keys, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.contains(k)) fail(path, "unknown field '" + k + "'");
  }
}

}  // namespace

TheorySpec parse_spec(const Json& j) {
  const std::string root = "theory";
  only_keys(j, {"name", "description", "m", "N", "lagrangian", "hamiltonian", "hamiltonian_chart", "connection", "sections",
                "grid", "initial_data", "flags", "dimension_checks"},
            root);
  TheorySpec s;
  const Json& name = require(j, "name", root);
  if (!name.is_string()) fail(root + ".name", "expected a string");
  s.name = name.get<std::string>();
  const int m = positive_int(require(j, "m", root), root + ".m");
  const int n = positive_int(require(j, "N", root), root + ".N");
  s.bundle = BundleSpec::make(m, n);
  const Chart base(ChartKind::M, m, n);
  const auto count = static_cast<std::size_t>(n);

  if (j.contains("lagrangian")) {
    s.lagrangian = expression(j["lagrangian"], s.bundle.chart(ChartKind::J1E), root + ".lagrangian");
  }
  if (j.contains("hamiltonian_chart")) {
    const Json& k = j["hamiltonian_chart"];
    if (k == "Pi") {
      s.hamiltonian_chart = ChartKind::Pi;
    } else if (k == "J1PiStar") {
      s.hamiltonian_chart = ChartKind::J1PiStar;
    } else {
      fail(root + ".hamiltonian_chart", "expected \"Pi\" or \"J1PiStar\"");
    }
  }
  if (j.contains("hamiltonian")) {
    s.hamiltonian = expression(j["hamiltonian"], s.bundle.chart(s.hamiltonian_chart), root + ".hamiltonian");
  }
  if (!s.lagrangian && !s.hamiltonian) fail(root, "needs a lagrangian or a hamiltonian");

  if (j.contains("connection")) {
    // Parsed on the jet chart so that velocity dependence is reported by the connection check.
    auto g = expressions(j["connection"], s.bundle.chart(ChartKind::J1E), static_cast<std::size_t>(m * n),
                         root + ".connection");
    try {
      s.connection = make_connection(m, n, std::move(g));
    } catch (const InputError& e) {
      fail(root + ".connection", e.what());
    }
  }

  if (j.contains("sections")) {
    const Json& secs = j["sections"];
    if (!secs.is_object()) fail(root + ".sections", "expected an object of named sections");
    for (const auto& [key, val] : secs.items()) {
      const std::string path = root + ".sections." + key;
      only_keys(val, {"y", "p"}, path);
      SectionSpec sec{key, expressions(require(val, "y", path), base, count, path + ".y"), {}};
      if (val.contains("p")) sec.p = expressions(val["p"], base, static_cast<std::size_t>(m * n), path + ".p");
      s.sections.push_back(std::move(sec));
    }
  }

  if (j.contains("grid")) {
    const std::string path = root + ".grid";
    const Json& g = j["grid"];
    only_keys(g, {"lower", "upper", "shape", "periodic"}, path);
    const auto dims = static_cast<std::size_t>(m);
    auto lower = constants(require(g, "lower", path), dims, path + ".lower");
    auto upper = constants(require(g, "upper", path), dims, path + ".upper");
    const Json& sh = require(g, "shape", path);
    if (!sh.is_array() || sh.size() != dims) fail(path + ".shape", "expected " + std::to_string(m) + " integers");
    std::vector<int> shape;
    for (std::size_t i = 0; i < dims; ++i) shape.push_back(positive_int(sh[i], path + ".shape[" + std::to_string(i) + "]"));
    std::vector<bool> periodic(dims, false);
    if (g.contains("periodic")) {
      const Json& p = g["periodic"];
      if (!p.is_array() || p.size() != dims) fail(path + ".periodic", "expected " + std::to_string(m) + " booleans");
      for (std::size_t i = 0; i < dims; ++i) {
        if (!p[i].is_boolean()) fail(path + ".periodic[" + std::to_string(i) + "]", "expected a boolean");
        periodic[i] = p[i].get<bool>();
      }
    }
    try {
      s.grid = Grid(std::move(lower), std::move(upper), std::move(shape), std::move(periodic));
    } catch (const InputError& e) {
      fail(path, e.what());
    }
  }

  if (j.contains("initial_data")) {
    const std::string path = root + ".initial_data";
    const Json& d = j["initial_data"];
    only_keys(d, {"y", "rate", "momentum"}, path);
    InitialData data;
    data.y = expressions(require(d, "y", path), base, count, path + ".y");
    if (d.contains("rate")) data.rate = expressions(d["rate"], base, count, path + ".rate");
    if (d.contains("momentum")) s.initial_momentum = expressions(d["momentum"], base, count, path + ".momentum");
    if (data.rate.empty() && s.initial_momentum.empty()) fail(path, "needs 'rate' or 'momentum'");
    s.initial_data = std::move(data);
  }

  if (j.contains("flags")) {
    const std::string path = root + ".flags";
    const Json& f = j["flags"];
    only_keys(f, {"hyperregular"}, path);
    if (f.contains("hyperregular")) {
      if (!f["hyperregular"].is_boolean()) fail(path + ".hyperregular", "expected a boolean");
      s.assert_hyperregular = f["hyperregular"].get<bool>();
    }
  }

  if (j.contains("dimension_checks")) {
    const Json& d = j["dimension_checks"];
    if (!d.is_array()) fail(root + ".dimension_checks", "expected an array of integers");
    for (std::size_t i = 0; i < d.size(); ++i) {
      s.dimension_checks.push_back(positive_int(d[i], root + ".dimension_checks[" + std::to_string(i) + "]"));
    }
  }
  return s;
}

TheorySpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  return parse_spec(j);
}

std::vector<int> parse_grid_shape(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('x', start), text.size());
    const std::string part = text.substr(start, end - start);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw InputError("grid shape must look like 64x200, got '" + text + "'");
    }
    out.push_back(std::stoi(part));
    start = end + 1;
  }
  return out;
}

}  // namespace multisym
