#include <string>

#include "doctest.h"
#include "multisym/error.hpp"
#include "multisym/latex.hpp"
#include "multisym/theory.hpp"

using namespace multisym;

namespace {

TheorySpec fixture(const std::string& name) { return load_spec(std::string(MULTISYM_THEORY_DIR) + "/" + name + ".theory.json"); }

std::string input_error(const Json& j) {
  try {
    (void)parse_spec(j);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("cli: bundled fixtures load") {
  const TheorySpec em = fixture("em");
  CHECK(em.bundle.m == 3);
  CHECK(em.bundle.n == 3);
  REQUIRE(em.lagrangian.has_value());
  CHECK(em.connection.has_value());
  for (const char* name : {"free_particle", "scalar_field", "mechanics_dims"}) {
    CHECK_NOTHROW((void)fixture(name));
  }
  const TheorySpec sf = fixture("scalar_field");
  REQUIRE(sf.grid.has_value());
  CHECK(sf.grid->upper()[1] == doctest::Approx(2 * M_PI));
  CHECK(sf.grid->periodic(1));
}

TEST_CASE("cli: schema errors carry field paths") {
  CHECK(input_error(Json{{"name", "t"}, {"m", 1}, {"N", 1}}).find("lagrangian or a hamiltonian") != std::string::npos);
  CHECK(input_error(Json{{"name", "t"}, {"m", 0}, {"N", 1}, {"lagrangian", "0"}}).find("theory.m") != std::string::npos);
  const Json bad_conn{{"name", "t"}, {"m", 1}, {"N", 1}, {"lagrangian", "1/2*v_0_0^2"}, {"connection", {"v_0_0"}}};
  CHECK(input_error(bad_conn).find("theory.connection") != std::string::npos);
  const Json bad_expr{{"name", "t"}, {"m", 1}, {"N", 1}, {"lagrangian", "1/2*v_0_0^"}};
  CHECK(input_error(bad_expr).find("theory.lagrangian") != std::string::npos);
  const Json extra{{"name", "t"}, {"m", 1}, {"N", 1}, {"lagrangian", "0"}, {"colour", "red"}};
  CHECK(input_error(extra).find("unknown field 'colour'") != std::string::npos);
  const Json short_grid{{"name", "t"}, {"m", 2}, {"N", 1}, {"lagrangian", "0"},
                        {"grid", {{"lower", {0}}, {"upper", {1, 1}}, {"shape", {4, 4}}}}};
  CHECK(input_error(short_grid).find("theory.grid.lower") != std::string::npos);
  CHECK_THROWS_AS((void)load_spec("/nonexistent/theory.json"), InputError);
}

TEST_CASE("cli: grid shape flag") {
  CHECK(parse_grid_shape("64x200") == std::vector<int>{64, 200});
  CHECK(parse_grid_shape("17") == std::vector<int>{17});
  CHECK_THROWS_AS((void)parse_grid_shape("64x"), InputError);
  CHECK_THROWS_AS((void)parse_grid_shape("ax3"), InputError);
}

TEST_CASE("cli: derive on the electromagnetic theory") {
  const RunResult r = execute("derive", fixture("em"), {});
  CHECK(r.exit_code == 0);
  const Json& d = r.report["derived"];
  CHECK(d["regularity"]["exact_rank"] == 3);
  CHECK(d["constraints"]["reduced"]["linear_count"] == 6);
  CHECK(d["constraints"]["reduced"]["constraints"].size() == 6);
  CHECK(d["hamiltonian"]["origin"] == "almost-regular");
  CHECK(r.report["status"] == "ok");
}

TEST_CASE("cli: classify reports regularity") {
  const RunResult em = execute("classify", fixture("em"), {});
  CHECK(em.report["regularity"]["classification"] == "singular");
  const RunResult fp = execute("classify", fixture("free_particle"), {});
  CHECK(fp.exit_code == 0);
  CHECK(fp.report["regularity"]["classification"] == "regular");
}

TEST_CASE("cli: verify passes on the scalar field") {
  RunOptions opt;
  opt.spec_connection = true;
  const RunResult r = execute("verify", fixture("scalar_field"), opt);
  CHECK(r.exit_code == 0);
  for (const auto& c : r.report["checks"]) {
    INFO(c["name"].get<std::string>());
    const bool sectional = c["name"].get<std::string>().rfind("section ", 0) == 0;
    if (sectional) {
      CHECK(c["verdict"] != "fail");
    } else {
      CHECK(c["verdict"] == "proven");
    }
  }
}

TEST_CASE("cli: a wrong Hamiltonian is an identity failure") {
  TheorySpec s = fixture("free_particle");
  s.hamiltonian = parse("p_0_0^2", s.bundle.chart(ChartKind::Pi));
  const RunResult r = execute("verify", s, {});
  CHECK(r.exit_code == 1);
  CHECK(r.report["status"] == "identity-failure");
}

TEST_CASE("cli: solve on the free particle") {
  const RunResult r = execute("solve", fixture("free_particle"), {});
  CHECK(r.exit_code == 0);
  CHECK(r.report["solve"]["action"]["difference"].get<double>() <= 1e-6);
}

TEST_CASE("cli: solve errors") {
  CHECK_THROWS_AS((void)execute("solve", fixture("em"), {}), InputError);
  RunOptions coarse;
  coarse.grid_shape = std::vector<int>{20, 200};
  CHECK_THROWS_AS((void)execute("solve", fixture("scalar_field"), coarse), NumericError);
  CHECK_THROWS_AS((void)execute("plot", fixture("em"), {}), InputError);
}

TEST_CASE("cli: latex rendering") {
  CHECK(latex(Symbol::velocity(1, 0)) == "v^{1}_{0}");
  CHECK(latex(Symbol::momentum(2, 1)) == "p^{1}_{2}");
  CHECK(latex(parse("1/2*v_0_0^2")) == "\\frac{\\left(v^{0}_{0}\\right)^{2}}{2}");
  RunOptions opt;
  opt.latex = true;
  const RunResult r = execute("derive", fixture("free_particle"), opt);
  CHECK(r.report.contains("latex"));
  CHECK_FALSE(r.report["latex"].empty());
}

TEST_CASE("cli: report key order") {
  const RunResult r = execute("classify", fixture("free_particle"), {});
  std::vector<std::string> keys;
  for (const auto& [k, v] : r.report.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"command", "theory", "bundle", "options", "regularity", "checks", "status"});
}
