// multisym: derive, classify, verify and solve first-order field theories
// described by a JSON theory file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <utility>

#include "CLI11.hpp"
#include "multisym/error.hpp"
#include "multisym/theory.hpp"

namespace {

void print_summary(const multisym::Json& report) {
  std::printf("%s %s (m=%d, N=%d)\n", report["command"].get<std::string>().c_str(),
              report["theory"].get<std::string>().c_str(), report["bundle"]["m"].get<int>(),
              report["bundle"]["N"].get<int>());
  for (const auto& c : report["checks"]) {
    std::printf("  %-12s %-52s %s\n", c["verdict"].get<std::string>().c_str(), c["name"].get<std::string>().c_str(),
                c["evidence"].get<std::string>().c_str());
  }
  std::printf("status: %s\n", report["status"].get<std::string>().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multisymplectic field theory workbench"};
  app.require_subcommand(1);

  std::string theory_path;
  int samples = 16;
  double tol = 0.0;
  std::string json_path;
  std::string connection = "trivial";
  bool latex = false;
  std::string grid;

  const std::pair<const char*, const char*> commands[] = {
      {"derive", "Momenta, Hessian, Legendre images, constraints, Cartan forms and field equations"},
      {"classify", "Regularity of the Lagrangian: Hessian rank and kernel"},
      {"verify", "Run the identity suite; exit 1 when an identity fails"},
      {"solve", "Evolve the EL and HDW equations on the grid and compare"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("theory", theory_path, "theory spec (JSON)")->required();
    sub->add_option("--samples", samples, "sample points for rank and zero tests")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "numeric tolerance (default 1e-10 symbolic, 1e-3 PDE)")->check(CLI::PositiveNumber);
    sub->add_option("--json", json_path, "write the full report here");
    sub->add_option("--connection", connection, "connection used for energies and covariant checks")
        ->check(CLI::IsMember({"trivial", "spec"}));
    sub->add_flag("--latex", latex, "add LaTeX renderings to the report");
    sub->add_option("--grid", grid, "grid shape override, e.g. 64x200");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(multisym::ErrorCode::Input);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const multisym::TheorySpec spec = multisym::load_spec(theory_path);
    multisym::RunOptions opt;
    opt.samples = samples;
    if (tol > 0.0) opt.tol = tol;
    opt.latex = latex;
    opt.spec_connection = connection == "spec";
    if (!grid.empty()) opt.grid_shape = multisym::parse_grid_shape(grid);

    const multisym::RunResult result = multisym::execute(command, spec, opt);
    if (json_path.empty()) {
      std::cout << result.report.dump(2) << "\n";
    } else {
      std::ofstream out(json_path);
      if (!out) throw multisym::InputError("cannot write " + json_path);
      out << result.report.dump(2) << "\n";
      print_summary(result.report);
    }
    return result.exit_code;
  } catch (const multisym::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.code());
  }
}
