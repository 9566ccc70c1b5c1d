#pragma once

// Theory spec files and the four commands run on them.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "multisym/fieldsolve.hpp"
#include "multisym/verify.hpp"

namespace multisym {

using Json = nlohmann::ordered_json;

/// A closed-form section over the base: y^A(x) and optionally p^nu_A(x).
struct SectionSpec {
  std::string name;
  std::vector<Expr> y;
  std::vector<Expr> p;
};

struct TheorySpec {
  std::string name;
  BundleSpec bundle;
  std::optional<Expr> lagrangian;
  std::optional<Expr> hamiltonian;
  ChartKind hamiltonian_chart = ChartKind::Pi;
  std::optional<Connection> connection;
  std::vector<SectionSpec> sections;
  std::optional<Grid> grid;
  /// y^A and dy^A/dx^0 on the first line; p^0_A when given, else derived from L.
  std::optional<InitialData> initial_data;
  std::vector<Expr> initial_momentum;
  bool assert_hyperregular = false;
  /// Extra fiber dimensions N whose chart dimensions are reported (same m).
  std::vector<int> dimension_checks;
};

/// Throws InputError with the offending field path.
[[nodiscard]] TheorySpec parse_spec(const Json& j);
[[nodiscard]] TheorySpec load_spec(const std::string& path);

struct RunOptions {
  int samples = 16;
  std::optional<double> tol;
  bool latex = false;
  bool spec_connection = false;
  std::optional<std::vector<int>> grid_shape;
};

struct RunResult {
  Json report;
  int exit_code = 0;
};

/// command is one of derive, classify, verify, solve. Module errors propagate.
[[nodiscard]] RunResult execute(const std::string& command, const TheorySpec& spec, const RunOptions& opt);

/// "64x200" -> {64, 200}.
[[nodiscard]] std::vector<int> parse_grid_shape(const std::string& text);

}  // namespace multisym
