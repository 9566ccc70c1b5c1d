// One line per acceptance criterion: verdict, measured quantity, elapsed time and its limit.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>

#include "multisym/fieldsolve.hpp"
#include "multisym/verify.hpp"

using namespace multisym;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

LagrangianSystem make(int m, int n, const char* l) {
  const BundleSpec b = BundleSpec::make(m, n);
  return LagrangianSystem(b, parse(l, b.chart(ChartKind::J1E)));
}

const char* kEm = "1/4*((v_1_2 - v_2_1)^2 - (v_2_0 - v_0_2)^2 - (v_1_0 - v_0_1)^2)";
const char* kScalar = "1/2*v_0_0^2 - 1/2*v_0_1^2";

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Outcome em_momenta() {
  const auto sys = make(3, 3, kEm);
  const CoordinateMap fl = legendre_map(sys, LegendreKind::Reduced);
  const Chart j = sys.chart();
  // (A, nu, expected image) in the printed table
  const std::vector<std::tuple<int, int, const char*>> table{
      {0, 0, "0"},
      {1, 0, "-1/2*(v_1_0 - v_0_1)"},
      {2, 0, "-1/2*(v_2_0 - v_0_2)"},
      {0, 1, "1/2*(v_1_0 - v_0_1)"},
      {1, 1, "0"},
      {2, 1, "-1/2*(v_1_2 - v_2_1)"},
      {0, 2, "1/2*(v_2_0 - v_0_2)"},
      {1, 2, "1/2*(v_1_2 - v_2_1)"},
      {2, 2, "0"},
  };
  int matched = 0;
  for (const auto& [a, nu, text] : table) {
    if ((fl.image(Symbol::momentum(a, nu)) - parse(text, j)).is_zero()) ++matched;
  }
  return {matched == 9, std::to_string(matched) + "/9 images equal"};
}

Outcome em_hessian() {
  const auto sys = make(3, 3, kEm);
  const int printed[9][9] = {
      {0, 0, 0, 0, 0, 0, 0, 0, 0},  {0, -1, 0, 1, 0, 0, 0, 0, 0}, {0, 0, -1, 0, 0, 0, 1, 0, 0},
      {0, 1, 0, -1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0},  {0, 0, 0, 0, 0, 1, 0, -1, 0},
      {0, 0, 1, 0, 0, 0, -1, 0, 0}, {0, 0, 0, 0, 0, -1, 0, 1, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0},
  };
  const auto h = constant_hessian(sys);
  if (!h) return {false, "Hessian is not constant"};
  int equal = 0;
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 9; ++c) {
      if ((*h)[r][c] == Rational(printed[r][c]) / 2) ++equal;
    }
  }
  const std::size_t rk = rank(*h);
  const std::size_t linear = image_constraints(sys, LegendreKind::Reduced).linear_count;
  const bool ok = equal == 81 && rk == 3 && 9 - rk == linear && linear == 6;
  return {ok, std::to_string(equal) + "/81 entries, rank " + std::to_string(rk) + ", kernel " + std::to_string(9 - rk) +
                  ", linear constraints " + std::to_string(linear)};
}

Outcome em_constraints() {
  const auto sys = make(3, 3, kEm);
  auto row = [](std::initializer_list<int> ks) {
    std::vector<Rational> r(9, 0);
    for (int k : ks) r[static_cast<std::size_t>(k)] = 1;
    return r;
  };
  // p_0_0, p_1_1, p_2_2, p_1_0 + p_0_1, p_2_0 + p_0_2, p_2_1 + p_1_2 at k = nu*3 + A
  const QMatrix xi{row({0}), row({4}), row({8}), row({1, 3}), row({2, 6}), row({5, 7})};
  const ConstraintSet red = image_constraints(sys, LegendreKind::Reduced);
  QMatrix both = xi;
  for (std::size_t i = 0; i < red.linear_count; ++i) both.push_back(red.linear_part[i]);
  const bool span = red.linear_count == 6 && red.constraints.size() == 6 && rank(both) == 6;

  const Chart mpi = sys.bundle().chart(ChartKind::MPi);
  auto proportional = [](const Expr& a, const Expr& b) { return (a - b).is_zero() || (a + b).is_zero(); };
  const Expr tilde7 = parse("pe + p_1_2^2 - p_0_2^2 - p_0_1^2", mpi);
  const Expr hat7 = parse("pe + 2*(p_1_2^2 - p_0_2^2 - p_0_1^2)", mpi);
  const ConstraintSet tilde = image_constraints(sys, LegendreKind::ExtendedTilde);
  const ConstraintSet hat = image_constraints(sys, LegendreKind::ExtendedHat);
  // Elimination oracle: the candidate must vanish on the image of the map.
  const bool tilde_ok = tilde.constraints.size() == 7 && proportional(tilde.constraints[6], tilde7) &&
                        legendre_map(sys, LegendreKind::ExtendedTilde).pull(tilde7).is_zero();
  const bool hat_ok = hat.constraints.size() == 7 && proportional(hat.constraints[6], hat7) &&
                      legendre_map(sys, LegendreKind::ExtendedHat).pull(hat7).is_zero();
  return {span && tilde_ok && hat_ok, std::string("reduced span ") + (span ? "ok" : "wrong") + ", tilde 7th " +
                                          (tilde_ok ? "ok" : "wrong") + ", hat 7th " + (hat_ok ? "ok" : "wrong")};
}

Outcome pullbacks() {
  int proven = 0;
  int total = 0;
  std::string failed;
  for (const char* l : {kEm, kScalar}) {
    const auto sys = l == kEm ? make(3, 3, l) : make(2, 1, l);
    const BundleSpec& b = sys.bundle();
    auto tally = [&](const std::string& name, const DiffForm& diff) {
      ++total;
      if (diff.is_zero()) {
        ++proven;
      } else if (failed.empty()) {
        failed = name;
      }
    };
    tally("tilde", pullback(legendre_map(sys, LegendreKind::ExtendedTilde), canonical_form(b, ChartKind::MPi)) -
                       poincare_cartan(sys).theta);
    tally("hat", pullback(legendre_map(sys, LegendreKind::ExtendedHat), canonical_form(b, ChartKind::MPi)) -
                     reduced_cartan_form(sys));
    tally("generalized", pullback(legendre_map(sys, LegendreKind::Generalized), canonical_form(b, ChartKind::J1Estar)) -
                             reduced_cartan_form(sys));
    for (const CompatCheck& c : check_projection_compat(sys)) {
      ++total;
      if (c.pass) {
        ++proven;
      } else if (failed.empty()) {
        failed = c.name;
      }
    }
  }
  return {proven == total, std::to_string(proven) + "/" + std::to_string(total) + " exact" +
                               (failed.empty() ? "" : ", first failure " + failed)};
}

Outcome energy_identity() {
  std::mt19937_64 rng(20);
  int proven = 0;
  int total = 0;
  for (const auto& sys : {make(3, 3, kEm), make(2, 1, kScalar)}) {
    for (int i = 0; i < 20; ++i) {
      const Connection c = random_connection(sys.bundle().m, sys.bundle().n, rng);
      ++total;
      if (energy_identity_defect(sys, c).is_zero()) ++proven;
    }
  }
  return {proven == total && total == 40, std::to_string(proven) + "/" + std::to_string(total) + " connections proven"};
}

Outcome hyperregular() {
  const auto sys = make(2, 1, kScalar);
  const HamiltonianSystem h = from_hyperregular(sys);
  const bool formula = h.hamiltonian() == parse("1/2*(p_0_0^2 - p_0_1^2)");
  const bool theta = (pullback(legendre_map(sys, LegendreKind::Reduced), hamilton_cartan(h).theta) -
                      poincare_cartan(sys).theta)
                         .is_zero();
  const HamiltonianSystem t = psi_transfer(h);
  const bool transfer = t.kind() == ChartKind::J1PiStar && hamilton_cartan(t).theta.terms() == hamilton_cartan(h).theta.terms();
  return {formula && theta && transfer, std::string("H ") + (formula ? "ok" : "wrong") + ", FL^*Theta_h " +
                                            (theta ? "proven" : "fails") + ", psi transfer " +
                                            (transfer ? "unchanged" : "changed")};
}

Outcome theorem5() {
  const auto sys = make(2, 1, kScalar);
  const HamiltonianSystem h = from_hyperregular(sys);
  const Grid g({0.0, 0.0}, {0.9, 2 * M_PI}, {64, 200}, {false, true});
  const InitialData data{{parse("sin(x_1)")}, {parse("-cos(x_1)")}};
  const double diff = max_difference(solve_evolution(sys, data, g), solve_evolution(h, data, g), Symbol::field(0));
  // Convergence on a doubly periodic grid with unequal spacings.
  const HdwOperator op = hdw_residual(h, HdwMode::Local);
  std::vector<double> r;
  for (int k : {1, 2, 4}) {
    const Grid gk({0.0, 0.0}, {2 * M_PI, 2 * M_PI}, {48 * k + 1, 32 * k + 1}, {true, true});
    const auto e = sample_section(Chart(ChartKind::E, 2, 1), gk, {parse("sin(x_0 - x_1)")});
    r.push_back(residual_norm(op, legendre_prolong(sys, e)).max);
  }
  const double q1 = r[0] / r[1];
  const double q2 = r[1] / r[2];
  const bool ok = diff <= 1e-3 && q1 >= 3 && q1 <= 5 && q2 >= 3 && q2 <= 5;
  return {ok, fmt("max |EL - HDW| %.3g, ratios ", diff) + fmt("%.3f, %.3f", q1, q2)};
}

Outcome action_equality() {
  const auto fp = make(1, 1, "1/2*v_0_0^2");
  const Grid g1({0.0}, {1.0}, {1001});
  const double al = action_lagrangian(fp, SectionExpr(1, {parse("x_0")}), g1);
  const double ah = action_hamiltonian(from_hyperregular(fp), PiSection(1, {parse("x_0")}, {Expr(1)}), g1);
  const auto sf = make(2, 1, kScalar);
  const Grid g({0.0, 0.0}, {0.9, 2 * M_PI}, {64, 200}, {false, true});
  const auto phi = solve_evolution(sf, InitialData{{parse("sin(x_1)")}, {parse("-cos(x_1)")}}, g);
  const double gl = action_lagrangian(sf, phi);
  const double gh = action_hamiltonian(from_hyperregular(sf), legendre_prolong(sf, phi));
  const bool ok = std::abs(al - ah) <= 1e-6 && std::abs(gl - gh) <= 1e-3;
  return {ok, fmt("free particle %.3g, ", std::abs(al - ah)) + fmt("grid scalar %.3g", std::abs(gl - gh))};
}

Outcome lift_criterion() {
  const auto sf = make(2, 1, kScalar);
  const HamiltonianSystem h = from_hyperregular(sf);
  const Grid g({0.0, 0.0}, {0.9, 2 * M_PI}, {64, 200}, {false, true});
  const auto psi = solve_evolution(h, InitialData{{parse("sin(x_1)")}, {parse("-cos(x_1)")}}, g);
  const auto noisy = perturb(psi, 0.1, 0x9e37);
  const double bound = 10 * std::max(residual_norm(hdw_residual(h, HdwMode::Local), psi).max, 1e-12);
  std::mt19937_64 rng(9);
  double worst = 0.0;
  double weakest = INFINITY;
  for (int i = 0; i < 10; ++i) {
    const auto beta = random_vertical_coefficients(1, rng);
    worst = std::max(worst, lift_criterion_norm(h, beta, psi).max);
    weakest = std::min(weakest, lift_criterion_norm(h, beta, noisy).max);
  }
  const bool ok = worst <= bound && weakest >= 10 * bound;
  return {ok, fmt("solved max %.3g, perturbed min %.3g", worst, weakest) + fmt(", bound %.3g", bound)};
}

Outcome dimensions() {
  int ok = 0;
  for (int n = 1; n <= 3; ++n) {
    if (chart_dimension(ChartKind::J1Estar, 1, n) == 2 * n + 2 && chart_dimension(ChartKind::Pi, 1, n) == 2 * n + 1 &&
        chart_dimension(ChartKind::MPi, 1, n) == 2 * n + 2 && chart_dimension(ChartKind::J1PiStar, 1, n) == 2 * n + 1 &&
        BundleSpec::make(1, n).chart(ChartKind::MPi).dim() == 2 * n + 2) {
      ++ok;
    }
  }
  return {ok == 3, std::to_string(ok) + "/3 fiber dimensions"};
}

Outcome properties() {
  const std::string cmd = std::string("\"") + MULTISYM_PROPERTY_TESTS + "\" --minimal > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return {rc == 0, rc == 0 ? "all property suites pass" : "property suites failed (status " + std::to_string(rc) + ")"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "EM momenta table", 1, em_momenta},
      {2, "EM Hessian, rank and kernel", 1, em_hessian},
      {3, "EM constraint sets", 2, em_constraints},
      {4, "Cartan form pullbacks and projections", 5, pullbacks},
      {5, "energy identity on random connections", 10, energy_identity},
      {6, "hyper-regular association", 2, hyperregular},
      {7, "EL and HDW evolutions, residual convergence", 60, theorem5},
      {8, "action equality", 10, action_equality},
      {9, "vertical lift criterion", 10, lift_criterion},
      {10, "m = 1 chart dimensions", 1, dimensions},
      {11, "property suites", 30, properties},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.limit;
    if (!pass) ++failures;
    std::printf("%-4s criterion %2d  %-44s %s [%.2f s, limit %g s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
