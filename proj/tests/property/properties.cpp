// Randomized properties, each over at least 100 generated cases.
#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "multisym/hamiltonian.hpp"

using namespace multisym;

namespace {

constexpr int kCases = 120;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  Expr atom(std::span<const Symbol> symbols) {
    return Expr::symbol(symbols[static_cast<std::size_t>(integer(0, static_cast<int>(symbols.size()) - 1))]);
  }

  // Sum of a few monomials of bounded degree with small integer coefficients.
  Expr polynomial(std::span<const Symbol> symbols, int degree, int terms = 3) {
    Expr out;
    for (int t = 0; t < terms; ++t) {
      Expr mono = Expr(integer(-3, 3));
      const int d = integer(0, degree);
      for (int i = 0; i < d; ++i) mono *= atom(symbols);
      out += mono;
    }
    return out;
  }

  // Polynomials with occasional sin/exp/cos of a linear argument.
  Expr smooth(std::span<const Symbol> symbols) {
    Expr out = polynomial(symbols, 2);
    const int k = integer(0, 2);
    for (int i = 0; i < k; ++i) {
      const Expr arg = Expr::rational(integer(-2, 2), 2) * atom(symbols) + Expr::rational(integer(-2, 2), 3);
      const Function f = std::array{Function::Sin, Function::Cos, Function::Exp}[static_cast<std::size_t>(integer(0, 2))];
      out += Expr(integer(1, 3)) * Expr::apply(f, arg) * polynomial(symbols, 1, 1);
    }
    return out;
  }

  DiffForm form(const Chart& c, int degree, int terms = 3) {
    DiffForm out(c, degree);
    for (int t = 0; t < terms; ++t) {
      IndexTuple tuple;
      for (int i = 0; i < degree; ++i) tuple.push_back(integer(0, c.dim() - 1));
      out.add(tuple, polynomial(c.coordinates(), 2));
    }
    return out;
  }

  CoordinateMap map(const Chart& source, const Chart& target) {
    std::vector<Expr> images;
    for (int i = 0; i < target.dim(); ++i) images.push_back(polynomial(source.coordinates(), 2, 2));
    return {source, target, std::move(images)};
  }

  Point point(std::span<const Symbol> symbols) {
    Point p;
    for (const Symbol& s : symbols) p[s] = real(-1.5, 1.5);
    return p;
  }

 private:
  std::mt19937_64 rng_;
};

Chart custom(const std::string& name, int dim) {
  std::vector<Symbol> coords;
  for (int i = 0; i < dim; ++i) coords.push_back(Symbol::auxiliary(name + std::to_string(i)));
  return Chart::custom(name, coords);
}

}  // namespace

TEST_CASE("property: d o d = 0") {
  Gen g(1);
  const Chart c(ChartKind::J1E, 2, 1);  // 5 coordinates
  int failures = 0;
  for (int i = 0; i < kCases; ++i) {
    const DiffForm f = g.form(c, g.integer(0, 2));
    if (!exterior_derivative(exterior_derivative(f)).is_zero()) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("property: pullback is functorial") {
  Gen g(2);
  const Chart a = custom("a", 2);
  const Chart b = custom("b", 3);
  const Chart c = custom("c", 3);
  int failures = 0;
  for (int i = 0; i < kCases; ++i) {
    const CoordinateMap f = g.map(a, b);
    const CoordinateMap h = g.map(b, c);
    const DiffForm w = g.form(c, g.integer(0, 2));
    if (!(pullback(compose(h, f), w) == pullback(f, pullback(h, w)))) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("property: pullback commutes with d and wedge") {
  Gen g(3);
  const Chart a = custom("a", 3);
  const Chart b = custom("b", 3);
  int failures = 0;
  for (int i = 0; i < kCases; ++i) {
    const CoordinateMap f = g.map(a, b);
    const DiffForm u = g.form(b, g.integer(0, 1));
    const DiffForm w = g.form(b, 1);
    if (!(pullback(f, exterior_derivative(u)) == exterior_derivative(pullback(f, u)))) ++failures;
    if (!(pullback(f, wedge(u, w)) == wedge(pullback(f, u), pullback(f, w)))) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("property: Hessian symmetry") {
  Gen g(4);
  const BundleSpec bundle = BundleSpec::make(2, 2);
  const Chart j = bundle.chart(ChartKind::J1E);
  int failures = 0;
  for (int i = 0; i < kCases; ++i) {
    const LagrangianSystem sys(bundle, g.polynomial(j.coordinates(), 4, 5));
    const ExprMatrix h = hessian(sys);
    for (std::size_t r = 0; r < h.size(); ++r) {
      for (std::size_t s = 0; s < r; ++s) {
        if (!(h[r][s] == h[s][r])) ++failures;
      }
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("property: derivative matches finite differences") {
  Gen g(5);
  const Chart c(ChartKind::E, 1, 2);
  const auto coords = c.coordinates();
  int failures = 0;
  for (int i = 0; i < kCases; ++i) {
    const Expr e = g.smooth(coords);
    const Symbol s = coords[static_cast<std::size_t>(g.integer(0, c.dim() - 1))];
    Point pt = g.point(coords);
    const double exact = evaluate(differentiate(e, s), pt);
    const double h = 1e-5;
    const double x = pt[s];
    pt[s] = x + h;
    const double up = evaluate(e, pt);
    pt[s] = x - h;
    const double down = evaluate(e, pt);
    const double fd = (up - down) / (2 * h);
    if (std::abs(fd - exact) > 1e-6 * (1.0 + std::abs(exact))) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("property: Newton inversion round trip") {
  Gen g(6);
  const BundleSpec bundle = BundleSpec::make(2, 1);
  const Chart j = bundle.chart(ChartKind::J1E);
  int failures = 0;
  for (int i = 0; i < kCases; ++i) {
    // Strictly convex in v: positive quadratic part plus cosh terms and (x, y) couplings.
    Expr l = Expr::rational(g.integer(1, 4), 2) * parse("v_0_0^2", j) + Expr::rational(g.integer(1, 4), 2) * parse("v_0_1^2", j);
    l += Expr::rational(g.integer(0, 2), 2) * parse("cosh(v_0_0 - x_0)", j);
    l += Expr::rational(g.integer(0, 2), 2) * parse("cosh(v_0_1)", j);
    l += Expr::rational(g.integer(-2, 2), 8) * parse("v_0_0*v_0_1", j);
    l += Expr(g.integer(-2, 2)) * parse("y_0*v_0_1", j) + g.polynomial(std::span(j.coordinates()).first(3), 2);
    const LagrangianSystem sys(bundle, l);
    const ReducedInverter inv(sys, 1e-12);
    const std::vector<double> xy{g.real(-1, 1), g.real(-1, 1), g.real(-1, 1)};
    const std::vector<double> v{g.real(-1.5, 1.5), g.real(-1.5, 1.5)};
    const std::vector<double> p = inv.momenta_at(xy, v);
    const std::vector<double> back = inv.solve(xy, p);
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (std::abs(back[k] - v[k]) > 1e-8) ++failures;
    }
  }
  CHECK(failures == 0);
}
