#include "doctest.h"
#include "multisym/bundle.hpp"
#include "multisym/forms.hpp"

using namespace multisym;

namespace {
DiffForm d(const Chart& c, const Symbol& s) { return DiffForm::differential(c, s); }
}  // namespace

TEST_CASE("forms: wedge antisymmetry") {
  const Chart e(ChartKind::E, 1, 1);
  const DiffForm dx = d(e, Symbol::base(0));
  const DiffForm dy = d(e, Symbol::field(0));
  CHECK(wedge(dx, dx).is_zero());
  CHECK(wedge(dx, dy) == -wedge(dy, dx));
  const DiffForm pdy = Expr::symbol(Symbol::field(0)) * dy;
  CHECK(wedge(pdy, dx).coefficient({0, 1}) == -Expr::symbol(Symbol::field(0)));
}

TEST_CASE("forms: volume forms and the d^{m-1}x sign convention") {
  const Chart e(ChartKind::E, 2, 1);
  const DiffForm vol = volume_form(e);
  CHECK(vol.degree() == 2);
  CHECK(vol.coefficient({0, 1}) == Expr(1));
  CHECK(volume_form_minus(e, 0) == d(e, Symbol::base(1)));
  CHECK(volume_form_minus(e, 1) == -d(e, Symbol::base(0)));
  // dy ^ d^{1}x_1 = dy ^ (-dx^0) = dx^0 ^ dy
  const DiffForm f = wedge(d(e, Symbol::field(0)), volume_form_minus(e, 1));
  CHECK(f == wedge(d(e, Symbol::base(0)), d(e, Symbol::field(0))));
}

TEST_CASE("forms: exterior derivative") {
  const Chart e(ChartKind::MPi, 1, 1);
  const Expr p = Expr::symbol(Symbol::momentum(0, 0));
  const DiffForm pdy = p * d(e, Symbol::field(0));
  const DiffForm dpdy = exterior_derivative(pdy);
  CHECK(dpdy == wedge(d(e, Symbol::momentum(0, 0)), d(e, Symbol::field(0))));
  CHECK(dpdy.coefficient({1, 3}) == Expr(-1));  // stored as dy ^ dp
  const DiffForm f = DiffForm::scalar(e, parse("x_0^2*sin(y_0)*pe"));
  CHECK(exterior_derivative(exterior_derivative(f)).is_zero());
  const DiffForm df = exterior_derivative(f);
  CHECK(df.coefficient({0}) == parse("2*x_0*sin(y_0)*pe"));
  CHECK(df.coefficient({1}) == parse("x_0^2*cos(y_0)*pe"));
}

TEST_CASE("forms: interior product") {
  const Chart e(ChartKind::E, 2, 1);
  CHECK(interior_product(VectorFieldExpr::coordinate(e, 0), volume_form(e)) == d(e, Symbol::base(1)));
  const Chart pi(ChartKind::Pi, 1, 1);
  const DiffForm dpdy = wedge(d(pi, Symbol::momentum(0, 0)), d(pi, Symbol::field(0)));
  CHECK(interior_product(VectorFieldExpr::coordinate(pi, 1), dpdy) == -d(pi, Symbol::momentum(0, 0)));
}

TEST_CASE("forms: pullback by chain rule") {
  const Chart m(ChartKind::M, 1, 1);
  const Chart e(ChartKind::E, 1, 1);
  const CoordinateMap f(m, e, {parse("x_0"), parse("x_0^2")});
  const DiffForm pulled = pullback(f, d(e, Symbol::field(0)));
  CHECK(pulled == parse("2*x_0") * d(m, Symbol::base(0)));
  const DiffForm g = parse("y_0*x_0") * d(e, Symbol::field(0));
  CHECK(pullback(CoordinateMap::identity(e), g) == g);
}

TEST_CASE("forms: polar coordinates pull back the area form") {
  const Symbol r = Symbol::auxiliary("r");
  const Symbol t = Symbol::auxiliary("t");
  const Chart polar = Chart::custom("polar", {r, t});
  const Chart e(ChartKind::E, 1, 1);
  const std::vector<Symbol> allowed{r, t};
  const CoordinateMap f(polar, e, {parse("r*cos(t)", allowed), parse("r*sin(t)", allowed)});
  const DiffForm area = wedge(d(e, Symbol::base(0)), d(e, Symbol::field(0)));
  const DiffForm diff = pullback(f, area) - Expr::symbol(r) * wedge(d(polar, r), d(polar, t));
  const ZeroTest z = is_zero(diff, 32);
  CHECK(z.verdict != ZeroVerdict::ProvenNonzero);
  CHECK(z.max_abs < 1e-12);
}

TEST_CASE("forms: coefficients at absent tuples are zero") {
  const Chart e(ChartKind::E, 2, 1);
  CHECK(volume_form(e).coefficient({0, 2}) == Expr{});
}

TEST_CASE("forms: canonical form on the extended bundle") {
  const BundleSpec b = BundleSpec::make(1, 1);
  const Chart c = b.chart(ChartKind::MPi);
  const DiffForm theta = canonical_form(b, ChartKind::MPi);
  const DiffForm expect = Expr::symbol(Symbol::extended()) * d(c, Symbol::base(0)) +
                          Expr::symbol(Symbol::momentum(0, 0)) * d(c, Symbol::field(0));
  CHECK(theta == expect);
}

TEST_CASE("forms: minus d of the canonical form has the expected local expression") {
  const BundleSpec b = BundleSpec::make(2, 2);
  const Chart c = b.chart(ChartKind::MPi);
  DiffForm omega = -wedge(d(c, Symbol::extended()), volume_form(c));
  for (int nu = 0; nu < 2; ++nu) {
    for (int a = 0; a < 2; ++a) {
      omega -= wedge(wedge(d(c, Symbol::momentum(a, nu)), d(c, Symbol::field(a))), volume_form_minus(c, nu));
    }
  }
  CHECK(-exterior_derivative(canonical_form(b, ChartKind::MPi)) == omega);
}

TEST_CASE("forms: generalized canonical form carries the momentum trace") {
  const BundleSpec b = BundleSpec::make(2, 1);
  const DiffForm theta = canonical_form(b, ChartKind::J1Estar);
  CHECK(theta.coefficient({0, 1}) == parse("q_0_0 + q_1_1"));
}
