#include "doctest.h"
#include "multisym/bundle.hpp"
#include "multisym/error.hpp"

using namespace multisym;

TEST_CASE("charts: dimension formulas for m, N in 1..4") {
  for (int m = 1; m <= 4; ++m) {
    for (int n = 1; n <= 4; ++n) {
      const BundleSpec b = BundleSpec::make(m, n);
      CHECK(b.chart(ChartKind::M).dim() == m);
      CHECK(b.chart(ChartKind::E).dim() == m + n);
      CHECK(b.chart(ChartKind::J1E).dim() == m + n + m * n);
      CHECK(b.chart(ChartKind::J1Estar).dim() == m + n + m * m + m * n);
      CHECK(b.chart(ChartKind::Pi).dim() == m + n + m * n);
      CHECK(b.chart(ChartKind::MPi).dim() == m + n + 1 + m * n);
      CHECK(b.chart(ChartKind::J1PiStar).dim() == m + n + m * n);
      for (ChartKind k : {ChartKind::J1E, ChartKind::J1Estar, ChartKind::Pi, ChartKind::MPi}) {
        CHECK(chart_dimension(k, m, n) == b.chart(k).dim());
      }
    }
  }
}

TEST_CASE("charts: worked dimensions") {
  CHECK(chart_dimension(ChartKind::Pi, 1, 2) == 5);
  CHECK(chart_dimension(ChartKind::MPi, 1, 2) == 6);
  CHECK(chart_dimension(ChartKind::J1E, 3, 3) == 15);
  CHECK(chart_dimension(ChartKind::J1E, 1, 1) == 3);
}

TEST_CASE("charts: non-positive dimensions are rejected") {
  CHECK_THROWS_AS((void)BundleSpec::make(0, 1), InputError);
  CHECK_THROWS_AS((void)BundleSpec::make(1, 0), InputError);
}

TEST_CASE("charts: coordinate order") {
  const Chart c(ChartKind::MPi, 2, 1);
  REQUIRE(c.dim() == 6);
  CHECK(c.coordinate(0) == Symbol::base(0));
  CHECK(c.coordinate(2) == Symbol::field(0));
  CHECK(c.coordinate(3) == Symbol::extended());
  CHECK(c.coordinate(4) == Symbol::momentum(0, 0));
  CHECK(c.coordinate(5) == Symbol::momentum(0, 1));
  CHECK(c.index_of(Symbol::momentum(0, 1)) == 5);
  CHECK_FALSE(c.contains(Symbol::velocity(0, 0)));
}

TEST_CASE("charts: unknown identifiers are rejected") {
  CHECK_THROWS_AS((void)parse("q_7", Chart(ChartKind::J1E, 1, 2)), InputError);
  CHECK_THROWS_AS((void)parse("y_2", Chart(ChartKind::E, 1, 2)), InputError);
  CHECK_NOTHROW((void)parse("x_0 + y_0*v_0_0", Chart(ChartKind::J1E, 1, 1)));
}

TEST_CASE("charts: iota0 takes the trace of the generalized momenta") {
  const BundleSpec b = BundleSpec::make(2, 1);
  const CoordinateMap iota = projection_map(b, Projection::Iota0);
  const Expr pe = iota.image(Symbol::extended());
  const Point pt{{Symbol::generalized(0, 0), 2.0}, {Symbol::generalized(1, 1), 3.0},
                 {Symbol::generalized(0, 1), 7.0}, {Symbol::generalized(1, 0), -4.0}};
  CHECK(evaluate(pe, pt) == doctest::Approx(5.0));
}

TEST_CASE("charts: projection sources and targets") {
  const BundleSpec b = BundleSpec::make(2, 3);
  const CoordinateMap delta = projection_map(b, Projection::Delta);
  CHECK(delta.source().dim() == 2 + 3 + 4 + 6);
  CHECK(delta.target().dim() == 2 + 3 + 6);
  const CoordinateMap psi = projection_map(b, Projection::Psi);
  for (int i = 0; i < psi.target().dim(); ++i) {
    CHECK(psi.image(i) == Expr::symbol(psi.source().coordinate(i)));
  }
}

TEST_CASE("charts: mu after iota0 followed by psi is delta") {
  for (int m = 1; m <= 3; ++m) {
    const BundleSpec b = BundleSpec::make(m, 2);
    const CoordinateMap chain = compose(projection_map(b, Projection::Psi),
                                        compose(projection_map(b, Projection::Mu), projection_map(b, Projection::Iota0)));
    CHECK_FALSE(first_difference(chain, projection_map(b, Projection::Delta)).has_value());
  }
}

TEST_CASE("charts: sections of delta") {
  const BundleSpec b = BundleSpec::make(2, 1);
  const std::vector<Expr> q{parse("p_0_0*y_0"), parse("x_1"), Expr{}, parse("-p_0_1")};
  const CoordinateMap h = delta_section(b, q);
  const CoordinateMap id = compose(projection_map(b, Projection::Delta), h);
  CHECK_FALSE(first_difference(id, CoordinateMap::identity(b.chart(ChartKind::Pi))).has_value());
}

TEST_CASE("charts: first_difference names the differing coordinate") {
  const Chart e(ChartKind::E, 1, 1);
  const CoordinateMap bad(e, e, {parse("x_0"), parse("y_0 + 1")});
  const auto diff = first_difference(bad, CoordinateMap::identity(e));
  REQUIRE(diff.has_value());
  CHECK(*diff == "y_0");
}

TEST_CASE("charts: connections") {
  CHECK(Connection::trivial(2, 2).is_trivial());
  CHECK(make_connection(1, 1, {Expr{}}).is_trivial());
  const Chart j(ChartKind::J1E, 1, 1);
  CHECK_NOTHROW((void)make_connection(1, 1, {parse("x_0*y_0", j)}));
  CHECK_THROWS_AS((void)make_connection(1, 1, {parse("v_0_0", j)}), InputError);
  CHECK_THROWS_AS((void)make_connection(2, 1, {Expr{}}), InputError);
}
