#include "doctest.h"
#include "multisym/error.hpp"
#include "multisym/hamiltonian.hpp"

using namespace multisym;

namespace {

LagrangianSystem make(int m, int n, const char* l) {
  const BundleSpec b = BundleSpec::make(m, n);
  return LagrangianSystem(b, parse(l, b.chart(ChartKind::J1E)));
}

HamiltonianSystem ham(int m, int n, const char* h) {
  const BundleSpec b = BundleSpec::make(m, n);
  return HamiltonianSystem(b, parse(h, b.chart(ChartKind::Pi)));
}

DiffForm d(const Chart& c, const Symbol& s) { return DiffForm::differential(c, s); }

const char* kEm = "1/4*((v_1_2 - v_2_1)^2 - (v_2_0 - v_0_2)^2 - (v_1_0 - v_0_1)^2)";

}  // namespace

TEST_CASE("hamiltonian: Hamilton-Cartan forms") {
  const auto h = ham(1, 1, "1/2*p_0_0^2");
  const Chart c = h.chart();
  const CartanForms f = hamilton_cartan(h);
  CHECK(f.theta == parse("p_0_0") * d(c, Symbol::field(0)) - parse("1/2*p_0_0^2") * d(c, Symbol::base(0)));
  // -d(p dy) contributes -dp ^ dy = dy ^ dp, stored as +1 on (y, p)
  CHECK(f.omega.coefficient({1, 2}) == Expr(1));
  CHECK(f.omega == -exterior_derivative(f.theta));
  const auto zero = ham(2, 1, "0");
  CHECK(hamilton_cartan(zero).theta == momentum_part(zero.chart()));
  CHECK(hamilton_cartan(h).theta.coefficient({0}) == -h.hamiltonian());
}

TEST_CASE("hamiltonian: connection forms") {
  const BundleSpec b = BundleSpec::make(1, 1);
  const Chart c = b.chart(ChartKind::Pi);
  CHECK(connection_section_form(b, Connection::trivial(1, 1)) == momentum_part(c));
  const Connection g = make_connection(1, 1, {parse("x_0*y_0")});
  CHECK(connection_section_form(b, g) == parse("p_0_0") * d(c, Symbol::field(0)) -
                                              parse("p_0_0*x_0*y_0") * d(c, Symbol::base(0)));
}

TEST_CASE("hamiltonian: densities compose with connections") {
  const BundleSpec b = BundleSpec::make(1, 1);
  const Expr global = parse("1/2*p_0_0^2");
  CHECK(compose_density(b, Connection::trivial(1, 1), global).hamiltonian() == global);
  const Connection g = make_connection(1, 1, {parse("y_0 + x_0^2")});
  const HamiltonianSystem h = compose_density(b, g, global);
  CHECK(h.hamiltonian() == parse("1/2*p_0_0^2 + p_0_0*(y_0 + x_0^2)"));
  REQUIRE(h.global_hamiltonian().has_value());
  CHECK((h.hamiltonian() - *h.global_hamiltonian() - g.momentum_contraction()).is_zero());
  // Theta_h_nabla - Theta_h is the semibasic (H - p Gamma) d^m x term
  const DiffForm diff = connection_section_form(b, g) - hamilton_cartan(h).theta;
  CHECK(diff == global * d(b.chart(ChartKind::Pi), Symbol::base(0)));
}

TEST_CASE("hamiltonian: hyper-regular Hamiltonians") {
  CHECK(from_hyperregular(make(1, 1, "1/2*v_0_0^2")).hamiltonian() == parse("1/2*p_0_0^2"));
  CHECK(from_hyperregular(make(2, 1, "1/2*v_0_0^2 - 1/2*v_0_1^2")).hamiltonian() ==
        parse("1/2*(p_0_0^2 - p_0_1^2)"));
  CHECK_THROWS_AS((void)from_hyperregular(make(3, 3, kEm)), InputError);
}

TEST_CASE("hamiltonian: the connection energy pulls back to E_nabla") {
  const auto sys = make(2, 1, "1/2*v_0_0^2 - 1/2*v_0_1^2 + x_0*y_0*v_0_1");
  const Connection g = make_connection(2, 1, {parse("y_0"), parse("x_0*x_1")});
  const HamiltonianSystem h = from_hyperregular(sys, g);
  REQUIRE(h.global_hamiltonian().has_value());
  const CoordinateMap fl = legendre_map(sys, LegendreKind::Reduced);
  CHECK((fl.pull(*h.global_hamiltonian()) - energy_density(sys, g)).is_zero());
}

TEST_CASE("hamiltonian: almost-regular electromagnetic Hamiltonian") {
  const auto sys = make(3, 3, kEm);
  const HamiltonianSystem h = restrict_almost_regular(sys, Connection::trivial(3, 3));
  CHECK(h.hamiltonian() == parse("p_1_2^2 - p_0_2^2 - p_0_1^2"));
  REQUIRE(h.constraints().has_value());
  CHECK(h.constraints()->linear_count == 6);
  CHECK(almost_regular_defect(sys, h).is_zero());
}

TEST_CASE("hamiltonian: almost-regular with one constrained momentum") {
  const auto sys = make(2, 1, "1/2*v_0_0^2");
  const HamiltonianSystem h = restrict_almost_regular(sys, Connection::trivial(2, 1));
  CHECK(h.hamiltonian() == parse("1/2*p_0_0^2"));
  REQUIRE(h.constraints().has_value());
  REQUIRE(h.constraints()->constraints.size() == 1);
  CHECK(h.constraints()->constraints[0] == parse("p_0_1"));
  CHECK(almost_regular_defect(sys, h).is_zero());
}

TEST_CASE("hamiltonian: HDW equations of the free particle") {
  const HdwOperator op = hdw_residual(ham(1, 1, "1/2*p_0_0^2"), HdwMode::Local);
  CHECK(op.flux == std::vector<Expr>{parse("p_0_0")});
  CHECK(op.source == std::vector<Expr>{Expr{}});
  const auto r = hdw_residual_on(op, PiSection(1, {parse("2 + 3*x_0")}, {Expr(3)}));
  for (const Expr& e : r) CHECK(e.is_zero());
  const auto bad = hdw_residual_on(op, PiSection(1, {parse("x_0^2")}, {Expr(1)}));
  CHECK_FALSE(bad[0].is_zero());
}

TEST_CASE("hamiltonian: scalar field HDW reduces to the wave equation") {
  const HdwOperator op = hdw_residual(ham(2, 1, "1/2*(p_0_0^2 - p_0_1^2)"), HdwMode::Local);
  // p0 = dy/dx0, p1 = -dy/dx1 from the flux equations
  const PiSection wave(2, {parse("sin(x_0 - x_1)")}, {parse("cos(x_0 - x_1)"), parse("cos(x_0 - x_1)")});
  for (const Expr& e : hdw_residual_on(op, wave)) CHECK(is_zero(e, 16).max_abs < 1e-12);
  const PiSection off(2, {parse("sin(x_0 + 2*x_1)")}, {parse("cos(x_0 + 2*x_1)"), parse("-2*cos(x_0 + 2*x_1)")});
  const auto r = hdw_residual_on(op, off);
  CHECK(is_zero(r[0], 16).max_abs < 1e-12);
  CHECK(is_zero(r[1], 16).max_abs < 1e-12);
  CHECK(is_zero(r[2], 16).max_abs > 1e-3);
}

TEST_CASE("hamiltonian: local and covariant HDW coincide") {
  const auto sys = make(2, 1, "1/2*v_0_0^2 - 1/2*v_0_1^2");
  const Connection g = make_connection(2, 1, {parse("y_0^2"), parse("x_1*y_0")});
  const HamiltonianSystem h = from_hyperregular(sys, g);
  const HdwOperator local = hdw_residual(h, HdwMode::Local);
  const HdwOperator cov = hdw_residual(h, HdwMode::Covariant);
  for (std::size_t i = 0; i < local.flux.size(); ++i) CHECK((local.flux[i] - cov.flux[i]).is_zero());
  for (std::size_t i = 0; i < local.source.size(); ++i) CHECK((local.source[i] - cov.source[i]).is_zero());
}

TEST_CASE("hamiltonian: vertical lifts") {
  const BundleSpec b = BundleSpec::make(2, 1);
  const Chart c = b.chart(ChartKind::Pi);
  const VectorFieldExpr k = lift_vertical_field(b, {Expr(3)});
  CHECK(k.components[2] == Expr(3));
  CHECK(k.components[3].is_zero());
  CHECK(k.components[4].is_zero());
  const VectorFieldExpr y = lift_vertical_field(b, {parse("y_0")});
  CHECK(y.components[static_cast<std::size_t>(*c.index_of(Symbol::momentum(0, 0)))] == parse("-p_0_0"));
  CHECK(y.components[static_cast<std::size_t>(*c.index_of(Symbol::momentum(0, 1)))] == parse("-p_0_1"));
}

TEST_CASE("hamiltonian: the lift criterion vanishes on an exact HDW solution") {
  const HamiltonianSystem h = ham(2, 1, "1/2*(p_0_0^2 - p_0_1^2)");
  const BundleSpec b = h.bundle();
  const PiSection wave(2, {parse("sin(x_0 - x_1)")}, {parse("cos(x_0 - x_1)"), parse("cos(x_0 - x_1)")});
  const CoordinateMap s = section_map(b, wave);
  const DiffForm omega = hamilton_cartan(h).omega;
  const VectorFieldExpr z = lift_vertical_field(b, {parse("1 + y_0^2")});
  const DiffForm pulled = pullback(s, interior_product(z, omega));
  CHECK(is_zero(pulled, 16).max_abs < 1e-12);
}

TEST_CASE("hamiltonian: psi transfer") {
  const HamiltonianSystem h = ham(2, 1, "1/2*(p_0_0^2 - p_0_1^2)");
  const HamiltonianSystem t = psi_transfer(h);
  CHECK(t.kind() == ChartKind::J1PiStar);
  CHECK(t.hamiltonian() == h.hamiltonian());
  const HamiltonianSystem back = psi_transfer(t);
  CHECK(back.kind() == ChartKind::Pi);
  CHECK(back.hamiltonian() == h.hamiltonian());
  const DiffForm a = hamilton_cartan(h).theta;
  const DiffForm bt = hamilton_cartan(t).theta;
  CHECK(a.terms() == bt.terms());
}

TEST_CASE("hamiltonian: canonical Hamiltonian section") {
  const HamiltonianSystem h = ham(2, 1, "1/2*(p_0_0^2 - p_0_1^2)");
  const CoordinateMap hd = hamiltonian_section(h);
  const BundleSpec b = h.bundle();
  const CoordinateMap id = compose(projection_map(b, Projection::Delta), hd);
  CHECK_FALSE(first_difference(id, CoordinateMap::identity(b.chart(ChartKind::Pi))).has_value());
  const DiffForm pulled = pullback(hd, canonical_form(b, ChartKind::J1Estar));
  CHECK(pulled == hamilton_cartan(h).theta);
}
