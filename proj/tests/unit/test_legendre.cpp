#include <cmath>

#include "doctest.h"
#include "multisym/bundle.hpp"
#include "multisym/error.hpp"
#include "multisym/legendre.hpp"

using namespace multisym;

namespace {

LagrangianSystem make(int m, int n, const char* l) {
  const BundleSpec b = BundleSpec::make(m, n);
  return LagrangianSystem(b, parse(l, b.chart(ChartKind::J1E)));
}

const char* kEm = "1/4*((v_1_2 - v_2_1)^2 - (v_2_0 - v_0_2)^2 - (v_1_0 - v_0_1)^2)";

bool same_up_to_sign(const Expr& a, const Expr& b) { return (a - b).is_zero() || (a + b).is_zero(); }

}  // namespace

TEST_CASE("legendre: reduced map of the free particle") {
  const auto sys = make(1, 1, "1/2*v_0_0^2");
  const CoordinateMap f = legendre_map(sys, LegendreKind::Reduced);
  CHECK(f.target().kind() == ChartKind::Pi);
  CHECK(f.image(Symbol::momentum(0, 0)) == parse("v_0_0"));
  CHECK(f.image(Symbol::base(0)) == parse("x_0"));
  CHECK(image_constraints(sys, LegendreKind::Reduced).constraints.empty());
}

TEST_CASE("legendre: extended maps of the electromagnetic Lagrangian") {
  const auto sys = make(3, 3, kEm);
  const Expr l = sys.lagrangian();
  CHECK(legendre_map(sys, LegendreKind::ExtendedTilde).image(Symbol::extended()) == -l);
  CHECK(legendre_map(sys, LegendreKind::ExtendedHat).image(Symbol::extended()) == Expr(-2) * l);
  const CoordinateMap red = legendre_map(sys, LegendreKind::Reduced);
  CHECK(red.image(Symbol::momentum(1, 0)) == parse("-1/2*(v_1_0 - v_0_1)"));
  CHECK(red.image(Symbol::momentum(2, 1)) == parse("-1/2*(v_1_2 - v_2_1)"));
}

TEST_CASE("legendre: targets") {
  CHECK(legendre_target(LegendreKind::Generalized) == ChartKind::J1Estar);
  CHECK(legendre_target(LegendreKind::Reduced) == ChartKind::Pi);
  CHECK(legendre_target(LegendreKind::ExtendedHat) == ChartKind::MPi);
  CHECK(legendre_target(LegendreKind::ExtendedTilde) == ChartKind::MPi);
  CHECK(legendre_target(LegendreKind::Restricted) == ChartKind::J1PiStar);
}

TEST_CASE("legendre: Newton inversion") {
  const auto fp = make(1, 1, "1/2*v_0_0^2");
  const ReducedInverter inv(fp);
  const std::vector<double> xy{0.0, 0.0};
  const std::vector<double> p{3.0};
  CHECK(inv.solve(xy, p)[0] == doctest::Approx(3.0).epsilon(1e-12));

  const auto ch = make(1, 1, "cosh(v_0_0)");
  const ReducedInverter inv2(ch);
  const std::vector<double> p2{std::sinh(1.0)};
  CHECK(std::abs(inv2.solve(xy, p2)[0] - 1.0) < 1e-8);
}

TEST_CASE("legendre: symbolic inversion of the scalar field") {
  const auto sf = make(2, 1, "1/2*v_0_0^2 - 1/2*v_0_1^2");
  const auto v = invert_reduced_symbolic(sf);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == parse("p_0_0"));
  CHECK(v[1] == parse("-p_0_1"));
}

TEST_CASE("legendre: affine momenta") {
  const auto em = make(3, 3, kEm);
  const AffineMomenta a = affine_momenta(em);
  CHECK(rank(a.matrix) == 3);
  for (const Expr& b : a.offset) CHECK(b.is_zero());
  CHECK_THROWS_AS((void)affine_momenta(make(1, 1, "v_0_0^3")), InputError);
}

TEST_CASE("legendre: electromagnetic reduced constraints span the six linear relations") {
  const auto sys = make(3, 3, kEm);
  const ConstraintSet set = image_constraints(sys, LegendreKind::Reduced);
  CHECK(set.linear_count == 6);
  CHECK(set.constraints.size() == 6);
  // rows over p_A_nu at k = nu*3 + A
  auto row = [](std::initializer_list<int> ks) {
    std::vector<Rational> r(9, 0);
    for (int k : ks) r[static_cast<std::size_t>(k)] = 1;
    return r;
  };
  const QMatrix xi{row({0}), row({4}), row({8}), row({1, 3}), row({2, 6}), row({5, 7})};
  QMatrix both = xi;
  for (std::size_t i = 0; i < set.linear_count; ++i) both.push_back(set.linear_part[i]);
  CHECK(rank(xi) == 6);
  CHECK(rank(both) == 6);
  CHECK(check_constraints(sys, set).verdict == ZeroVerdict::ProvenZero);
}

TEST_CASE("legendre: electromagnetic extended constraints") {
  const auto sys = make(3, 3, kEm);
  const ConstraintSet tilde = image_constraints(sys, LegendreKind::ExtendedTilde);
  REQUIRE(tilde.constraints.size() == 7);
  CHECK(tilde.linear_count == 6);
  CHECK(same_up_to_sign(tilde.constraints[6], parse("pe + p_1_2^2 - p_0_2^2 - p_0_1^2")));
  CHECK(check_constraints(sys, tilde).verdict == ZeroVerdict::ProvenZero);

  const ConstraintSet hat = image_constraints(sys, LegendreKind::ExtendedHat);
  REQUIRE(hat.constraints.size() == 7);
  CHECK(same_up_to_sign(hat.constraints[6], parse("pe + 2*(p_1_2^2 - p_0_2^2 - p_0_1^2)")));
  CHECK(check_constraints(sys, hat).verdict == ZeroVerdict::ProvenZero);
}

TEST_CASE("legendre: the tilde constraint agrees with direct elimination") {
  // On the image, p_0_1 = (v_0_1 - v_1_0)/2 and so on; substitute into pe + L and compare.
  const auto sys = make(3, 3, kEm);
  const CoordinateMap f = legendre_map(sys, LegendreKind::ExtendedTilde);
  const Expr c = parse("pe + p_1_2^2 - p_0_2^2 - p_0_1^2");
  CHECK(f.pull(c).is_zero());
  CHECK_FALSE(f.pull(parse("pe + 2*(p_1_2^2 - p_0_2^2 - p_0_1^2)")).is_zero());
}

TEST_CASE("legendre: tilde pullback of the canonical form is Theta_L") {
  for (const auto& sys : {make(2, 1, "1/2*v_0_0^2 - 1/2*v_0_1^2"), make(3, 3, kEm)}) {
    const DiffForm pulled = pullback(legendre_map(sys, LegendreKind::ExtendedTilde),
                                     canonical_form(sys.bundle(), ChartKind::MPi));
    CHECK(pulled == poincare_cartan(sys).theta);
    const DiffForm hat = pullback(legendre_map(sys, LegendreKind::ExtendedHat),
                                  canonical_form(sys.bundle(), ChartKind::MPi));
    CHECK(hat == reduced_cartan_form(sys));
  }
}

TEST_CASE("legendre: projection compatibilities") {
  for (const auto& sys : {make(1, 1, "1/2*v_0_0^2"), make(3, 3, kEm)}) {
    for (const CompatCheck& c : check_projection_compat(sys)) {
      INFO(c.name << " " << c.detail);
      CHECK(c.pass);
    }
  }
}
