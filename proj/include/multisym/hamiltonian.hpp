#pragma once

// Hamiltonian systems on Pi (or J1PiStar): Hamilton-Cartan forms, sections of
// delta, connection-induced splittings and the Hamilton-De Donder-Weyl equations.

#include <optional>
#include <span>
#include <vector>

#include "multisym/bundle.hpp"
#include "multisym/lagrangian.hpp"
#include "multisym/legendre.hpp"

namespace multisym {

class HamiltonianSystem {
 public:
  /// Throws InputError if H uses symbols outside the chart of `kind`.
  HamiltonianSystem(BundleSpec bundle, Expr h, ChartKind kind = ChartKind::Pi);

  [[nodiscard]] const BundleSpec& bundle() const { return bundle_; }
  [[nodiscard]] ChartKind kind() const { return kind_; }
  [[nodiscard]] Chart chart() const { return bundle_.chart(kind_); }
  /// The local Hamiltonian function H.
  [[nodiscard]] const Expr& hamiltonian() const { return h_; }

  [[nodiscard]] const std::optional<Connection>& connection() const { return connection_; }
  /// H^nabla, with H = H^nabla + sum p Gamma.
  [[nodiscard]] const std::optional<Expr>& global_hamiltonian() const { return global_; }
  [[nodiscard]] const std::optional<ConstraintSet>& constraints() const { return constraints_; }

  /// Attaches a connection and the matching H^nabla; throws if the splitting does not hold.
  void set_connection(const Connection& c, const Expr& global);
  void set_constraints(ConstraintSet c) { constraints_ = std::move(c); }

 private:
  friend HamiltonianSystem psi_transfer(const HamiltonianSystem& h);
  BundleSpec bundle_;
  ChartKind kind_;
  Expr h_;
  std::optional<Connection> connection_;
  std::optional<Expr> global_;
  std::optional<ConstraintSet> constraints_;
};

/// Theta_h = p dy ^ d^{m-1}x_nu - H d^m x, Omega_h = -d Theta_h.
[[nodiscard]] CartanForms hamilton_cartan(const HamiltonianSystem& h);

/// The canonical member of the section class: p^nu_eta = -(H/m) delta^nu_eta.
[[nodiscard]] CoordinateMap hamiltonian_section(const HamiltonianSystem& h);

/// Linear section induced by a connection: p^nu_eta = -p^nu_A Gamma^A_eta.
[[nodiscard]] CoordinateMap connection_section(const BundleSpec& bundle, const Connection& c);
/// p^nu_A dy^A ^ d^{m-1}x_nu - p^nu_A Gamma^A_nu d^m x on Pi.
[[nodiscard]] DiffForm connection_section_form(const BundleSpec& bundle, const Connection& c);

/// H^nabla := global, H := global + sum p Gamma.
[[nodiscard]] HamiltonianSystem compose_density(const BundleSpec& bundle, const Connection& c,
                                                const Expr& global);

/// H = p v - L at v = FL^{-1}(p), for quadratic L with constant invertible Hessian.
[[nodiscard]] HamiltonianSystem from_hyperregular(const LagrangianSystem& sys,
                                                  const std::optional<Connection>& c = std::nullopt);

/// H_0^nabla from E^nabla_L on the image of the reduced map, carrying the
/// reduced constraints. Regular theories give the hyper-regular Hamiltonian.
[[nodiscard]] HamiltonianSystem restrict_almost_regular(const LagrangianSystem& sys,
                                                        const Connection& c);

/// FL_0^* H_0^nabla - E^nabla_L, as a function on J1E.
[[nodiscard]] Expr almost_regular_defect(const LagrangianSystem& sys, const HamiltonianSystem& h);

/// H(x, y, p) for a Lagrangian whose reduced map is only inverted numerically.
class NumericHamiltonian {
 public:
  explicit NumericHamiltonian(const LagrangianSystem& sys);
  /// `xy` holds x then y; `p` the momenta in flattened order.
  [[nodiscard]] double operator()(std::span<const double> xy, std::span<const double> p) const;
  [[nodiscard]] std::vector<double> velocities(std::span<const double> xy, std::span<const double> p) const;

 private:
  ReducedInverter inverter_;
  CompiledExpr lagrangian_;
};

enum class HdwMode { Local, Covariant };

/// The HDW system as dy^A/dx^nu = flux_k and sum_nu dp^nu_A/dx^nu = -source_A,
/// with k = nu*N + A.
struct HdwOperator {
  HdwMode mode = HdwMode::Local;
  int m = 1;
  int n = 1;
  std::vector<Expr> flux;
  std::vector<Expr> source;
};

/// Covariant mode requires a connection and H^nabla.
[[nodiscard]] HdwOperator hdw_residual(const HamiltonianSystem& h, HdwMode mode);

/// A section of Pi over M in closed form: y^A(x), p^nu_A(x) at k = nu*N + A.
struct PiSection {
  PiSection(int m, std::vector<Expr> y, std::vector<Expr> p);
  int m;
  std::vector<Expr> y;
  std::vector<Expr> p;
};

/// The section as a coordinate map M -> Pi.
[[nodiscard]] CoordinateMap section_map(const BundleSpec& bundle, const PiSection& psi);

/// mN residuals dy/dx - flux, then N residuals sum dp/dx + source, on the section.
[[nodiscard]] std::vector<Expr> hdw_residual_on(const HdwOperator& op, const PiSection& psi);

/// j1* Z for Z = beta^A d/dy^A: beta on y, -p^nu_B dbeta^B/dy^A on p^nu_A.
[[nodiscard]] VectorFieldExpr lift_vertical_field(const BundleSpec& bundle,
                                                  const std::vector<Expr>& beta);

/// Coordinate-identity transfer between Pi and J1PiStar.
[[nodiscard]] HamiltonianSystem psi_transfer(const HamiltonianSystem& h);

}  // namespace multisym
