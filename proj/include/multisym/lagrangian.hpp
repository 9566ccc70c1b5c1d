#pragma once

// First-order Lagrangian field theories on J1E.
//
// Velocities and momenta are flattened as k = nu*N + A throughout; the
// Hessian rows and columns use the same order.

#include <optional>
#include <span>
#include <vector>

#include "multisym/bundle.hpp"
#include "multisym/exact_linalg.hpp"
#include "multisym/chart.hpp"
#include "multisym/forms.hpp"

namespace multisym {

class LagrangianSystem {
 public:
  /// Throws InputError if L uses symbols outside the J1E chart.
  LagrangianSystem(BundleSpec bundle, Expr lagrangian);

  [[nodiscard]] const BundleSpec& bundle() const { return bundle_; }
  [[nodiscard]] const Chart& chart() const { return chart_; }
  [[nodiscard]] const Expr& lagrangian() const { return l_; }
  [[nodiscard]] int jet_count() const { return bundle_.m * bundle_.n; }
  /// v^A_nu at k = nu*N + A.
  [[nodiscard]] const std::vector<Symbol>& velocities() const { return velocities_; }

 private:
  BundleSpec bundle_;
  Chart chart_;
  Expr l_;
  std::vector<Symbol> velocities_;
};

using ExprMatrix = std::vector<std::vector<Expr>>;

/// dL/dv^A_nu at k = nu*N + A.
[[nodiscard]] std::vector<Expr> momenta(const LagrangianSystem& sys);
[[nodiscard]] ExprMatrix hessian(const LagrangianSystem& sys);
/// Exact rational matrix when every Hessian entry is a rational constant.
[[nodiscard]] std::optional<QMatrix> constant_hessian(const LagrangianSystem& sys);

enum class Regularity { Regular, Singular, Indeterminate };
[[nodiscard]] std::string_view regularity_name(Regularity r);

struct RegularityReport {
  Regularity classification = Regularity::Indeterminate;
  int dimension = 0;                 // mN
  std::vector<int> sampled_ranks;    // one per sample point
  std::optional<int> exact_rank;     // constant Hessian only
  bool hyperregular_certified = false;
  int kernel_dimension = -1;         // mN - rank when constant
};

/// Numeric rank at `samples` random jet points in [-2, 2], or at the given
/// points when `points` is non-empty. Singular values below 1e-9 * max count as zero.
[[nodiscard]] RegularityReport classify_regularity(const LagrangianSystem& sys, int samples = 16,
                                                   std::span<const Point> points = {},
                                                   std::uint64_t seed = 0x1ea5);

/// Numeric rank by SVD with relative threshold.
[[nodiscard]] int numeric_rank(const std::vector<std::vector<double>>& a, double rel_tol = 1e-9);

struct CartanForms {
  DiffForm theta;
  DiffForm omega;
};

/// Theta_L = dL/dv dy ^ d^{m-1}x_nu - (v dL/dv - L) d^m x, Omega_L = -d Theta_L.
[[nodiscard]] CartanForms poincare_cartan(const LagrangianSystem& sys);
/// theta_L = Theta_L - L d^m x.
[[nodiscard]] DiffForm reduced_cartan_form(const LagrangianSystem& sys);

/// E^nabla_L = sum dL/dv (v - Gamma) - L.
[[nodiscard]] Expr energy_density(const LagrangianSystem& sys, const Connection& connection);

/// phi^A(x), one expression per field in base coordinates.
struct SectionExpr {
  SectionExpr(int m, std::vector<Expr> components);
  int m;
  std::vector<Expr> components;
};

/// Pointwise images of the jet prolongation: y^A -> phi^A, v^A_nu -> d phi^A / dx^nu.
[[nodiscard]] Assignment jet_prolongation(const SectionExpr& phi, int n);

/// dL/dy^A - sum_nu d/dx^nu (dL/dv^A_nu) on j1 phi, one per field.
[[nodiscard]] std::vector<Expr> euler_lagrange_residual(const LagrangianSystem& sys,
                                                        const SectionExpr& phi);

}  // namespace multisym
