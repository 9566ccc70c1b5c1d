#pragma once

// Legendre maps J1E -> multimomentum charts, their inversion and the
// constraints cutting out their images.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multisym/exact_linalg.hpp"
#include "multisym/lagrangian.hpp"

namespace multisym {

enum class LegendreKind { Generalized, Reduced, ExtendedHat, ExtendedTilde, Restricted };

[[nodiscard]] std::string_view legendre_name(LegendreKind k);
[[nodiscard]] ChartKind legendre_target(LegendreKind k);

[[nodiscard]] CoordinateMap legendre_map(const LagrangianSystem& sys, LegendreKind kind);

/// Newton inversion of the reduced map at fixed (x, y).
class ReducedInverter {
 public:
  explicit ReducedInverter(const LagrangianSystem& sys, double tol = 1e-10, int max_iterations = 50);

  /// `xy` holds x^0..x^{m-1}, y^0..y^{N-1}; `p` the momenta in flattened order.
  /// Starts from v = 0 unless `start` is given. Throws NumericError on failure.
  [[nodiscard]] std::vector<double> solve(std::span<const double> xy, std::span<const double> p,
                                          std::span<const double> start = {}) const;
  /// Momenta at (x, y, v).
  [[nodiscard]] std::vector<double> momenta_at(std::span<const double> xy,
                                               std::span<const double> v) const;

 private:
  int m_, n_;
  double tol_;
  int max_iterations_;
  std::vector<CompiledExpr> momenta_;
  std::vector<std::vector<CompiledExpr>> hessian_;
};

/// v = M^{-1} (p - b) for L quadratic in v with constant invertible Hessian.
/// Images are functions on Pi, in flattened order.
[[nodiscard]] std::vector<Expr> invert_reduced_symbolic(const LagrangianSystem& sys);

/// Momenta written as p = M v + b with M constant.
struct AffineMomenta {
  QMatrix matrix;
  std::vector<Expr> offset;  // functions of (x, y)
};

/// Throws InputError when L is not of degree <= 2 in v or M is not constant.
[[nodiscard]] AffineMomenta affine_momenta(const LagrangianSystem& sys);

/// Eliminates the lex-greatest momenta using linear relations w . (p - b) = 0.
class LinearReducer {
 public:
  LinearReducer() = default;
  LinearReducer(const QMatrix& relations, const std::vector<Expr>& offset, int m, int n);

  [[nodiscard]] Expr reduce(const Expr& e) const;
  /// Relations in reduced row echelon form, pivot first.
  [[nodiscard]] const std::vector<Expr>& constraints() const { return constraints_; }
  [[nodiscard]] const QMatrix& linear_part() const { return linear_part_; }
  [[nodiscard]] const Assignment& eliminations() const { return eliminate_; }

 private:
  std::vector<Expr> constraints_;
  QMatrix linear_part_;
  Assignment eliminate_;
};

/// Data for eliminating v on the image of an affine reduced map:
/// v := G (p - b) with p reduced modulo the linear constraints.
struct ImageElimination {
  AffineMomenta affine;
  LinearReducer reducer;
  QMatrix generalized_inverse;
  Assignment velocities;  // v^A_nu -> function of (x, y, p)
};

[[nodiscard]] ImageElimination image_elimination(const LagrangianSystem& sys);

struct ConstraintSet {
  Chart chart;
  LegendreKind kind;
  std::vector<Expr> constraints;
  QMatrix linear_part;            // rows over the momenta, flattened order
  std::size_t linear_count = 0;   // the first linear_count constraints are linear
  std::vector<std::string> notes;
};

[[nodiscard]] ConstraintSet image_constraints(const LagrangianSystem& sys, LegendreKind kind);

/// Substitutes the Legendre images into every constraint.
[[nodiscard]] ZeroTest check_constraints(const LagrangianSystem& sys, const ConstraintSet& set);

struct CompatCheck {
  std::string name;
  bool pass = false;
  std::string detail;  // first differing coordinate on failure
};

[[nodiscard]] std::vector<CompatCheck> check_projection_compat(const LagrangianSystem& sys);

}  // namespace multisym
