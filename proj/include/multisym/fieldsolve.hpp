#pragma once

// Sampled sections on rectangular grids over the base, finite-difference
// prolongations and residuals, and method-of-lines evolution for m <= 2.
//
// Arrays are flattened row-major with x^0 outermost. A periodic dimension
// includes both endpoints; index n-1 is identified with index 0.

#include <cstdint>
#include <span>
#include <vector>

#include "multisym/hamiltonian.hpp"
#include "multisym/lagrangian.hpp"

namespace multisym {

class Grid {
 public:
  Grid(std::vector<double> lower, std::vector<double> upper, std::vector<int> shape,
       std::vector<bool> periodic = {});

  [[nodiscard]] int dim() const { return static_cast<int>(shape_.size()); }
  [[nodiscard]] const std::vector<double>& lower() const { return lower_; }
  [[nodiscard]] const std::vector<double>& upper() const { return upper_; }
  [[nodiscard]] const std::vector<int>& shape() const { return shape_; }
  [[nodiscard]] bool periodic(int nu) const { return periodic_[static_cast<std::size_t>(nu)]; }
  [[nodiscard]] double spacing(int nu) const;
  [[nodiscard]] double coordinate(int nu, int i) const;
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::vector<int> unravel(std::size_t flat) const;
  [[nodiscard]] std::size_t ravel(std::span<const int> index) const;
  /// Off the boundary in non-periodic dimensions; drops the duplicate endpoint in periodic ones.
  [[nodiscard]] bool is_interior(std::span<const int> index) const;

 private:
  std::vector<double> lower_, upper_;
  std::vector<int> shape_;
  std::vector<bool> periodic_;
  std::size_t size_ = 1;
};

/// Values of every non-base chart coordinate at every grid point.
class GridSection {
 public:
  GridSection(Chart chart, Grid grid);

  [[nodiscard]] const Chart& chart() const { return chart_; }
  [[nodiscard]] const Grid& grid() const { return grid_; }
  /// Non-base coordinates, in chart order.
  [[nodiscard]] std::span<const Symbol> fiber_coordinates() const {
    return chart_.coordinates().subspan(static_cast<std::size_t>(chart_.base_dim()));
  }
  [[nodiscard]] std::vector<double>& field(const Symbol& s);
  [[nodiscard]] const std::vector<double>& field(const Symbol& s) const;
  [[nodiscard]] std::vector<std::vector<double>>& fields() { return fields_; }
  [[nodiscard]] const std::vector<std::vector<double>>& fields() const { return fields_; }
  /// Chart coordinate values at a grid point, in chart order.
  void point(std::size_t flat, std::vector<double>& out) const;

 private:
  std::size_t slot(const Symbol& s) const;
  Chart chart_;
  Grid grid_;
  std::vector<std::vector<double>> fields_;
};

/// Samples closed-form components (functions of x) for each fiber coordinate.
[[nodiscard]] GridSection sample_section(const Chart& chart, const Grid& grid,
                                         const std::vector<Expr>& components);

/// Second-order central differences, one-sided second order at non-periodic boundaries.
[[nodiscard]] std::vector<double> grid_derivative(const Grid& grid, std::span<const double> f, int nu);

/// E -> J1E.
[[nodiscard]] GridSection prolong(const GridSection& phi);
/// E -> Pi through the reduced Legendre map.
[[nodiscard]] GridSection legendre_prolong(const LagrangianSystem& sys, const GridSection& phi);

struct Norms {
  double max = 0.0;
  double rms = 0.0;
};

/// HDW residuals on a Pi section, over interior points.
[[nodiscard]] Norms residual_norm(const HdwOperator& op, const GridSection& psi);
/// Euler-Lagrange residuals on an E section, over interior points.
[[nodiscard]] Norms euler_lagrange_norm(const LagrangianSystem& sys, const GridSection& phi);
/// psi^* i(j1* Z) Omega_h on the grid, for Z = beta^A d/dy^A.
[[nodiscard]] Norms lift_criterion_norm(const HamiltonianSystem& h, const std::vector<Expr>& beta,
                                        const GridSection& psi);

/// Closed-form initial data on the line x^0 = lower[0]: y^A and either dy^A/dx^0
/// (Lagrangian evolution) or p^0_A (Hamiltonian evolution).
struct InitialData {
  std::vector<Expr> y;
  std::vector<Expr> rate;
};

/// Classic RK4 in x^0. Needs m <= 2, a hyper-regular system and, for m = 2,
/// a periodic x^1 with dx^0 <= 0.5 dx^1. Returns a section of E.
[[nodiscard]] GridSection solve_evolution(const LagrangianSystem& sys, const InitialData& data,
                                          const Grid& grid);
/// As above for the HDW equations; returns a section of Pi.
[[nodiscard]] GridSection solve_evolution(const HamiltonianSystem& h, const InitialData& data,
                                          const Grid& grid);

/// Trapezoidal quadrature over the grid.
[[nodiscard]] double integrate(const Grid& grid, std::span<const double> f);

[[nodiscard]] double action_lagrangian(const LagrangianSystem& sys, const SectionExpr& phi,
                                       const Grid& grid);
[[nodiscard]] double action_lagrangian(const LagrangianSystem& sys, const GridSection& phi);
/// Integral of psi^* Theta_h = (p dy/dx - H) d^m x.
[[nodiscard]] double action_hamiltonian(const HamiltonianSystem& h, const PiSection& psi,
                                        const Grid& grid);
[[nodiscard]] double action_hamiltonian(const HamiltonianSystem& h, const GridSection& psi);

/// max |a - b| of one field over all grid points.
[[nodiscard]] double max_difference(const GridSection& a, const GridSection& b, const Symbol& s);
/// Adds amplitude * U(-1, 1) noise to every field (periodic endpoints kept identified).
[[nodiscard]] GridSection perturb(const GridSection& s, double amplitude, std::uint64_t seed);

/// H along an m = 1 Pi section, one value per grid point.
[[nodiscard]] std::vector<double> energy_along(const HamiltonianSystem& h, const GridSection& psi);

}  // namespace multisym
