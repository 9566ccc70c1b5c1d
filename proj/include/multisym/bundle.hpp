#pragma once

// Canonical forms of the multimomentum bundles, the natural projections
// between them, and connections on E.

#include <string>
#include <vector>

#include "multisym/chart.hpp"
#include "multisym/forms.hpp"

namespace multisym {

/// Components Gamma^A_nu, stored at jet_index(A, nu, N). Functions of (x, y) only.
class Connection {
 public:
  static Connection trivial(int m, int n);

  [[nodiscard]] int base_dim() const { return m_; }
  [[nodiscard]] int fiber_dim() const { return n_; }
  [[nodiscard]] const Expr& gamma(int a, int nu) const {
    return gamma_.at(static_cast<std::size_t>(jet_index(a, nu, n_)));
  }
  [[nodiscard]] const std::vector<Expr>& components() const { return gamma_; }
  [[nodiscard]] bool is_trivial() const;

  /// sum p^nu_A Gamma^A_nu, a function on Pi.
  [[nodiscard]] Expr momentum_contraction() const;
  /// sum w_k Gamma_k over the flattened index k = jet_index(A, nu, N).
  [[nodiscard]] Expr contract(const std::vector<Expr>& weights) const;

 private:
  friend Connection make_connection(int m, int n, std::vector<Expr> gamma);
  Connection(int m, int n, std::vector<Expr> g) : m_(m), n_(n), gamma_(std::move(g)) {}
  int m_;
  int n_;
  std::vector<Expr> gamma_;
};

/// Validates m*N components depending on base and field coordinates only.
[[nodiscard]] Connection make_connection(int m, int n, std::vector<Expr> gamma);

/// Theta-hat on J1Estar or Theta on MPi.
[[nodiscard]] DiffForm canonical_form(const BundleSpec& bundle, ChartKind kind);

/// sum p^nu_A dy^A ^ d^{m-1}x_nu on any chart carrying x, y and p.
[[nodiscard]] DiffForm momentum_part(const Chart& chart);

enum class Projection { Delta, Iota0, Mu, Psi, PsiInverse };

[[nodiscard]] std::string_view projection_name(Projection p);

/// delta: J1Estar -> Pi, iota0: J1Estar -> MPi, mu: MPi -> J1PiStar,
/// psi: J1PiStar -> Pi, psi_inverse: Pi -> J1PiStar.
[[nodiscard]] CoordinateMap projection_map(const BundleSpec& bundle, Projection p);

/// A section of delta (Pi -> J1Estar) with prescribed generalized momenta q
/// (row-major, eta outer) as functions on Pi.
[[nodiscard]] CoordinateMap delta_section(const BundleSpec& bundle, const std::vector<Expr>& q);

/// Change of chart kind between charts with identical coordinate lists
/// (Pi and J1PiStar).
[[nodiscard]] CoordinateMap relabel(const Chart& source, const Chart& target);

}  // namespace multisym
