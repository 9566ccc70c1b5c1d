#pragma once

// Differential forms on a chart, stored over the coordinate differentials.
//
// A k-form is a map from strictly increasing index tuples (positions in the
// chart's coordinate list) to coefficient expressions. Structurally zero
// coefficients are never stored.

#include <map>
#include <string>
#include <vector>

#include "multisym/chart.hpp"
#include "multisym/expr.hpp"

namespace multisym {

using IndexTuple = std::vector<int>;

class DiffForm {
 public:
  DiffForm(Chart chart, int degree);

  static DiffForm scalar(Chart chart, Expr f);
  /// d(coordinate i)
  static DiffForm differential(Chart chart, int i);
  static DiffForm differential(const Chart& chart, const Symbol& s);

  [[nodiscard]] const Chart& chart() const { return chart_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const std::map<IndexTuple, Expr>& terms() const { return terms_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }

  /// Coefficient at a strictly increasing tuple; zero when absent.
  [[nodiscard]] Expr coefficient(const IndexTuple& tuple) const;
  /// Adds c * dx^{i1} ^ ... ^ dx^{ik} for an arbitrary (unsorted) tuple.
  void add(IndexTuple tuple, const Expr& c);

  DiffForm& operator+=(const DiffForm& other);
  DiffForm& operator-=(const DiffForm& other);
  friend DiffForm operator+(DiffForm a, const DiffForm& b) { return a += b; }
  friend DiffForm operator-(DiffForm a, const DiffForm& b) { return a -= b; }
  DiffForm operator-() const;
  friend DiffForm operator*(const Expr& f, const DiffForm& a);

  friend bool operator==(const DiffForm& a, const DiffForm& b);

  /// "c1 dx_0^dy_0 + c2 dx_1^dy_0"; "0" for the zero form.
  [[nodiscard]] std::string str() const;

 private:
  Chart chart_;
  int degree_;
  std::map<IndexTuple, Expr> terms_;
};

/// Components on the chart coordinates, in chart order.
struct VectorFieldExpr {
  VectorFieldExpr(Chart chart, std::vector<Expr> components);
  /// d/d(coordinate i)
  static VectorFieldExpr coordinate(const Chart& chart, int i);

  Chart chart;
  std::vector<Expr> components;
};

[[nodiscard]] DiffForm wedge(const DiffForm& a, const DiffForm& b);
[[nodiscard]] DiffForm exterior_derivative(const DiffForm& f);
[[nodiscard]] DiffForm interior_product(const VectorFieldExpr& x, const DiffForm& f);
/// F^* f, where f lives on F.target(); the result lives on F.source().
[[nodiscard]] DiffForm pullback(const CoordinateMap& map, const DiffForm& f);

/// d^m x = dx^0 ^ ... ^ dx^{m-1} on a chart whose first m coordinates are x.
[[nodiscard]] DiffForm volume_form(const Chart& chart);
/// d^{m-1}x_nu = i(d/dx^nu) d^m x.
[[nodiscard]] DiffForm volume_form_minus(const Chart& chart, int nu);

/// Aggregated zero test over all coefficients.
[[nodiscard]] ZeroTest is_zero(const DiffForm& f, int samples = 64);

}  // namespace multisym
