#pragma once

// Adapted coordinate charts on the bundle pi: E -> M and the spaces built on
// it, plus coordinate maps between charts.
//
// Coordinate order within each chart (flattened index nu*N + A for v and p,
// eta*m + nu for the generalized momenta p^nu_eta):
//
//   M         x
//   E         x, y
//   J1E       x, y, v
//   J1Estar   x, y, p, q
//   Pi        x, y, p
//   MPi       x, y, pe, p
//   J1PiStar  x, y, p

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multisym/expr.hpp"

namespace multisym {

enum class ChartKind { M, E, J1E, J1Estar, Pi, MPi, J1PiStar, Custom };

[[nodiscard]] std::string_view chart_kind_name(ChartKind k);

/// Closed-form dimension of a standard chart kind.
[[nodiscard]] int chart_dimension(ChartKind k, int m, int n);

class Chart {
 public:
  Chart(ChartKind kind, int m, int n);
  /// A chart with an arbitrary coordinate list. Its first `m` coordinates are
  /// treated as base coordinates.
  static Chart custom(std::string name, std::vector<Symbol> coordinates, int m = 0);

  [[nodiscard]] ChartKind kind() const { return data_->kind; }
  [[nodiscard]] int base_dim() const { return data_->m; }
  [[nodiscard]] int fiber_dim() const { return data_->n; }
  [[nodiscard]] int dim() const { return static_cast<int>(data_->coords.size()); }
  [[nodiscard]] std::span<const Symbol> coordinates() const { return data_->coords; }
  [[nodiscard]] const Symbol& coordinate(int i) const {
    return data_->coords.at(static_cast<std::size_t>(i));
  }
  [[nodiscard]] std::optional<int> index_of(const Symbol& s) const;
  [[nodiscard]] bool contains(const Symbol& s) const { return index_of(s).has_value(); }
  [[nodiscard]] const std::string& name() const { return data_->name; }

  friend bool operator==(const Chart& a, const Chart& b);

 private:
  struct Data {
    ChartKind kind = ChartKind::Custom;
    int m = 0;
    int n = 0;
    std::string name;
    std::vector<Symbol> coords;
    std::map<Symbol, int> index;
  };
  explicit Chart(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

/// Parse an expression whose identifiers must be coordinates of `chart`.
[[nodiscard]] Expr parse(std::string_view text, const Chart& chart);

/// Flattened position of v^A_nu / p^nu_A among the velocity or momentum coordinates.
[[nodiscard]] inline int jet_index(int a, int nu, int n) { return nu * n + a; }

/// A map between charts: one image expression (in source symbols) per target coordinate.
class CoordinateMap {
 public:
  CoordinateMap(Chart source, Chart target, std::vector<Expr> images);
  static CoordinateMap identity(const Chart& chart);

  [[nodiscard]] const Chart& source() const { return source_; }
  [[nodiscard]] const Chart& target() const { return target_; }
  [[nodiscard]] std::span<const Expr> images() const { return images_; }
  [[nodiscard]] const Expr& image(int i) const { return images_.at(static_cast<std::size_t>(i)); }
  [[nodiscard]] const Expr& image(const Symbol& target_coordinate) const;

  /// Assignment target-coordinate -> image, for substitution-based pullback.
  [[nodiscard]] Assignment assignment() const;
  /// F^* f for a function f on the target chart.
  [[nodiscard]] Expr pull(const Expr& f) const;

 private:
  Chart source_;
  Chart target_;
  std::vector<Expr> images_;
};

/// outer ∘ inner (apply `inner` first). Requires inner.target == outer.source.
[[nodiscard]] CoordinateMap compose(const CoordinateMap& outer, const CoordinateMap& inner);

/// nullopt when the maps agree image-by-image in normal form; otherwise the
/// name of the first target coordinate whose images differ.
[[nodiscard]] std::optional<std::string> first_difference(const CoordinateMap& a,
                                                          const CoordinateMap& b);

struct BundleSpec {
  int m = 1;
  int n = 1;

  /// Validates m, N >= 1.
  static BundleSpec make(int m, int n);
  [[nodiscard]] Chart chart(ChartKind kind) const { return {kind, m, n}; }
};

}  // namespace multisym
