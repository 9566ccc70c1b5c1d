#pragma once

// Dense linear algebra over exact rationals, for the small constant matrices
// (Hessians, constraint matrices) that appear in the symbolic derivations.

#include <optional>
#include <vector>

#include "multisym/expr.hpp"

namespace multisym {

using QMatrix = std::vector<std::vector<Rational>>;

[[nodiscard]] QMatrix zeros(std::size_t rows, std::size_t cols);
[[nodiscard]] QMatrix identity_matrix(std::size_t n);
[[nodiscard]] QMatrix transpose(const QMatrix& a);
[[nodiscard]] QMatrix multiply(const QMatrix& a, const QMatrix& b);

struct Rref {
  QMatrix reduced;
  std::vector<std::size_t> pivots;  // pivot column of each nonzero row
};

/// Reduced row echelon form with columns scanned in `column_order`
/// (natural order when empty).
[[nodiscard]] Rref rref(QMatrix a, const std::vector<std::size_t>& column_order = {});
[[nodiscard]] std::size_t rank(const QMatrix& a);
/// Basis of {v : a v = 0}, one vector per row.
[[nodiscard]] QMatrix null_space(const QMatrix& a);
/// Basis of {w : w^T a = 0}, one vector per row.
[[nodiscard]] QMatrix left_null_space(const QMatrix& a);
[[nodiscard]] std::optional<QMatrix> inverse(const QMatrix& a);
/// G with a G a = a, built from a nonsingular r x r submatrix.
[[nodiscard]] QMatrix generalized_inverse(const QMatrix& a);

}  // namespace multisym
