#include "multisym/exact_linalg.hpp"

#include <numeric>

#include "multisym/error.hpp"

namespace multisym {

QMatrix zeros(std::size_t rows, std::size_t cols) {
  return QMatrix(rows, std::vector<Rational>(cols, Rational(0)));
}

QMatrix identity_matrix(std::size_t n) {
  QMatrix out = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) out[i][i] = 1;
  return out;
}

namespace {
std::size_t cols_of(const QMatrix& a) { return a.empty() ? 0 : a.front().size(); }
}  // namespace

QMatrix transpose(const QMatrix& a) {
  QMatrix out = zeros(cols_of(a), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) out[j][i] = a[i][j];
  }
  return out;
}

QMatrix multiply(const QMatrix& a, const QMatrix& b) {
  if (cols_of(a) != b.size()) throw InputError("matrix shape mismatch");
  QMatrix out = zeros(a.size(), cols_of(b));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

Rref rref(QMatrix a, const std::vector<std::size_t>& column_order) {
  const std::size_t cols = cols_of(a);
  std::vector<std::size_t> order = column_order;
  if (order.empty()) {
    order.resize(cols);
    std::iota(order.begin(), order.end(), 0);
  }
  Rref out;
  std::size_t row = 0;
  for (std::size_t c : order) {
    if (row == a.size()) break;
    std::size_t piv = row;
    while (piv < a.size() && a[piv][c] == 0) ++piv;
    if (piv == a.size()) continue;
    std::swap(a[row], a[piv]);
    const Rational lead = a[row][c];
    for (auto& x : a[row]) x /= lead;
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (r == row || a[r][c] == 0) continue;
      const Rational f = a[r][c];
      for (std::size_t j = 0; j < cols; ++j) a[r][j] -= f * a[row][j];
    }
    out.pivots.push_back(c);
    ++row;
  }
  a.resize(row);
  out.reduced = std::move(a);
  return out;
}

std::size_t rank(const QMatrix& a) { return rref(a).pivots.size(); }

QMatrix null_space(const QMatrix& a) {
  const std::size_t cols = cols_of(a);
  const Rref r = rref(a);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : r.pivots) is_pivot[c] = true;
  QMatrix out;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[f] = 1;
    for (std::size_t i = 0; i < r.pivots.size(); ++i) v[r.pivots[i]] = -r.reduced[i][f];
    out.push_back(std::move(v));
  }
  return out;
}

QMatrix left_null_space(const QMatrix& a) { return null_space(transpose(a)); }

std::optional<QMatrix> inverse(const QMatrix& a) {
  const std::size_t n = a.size();
  if (cols_of(a) != n) throw InputError("inverse of a non-square matrix");
  QMatrix aug = zeros(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug[i][j] = a[i][j];
    aug[i][n + i] = 1;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rref r = rref(std::move(aug), order);
  if (r.pivots.size() != n) return std::nullopt;
  QMatrix out = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i][j] = r.reduced[i][n + j];
  }
  return out;
}

QMatrix generalized_inverse(const QMatrix& a) {
  const std::vector<std::size_t> cols = rref(a).pivots;
  const std::vector<std::size_t> rows = rref(transpose(a)).pivots;
  const std::size_t r = cols.size();
  QMatrix sub = zeros(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) sub[i][j] = a[rows[i]][cols[j]];
  }
  const auto inv = inverse(sub);
  if (!inv) throw NumericError("rank-revealing submatrix is singular");
  QMatrix g = zeros(cols_of(a), a.size());
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) g[cols[i]][rows[j]] = (*inv)[i][j];
  }
  return g;
}

}  // namespace multisym
