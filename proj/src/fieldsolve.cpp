#include "multisym/fieldsolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "multisym/error.hpp"

namespace multisym {

Grid::Grid(std::vector<double> lower, std::vector<double> upper, std::vector<int> shape,
           std::vector<bool> periodic)
    : lower_(std::move(lower)), upper_(std::move(upper)), shape_(std::move(shape)), periodic_(std::move(periodic)) {
  if (periodic_.empty()) periodic_.assign(shape_.size(), false);
  if (lower_.size() != shape_.size() || upper_.size() != shape_.size() || periodic_.size() != shape_.size()) {
    throw InputError("grid bounds, shape and periodic flags must have the same length");
  }
  if (shape_.empty()) throw InputError("grid needs at least one dimension");
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (shape_[i] < 3) throw InputError("grid needs at least 3 points per dimension");
    if (!(upper_[i] > lower_[i])) throw InputError("grid upper bound must exceed lower bound");
    size_ *= static_cast<std::size_t>(shape_[i]);
  }
}

double Grid::spacing(int nu) const {
  const auto i = static_cast<std::size_t>(nu);
  return (upper_[i] - lower_[i]) / (shape_[i] - 1);
}

double Grid::coordinate(int nu, int i) const {
  return lower_[static_cast<std::size_t>(nu)] + i * spacing(nu);
}

std::vector<int> Grid::unravel(std::size_t flat) const {
  std::vector<int> idx(shape_.size());
  for (std::size_t d = shape_.size(); d-- > 0;) {
    idx[d] = static_cast<int>(flat % static_cast<std::size_t>(shape_[d]));
    flat /= static_cast<std::size_t>(shape_[d]);
  }
  return idx;
}

std::size_t Grid::ravel(std::span<const int> index) const {
  std::size_t flat = 0;
  for (std::size_t d = 0; d < shape_.size(); ++d) {
    flat = flat * static_cast<std::size_t>(shape_[d]) + static_cast<std::size_t>(index[d]);
  }
  return flat;
}

bool Grid::is_interior(std::span<const int> index) const {
  for (std::size_t d = 0; d < shape_.size(); ++d) {
    if (periodic_[d]) {
      if (index[d] == shape_[d] - 1) return false;
    } else if (index[d] == 0 || index[d] == shape_[d] - 1) {
      return false;
    }
  }
  return true;
}

GridSection::GridSection(Chart chart, Grid grid) : chart_(std::move(chart)), grid_(std::move(grid)) {
  if (chart_.base_dim() != grid_.dim()) {
    throw InputError("grid dimension " + std::to_string(grid_.dim()) + " does not match base dimension " +
                     std::to_string(chart_.base_dim()));
  }
  fields_.assign(static_cast<std::size_t>(chart_.dim() - chart_.base_dim()), std::vector<double>(grid_.size()));
}

std::size_t GridSection::slot(const Symbol& s) const {
  auto i = chart_.index_of(s);
  if (!i || *i < chart_.base_dim()) throw InputError(s.name() + " is not a fiber coordinate of " + chart_.name());
  return static_cast<std::size_t>(*i - chart_.base_dim());
}

std::vector<double>& GridSection::field(const Symbol& s) { return fields_[slot(s)]; }
const std::vector<double>& GridSection::field(const Symbol& s) const { return fields_[slot(s)]; }

void GridSection::point(std::size_t flat, std::vector<double>& out) const {
  out.resize(static_cast<std::size_t>(chart_.dim()));
  const auto idx = grid_.unravel(flat);
  for (int nu = 0; nu < grid_.dim(); ++nu) out[static_cast<std::size_t>(nu)] = grid_.coordinate(nu, idx[static_cast<std::size_t>(nu)]);
  for (std::size_t f = 0; f < fields_.size(); ++f) out[static_cast<std::size_t>(grid_.dim()) + f] = fields_[f][flat];
}

namespace {

std::vector<Symbol> base_symbols(int m) {
  std::vector<Symbol> out;
  for (int nu = 0; nu < m; ++nu) out.push_back(Symbol::base(nu));
  return out;
}

std::vector<double> grid_point(const Grid& grid, std::size_t flat) {
  const auto idx = grid.unravel(flat);
  std::vector<double> x(idx.size());
  for (std::size_t d = 0; d < idx.size(); ++d) x[d] = grid.coordinate(static_cast<int>(d), idx[d]);
  return x;
}

std::vector<double> sample(const Grid& grid, const Expr& e) {
  const auto base = base_symbols(grid.dim());
  const CompiledExpr f(e, base);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid_point(grid, i));
  return out;
}

std::vector<std::vector<double>> all_derivatives(const GridSection& s, int nu) {
  std::vector<std::vector<double>> out;
  for (const auto& f : s.fields()) out.push_back(grid_derivative(s.grid(), f, nu));
  return out;
}

double det_small(const std::vector<std::vector<double>>& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m.determinant();
}

struct NormAccumulator {
  double max = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  void add(double v) {
    max = std::max(max, std::abs(v));
    sum_sq += v * v;
    ++count;
  }
  [[nodiscard]] Norms result() const {
    return {max, count == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(count))};
  }
};

// Central differences on a periodic ring of `n` unique points.
void ring_derivative(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * h);
}

using Rhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

void rk4_step(const Rhs& rhs, double t, double dt, std::vector<double>& s) {
  const std::size_t n = s.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  rhs(t, s, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
  rhs(t + 0.5 * dt, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
  rhs(t + 0.5 * dt, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + dt * k3[i];
  rhs(t + dt, tmp, k4);
  for (std::size_t i = 0; i < n; ++i) s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

struct EvolutionLayout {
  int m = 1;
  int n = 1;
  int nx = 1;       // unique points on the x^1 line
  double dx = 1.0;
  double dt = 1.0;
  int steps = 0;
};

EvolutionLayout check_evolution_grid(int m, int n, const Grid& grid) {
  if (m > 2) throw InputError("evolution supports m <= 2");
  if (grid.dim() != m) throw InputError("grid dimension does not match the base dimension");
  EvolutionLayout lay;
  lay.m = m;
  lay.n = n;
  lay.dt = grid.spacing(0);
  lay.steps = grid.shape()[0] - 1;
  if (m == 2) {
    if (!grid.periodic(1)) throw InputError("evolution needs a periodic x^1 direction");
    if (grid.shape()[1] < 4) throw InputError("grid too small in x^1");
    lay.nx = grid.shape()[1] - 1;
    lay.dx = grid.spacing(1);
    if (lay.dt > 0.5 * lay.dx * (1.0 + 1e-12)) {
      throw NumericError("CFL violation: dx^0 = " + std::to_string(lay.dt) + " exceeds 0.5 dx^1 = " +
                         std::to_string(0.5 * lay.dx));
    }
  }
  return lay;
}

// Initial values on the first x^0 line, one array of nx values per expression.
std::vector<double> initial_line(const EvolutionLayout& lay, const Grid& grid, const std::vector<Expr>& es) {
  std::vector<double> out;
  const auto base = base_symbols(lay.m);
  for (const Expr& e : es) {
    const CompiledExpr f(e, base);
    for (int i = 0; i < lay.nx; ++i) {
      std::vector<double> x{grid.lower()[0]};
      if (lay.m == 2) x.push_back(grid.coordinate(1, i));
      out.push_back(f(x));
    }
  }
  return out;
}

// Writes one x^0 line of a field into a section, restoring the periodic endpoint.
void store_line(const EvolutionLayout& lay, std::vector<double>& field, int level, std::span<const double> line) {
  if (lay.m == 1) {
    field[static_cast<std::size_t>(level)] = line[0];
    return;
  }
  const std::size_t row = static_cast<std::size_t>(level) * static_cast<std::size_t>(lay.nx + 1);
  for (int i = 0; i < lay.nx; ++i) field[row + static_cast<std::size_t>(i)] = line[static_cast<std::size_t>(i)];
  field[row + static_cast<std::size_t>(lay.nx)] = line[0];
}

}  // namespace

GridSection sample_section(const Chart& chart, const Grid& grid, const std::vector<Expr>& components) {
  GridSection out(chart, grid);
  if (components.size() != out.fields().size()) {
    throw InputError("section needs " + std::to_string(out.fields().size()) + " components");
  }
  for (std::size_t f = 0; f < components.size(); ++f) out.fields()[f] = sample(grid, components[f]);
  return out;
}

std::vector<double> grid_derivative(const Grid& grid, std::span<const double> f, int nu) {
  if (f.size() != grid.size()) throw InputError("array does not match the grid");
  const int n = grid.shape()[static_cast<std::size_t>(nu)];
  const bool per = grid.periodic(nu);
  if (n < (per ? 4 : 3)) throw InputError("grid too small for second-order differences");
  const double h = grid.spacing(nu);
  std::size_t stride = 1;
  for (int d = grid.dim() - 1; d > nu; --d) stride *= static_cast<std::size_t>(grid.shape()[static_cast<std::size_t>(d)]);
  std::vector<double> out(f.size());
  const std::size_t outer = grid.size() / (stride * static_cast<std::size_t>(n));
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < stride; ++s) {
      const std::size_t base = o * stride * static_cast<std::size_t>(n) + s;
      auto at = [&](int i) { return f[base + static_cast<std::size_t>(i) * stride]; };
      for (int i = 0; i < n; ++i) {
        double d;
        if (per) {
          const int u = n - 1;
          const int j = i % u;
          d = (at((j + 1) % u) - at((j + u - 1) % u)) / (2.0 * h);
        } else if (i == 0) {
          d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        } else if (i == n - 1) {
          d = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
        } else {
          d = (at(i + 1) - at(i - 1)) / (2.0 * h);
        }
        out[base + static_cast<std::size_t>(i) * stride] = d;
      }
    }
  }
  return out;
}

GridSection prolong(const GridSection& phi) {
  const Chart& c = phi.chart();
  if (c.kind() != ChartKind::E) throw InputError("prolong needs a section of E");
  const int m = c.base_dim();
  const int n = c.fiber_dim();
  GridSection out(Chart(ChartKind::J1E, m, n), phi.grid());
  for (int a = 0; a < n; ++a) {
    const auto& y = phi.field(Symbol::field(a));
    out.field(Symbol::field(a)) = y;
    for (int nu = 0; nu < m; ++nu) out.field(Symbol::velocity(a, nu)) = grid_derivative(phi.grid(), y, nu);
  }
  return out;
}

GridSection legendre_prolong(const LagrangianSystem& sys, const GridSection& phi) {
  const GridSection jet = prolong(phi);
  if (!(jet.chart() == sys.chart())) throw InputError("section does not match the Lagrangian's bundle");
  const int n = sys.bundle().n;
  GridSection out(sys.bundle().chart(ChartKind::Pi), phi.grid());
  const auto p = momenta(sys);
  std::vector<CompiledExpr> pc;
  for (const Expr& e : p) pc.emplace_back(e, sys.chart().coordinates());
  for (int a = 0; a < n; ++a) out.field(Symbol::field(a)) = phi.field(Symbol::field(a));
  std::vector<double> values;
  for (std::size_t i = 0; i < phi.grid().size(); ++i) {
    jet.point(i, values);
    for (std::size_t k = 0; k < pc.size(); ++k) {
      out.field(Symbol::momentum(static_cast<int>(k) % n, static_cast<int>(k) / n))[i] = pc[k](values);
    }
  }
  return out;
}

Norms residual_norm(const HdwOperator& op, const GridSection& psi) {
  if (!(psi.chart() == Chart(ChartKind::Pi, op.m, op.n))) throw InputError("residual needs a section of Pi");
  const Grid& grid = psi.grid();
  const auto coords = psi.chart().coordinates();
  std::vector<CompiledExpr> flux, source;
  for (const Expr& e : op.flux) flux.emplace_back(e, coords);
  for (const Expr& e : op.source) source.emplace_back(e, coords);
  std::vector<std::vector<std::vector<double>>> dy(static_cast<std::size_t>(op.m));
  std::vector<std::vector<double>> divp(static_cast<std::size_t>(op.n), std::vector<double>(grid.size(), 0.0));
  for (int nu = 0; nu < op.m; ++nu) {
    for (int a = 0; a < op.n; ++a) {
      dy[static_cast<std::size_t>(nu)].push_back(grid_derivative(grid, psi.field(Symbol::field(a)), nu));
      const auto dp = grid_derivative(grid, psi.field(Symbol::momentum(a, nu)), nu);
      for (std::size_t i = 0; i < grid.size(); ++i) divp[static_cast<std::size_t>(a)][i] += dp[i];
    }
  }
  NormAccumulator acc;
  std::vector<double> values;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_interior(grid.unravel(i))) continue;
    psi.point(i, values);
    for (int nu = 0; nu < op.m; ++nu) {
      for (int a = 0; a < op.n; ++a) {
        const auto k = static_cast<std::size_t>(jet_index(a, nu, op.n));
        acc.add(dy[static_cast<std::size_t>(nu)][static_cast<std::size_t>(a)][i] - flux[k](values));
      }
    }
    for (int a = 0; a < op.n; ++a) acc.add(divp[static_cast<std::size_t>(a)][i] + source[static_cast<std::size_t>(a)](values));
  }
  return acc.result();
}

Norms euler_lagrange_norm(const LagrangianSystem& sys, const GridSection& phi) {
  const GridSection jet = prolong(phi);
  const Grid& grid = phi.grid();
  const int m = sys.bundle().m;
  const int n = sys.bundle().n;
  const auto coords = sys.chart().coordinates();
  const auto p = momenta(sys);
  std::vector<std::vector<double>> pk(p.size(), std::vector<double>(grid.size()));
  std::vector<std::vector<double>> dldy(static_cast<std::size_t>(n), std::vector<double>(grid.size()));
  std::vector<CompiledExpr> pc, yc;
  for (const Expr& e : p) pc.emplace_back(e, coords);
  for (int a = 0; a < n; ++a) yc.emplace_back(differentiate(sys.lagrangian(), Symbol::field(a)), coords);
  std::vector<double> values;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    jet.point(i, values);
    for (std::size_t k = 0; k < pc.size(); ++k) pk[k][i] = pc[k](values);
    for (std::size_t a = 0; a < yc.size(); ++a) dldy[a][i] = yc[a](values);
  }
  for (int a = 0; a < n; ++a) {
    for (int nu = 0; nu < m; ++nu) {
      const auto d = grid_derivative(grid, pk[static_cast<std::size_t>(jet_index(a, nu, n))], nu);
      for (std::size_t i = 0; i < grid.size(); ++i) dldy[static_cast<std::size_t>(a)][i] -= d[i];
    }
  }
  NormAccumulator acc;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_interior(grid.unravel(i))) continue;
    for (const auto& r : dldy) acc.add(r[i]);
  }
  return acc.result();
}

Norms lift_criterion_norm(const HamiltonianSystem& h, const std::vector<Expr>& beta, const GridSection& psi) {
  const HamiltonianSystem hp = h.kind() == ChartKind::Pi ? h : psi_transfer(h);
  if (!(psi.chart() == hp.chart())) throw InputError("criterion needs a section of Pi");
  const int m = hp.bundle().m;
  const DiffForm form = interior_product(lift_vertical_field(hp.bundle(), beta), hamilton_cartan(hp).omega);
  const Grid& grid = psi.grid();
  const auto coords = psi.chart().coordinates();
  std::vector<std::vector<std::vector<double>>> d;  // [nu][field][point]
  for (int nu = 0; nu < m; ++nu) d.push_back(all_derivatives(psi, nu));
  std::vector<std::pair<IndexTuple, CompiledExpr>> terms;
  for (const auto& [t, c] : form.terms()) terms.emplace_back(t, CompiledExpr(c, coords));
  NormAccumulator acc;
  std::vector<double> values;
  std::vector<std::vector<double>> jac(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m)));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_interior(grid.unravel(i))) continue;
    psi.point(i, values);
    double total = 0.0;
    for (const auto& [t, c] : terms) {
      for (std::size_t j = 0; j < t.size(); ++j) {
        for (int nu = 0; nu < m; ++nu) {
          const int coord = t[j];
          jac[j][static_cast<std::size_t>(nu)] =
              coord < m ? (coord == nu ? 1.0 : 0.0)
                        : d[static_cast<std::size_t>(nu)][static_cast<std::size_t>(coord - m)][i];
        }
      }
      total += c(values) * det_small(jac);
    }
    acc.add(total);
  }
  return acc.result();
}

GridSection solve_evolution(const LagrangianSystem& sys, const InitialData& data, const Grid& grid) {
  const int m = sys.bundle().m;
  const int n = sys.bundle().n;
  const EvolutionLayout lay = check_evolution_grid(m, n, grid);
  if (static_cast<int>(data.y.size()) != n || static_cast<int>(data.rate.size()) != n) {
    throw InputError("initial data needs N values of y and of dy/dx^0");
  }
  const auto hc = constant_hessian(sys);
  if (!hc || rank(*hc) != static_cast<std::size_t>(m * n)) {
    throw InputError("evolution needs a hyper-regular Lagrangian (constant invertible Hessian)");
  }
  // The x^0 block of the Hessian maps v_0 to p^0.
  QMatrix block = zeros(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) block[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = (*hc)[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
  const auto inv = inverse(block);
  if (!inv) throw InputError("evolution needs an invertible x^0 block of the Hessian");
  std::vector<double> block_inv(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) block_inv[static_cast<std::size_t>(a * n + b)] = (*inv)[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].get_d();
  }

  const auto coords = sys.chart().coordinates();
  const auto p = momenta(sys);
  std::vector<CompiledExpr> pc, yc;
  for (const Expr& e : p) pc.emplace_back(e, coords);
  for (int a = 0; a < n; ++a) yc.emplace_back(differentiate(sys.lagrangian(), Symbol::field(a)), coords);

  const auto nx = static_cast<std::size_t>(lay.nx);
  const auto nn = static_cast<std::size_t>(n);
  const std::size_t voff = static_cast<std::size_t>(m + n);

  // Fills v_0 from p^0 and returns the flux p^1 and the source dL/dy at each point.
  auto closure = [&](double t, std::span<const double> y, std::span<const double> p0, std::vector<double>& v0,
                     std::vector<double>& flux, std::vector<double>& src) {
    std::vector<double> dy1(nn * nx, 0.0);
    if (m == 2) {
      for (std::size_t a = 0; a < nn; ++a) ring_derivative(y.subspan(a * nx, nx), lay.dx, std::span(dy1).subspan(a * nx, nx));
    }
    std::vector<double> values(coords.size());
    v0.assign(nn * nx, 0.0);
    flux.assign(nn * nx, 0.0);
    src.assign(nn * nx, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
      values[0] = t;
      if (m == 2) values[1] = grid.coordinate(1, static_cast<int>(i));
      for (std::size_t a = 0; a < nn; ++a) {
        values[static_cast<std::size_t>(m) + a] = y[a * nx + i];
        values[voff + a] = 0.0;
        if (m == 2) values[voff + nn + a] = dy1[a * nx + i];
      }
      std::vector<double> rest(nn);
      for (std::size_t a = 0; a < nn; ++a) rest[a] = pc[a](values);
      for (std::size_t a = 0; a < nn; ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b < nn; ++b) s += block_inv[a * nn + b] * (p0[b * nx + i] - rest[b]);
        v0[a * nx + i] = s;
      }
      for (std::size_t a = 0; a < nn; ++a) values[voff + a] = v0[a * nx + i];
      for (std::size_t a = 0; a < nn; ++a) {
        if (m == 2) flux[a * nx + i] = pc[nn + a](values);
        src[a * nx + i] = yc[a](values);
      }
    }
  };

  // State: y then p^0, each N lines of nx values.
  std::vector<double> state(2 * nn * nx);
  {
    const auto y0 = initial_line(lay, grid, data.y);
    const auto r0 = initial_line(lay, grid, data.rate);
    std::copy(y0.begin(), y0.end(), state.begin());
    std::vector<double> dy1(nn * nx, 0.0);
    if (m == 2) {
      for (std::size_t a = 0; a < nn; ++a) ring_derivative(std::span(y0).subspan(a * nx, nx), lay.dx, std::span(dy1).subspan(a * nx, nx));
    }
    std::vector<double> values(coords.size());
    for (std::size_t i = 0; i < nx; ++i) {
      values[0] = grid.lower()[0];
      if (m == 2) values[1] = grid.coordinate(1, static_cast<int>(i));
      for (std::size_t a = 0; a < nn; ++a) {
        values[static_cast<std::size_t>(m) + a] = y0[a * nx + i];
        values[voff + a] = r0[a * nx + i];
        if (m == 2) values[voff + nn + a] = dy1[a * nx + i];
      }
      for (std::size_t a = 0; a < nn; ++a) state[nn * nx + a * nx + i] = pc[a](values);
    }
  }
  const Rhs rhs = [&](double t, const std::vector<double>& s, std::vector<double>& ds) {
    const std::span<const double> y(s.data(), nn * nx);
    const std::span<const double> p0(s.data() + nn * nx, nn * nx);
    std::vector<double> v0, flux, src;
    closure(t, y, p0, v0, flux, src);
    ds.assign(s.size(), 0.0);
    std::vector<double> dflux(nx, 0.0);
    for (std::size_t a = 0; a < nn; ++a) {
      if (m == 2) ring_derivative(std::span(flux).subspan(a * nx, nx), lay.dx, dflux);
      for (std::size_t i = 0; i < nx; ++i) {
        ds[a * nx + i] = v0[a * nx + i];
        ds[nn * nx + a * nx + i] = src[a * nx + i] - (m == 2 ? dflux[i] : 0.0);
      }
    }
  };

  GridSection out(Chart(ChartKind::E, m, n), grid);
  auto store = [&](int level) {
    for (std::size_t a = 0; a < nn; ++a) {
      store_line(lay, out.field(Symbol::field(static_cast<int>(a))), level, std::span(state).subspan(a * nx, nx));
    }
  };
  store(0);
  for (int step = 0; step < lay.steps; ++step) {
    rk4_step(rhs, grid.coordinate(0, step), lay.dt, state);
    for (double v : state) {
      if (!std::isfinite(v)) throw NumericError("evolution blew up at step " + std::to_string(step + 1));
    }
    store(step + 1);
  }
  return out;
}

GridSection solve_evolution(const HamiltonianSystem& h_in, const InitialData& data, const Grid& grid) {
  const HamiltonianSystem h = h_in.kind() == ChartKind::Pi ? h_in : psi_transfer(h_in);
  const int m = h.bundle().m;
  const int n = h.bundle().n;
  const EvolutionLayout lay = check_evolution_grid(m, n, grid);
  if (static_cast<int>(data.y.size()) != n || static_cast<int>(data.rate.size()) != n) {
    throw InputError("initial data needs N values of y and of p^0");
  }
  const Chart pi = h.chart();
  const auto coords = pi.coordinates();
  const Expr& H = h.hamiltonian();
  const auto nn = static_cast<std::size_t>(n);
  const auto nx = static_cast<std::size_t>(lay.nx);
  std::vector<CompiledExpr> dh_dp0, dh_dy, dh_dp1;
  std::vector<std::vector<CompiledExpr>> d2h_dp1;
  for (int a = 0; a < n; ++a) {
    dh_dp0.emplace_back(differentiate(H, Symbol::momentum(a, 0)), coords);
    dh_dy.emplace_back(differentiate(H, Symbol::field(a)), coords);
    if (m == 2) {
      const Expr g = differentiate(H, Symbol::momentum(a, 1));
      dh_dp1.emplace_back(g, coords);
      d2h_dp1.emplace_back();
      for (int b = 0; b < n; ++b) d2h_dp1.back().emplace_back(differentiate(g, Symbol::momentum(b, 1)), coords);
    }
  }
  const std::size_t poff = static_cast<std::size_t>(m + n);
  std::vector<double> p1(nn * nx, 0.0);  // warm start for the constraint solve

  // Point values at line index i; p^1 taken from `p1line`.
  auto fill = [&](std::vector<double>& values, double t, std::size_t i, std::span<const double> y,
                  std::span<const double> p0, std::span<const double> p1line) {
    values[0] = t;
    if (m == 2) values[1] = grid.coordinate(1, static_cast<int>(i));
    for (std::size_t a = 0; a < nn; ++a) {
      values[static_cast<std::size_t>(m) + a] = y[a * nx + i];
      values[poff + a] = p0[a * nx + i];
      if (m == 2) values[poff + nn + a] = p1line[a * nx + i];
    }
  };

  // Solves dy/dx^1 = dH/dp^1 for p^1 pointwise by Newton.
  auto solve_p1 = [&](double t, std::span<const double> y, std::span<const double> p0, std::vector<double>& out) {
    if (m != 2) return;
    std::vector<double> dy1(nn * nx);
    for (std::size_t a = 0; a < nn; ++a) ring_derivative(y.subspan(a * nx, nx), lay.dx, std::span(dy1).subspan(a * nx, nx));
    std::vector<double> values(coords.size());
    for (std::size_t i = 0; i < nx; ++i) {
      bool done = false;
      for (int it = 0; it < 50 && !done; ++it) {
        fill(values, t, i, y, p0, out);
        Eigen::VectorXd g(static_cast<Eigen::Index>(nn));
        Eigen::MatrixXd j(static_cast<Eigen::Index>(nn), static_cast<Eigen::Index>(nn));
        double norm = 0.0;
        for (std::size_t a = 0; a < nn; ++a) {
          g(static_cast<Eigen::Index>(a)) = dh_dp1[a](values) - dy1[a * nx + i];
          norm = std::max(norm, std::abs(g(static_cast<Eigen::Index>(a))));
          for (std::size_t b = 0; b < nn; ++b) j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = d2h_dp1[a][b](values);
        }
        if (norm <= 1e-12) {
          done = true;
          break;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
        if (!lu.isInvertible()) throw InputError("evolution needs a Hamiltonian regular in p^1");
        const Eigen::VectorXd step = lu.solve(-g);
        for (std::size_t a = 0; a < nn; ++a) out[a * nx + i] += step(static_cast<Eigen::Index>(a));
      }
      if (!done) throw NumericError("Newton solve for p^1 did not converge");
    }
  };

  std::vector<double> state(2 * nn * nx);
  {
    const auto y0 = initial_line(lay, grid, data.y);
    const auto r0 = initial_line(lay, grid, data.rate);
    std::copy(y0.begin(), y0.end(), state.begin());
    std::copy(r0.begin(), r0.end(), state.begin() + static_cast<long>(nn * nx));
  }
  const Rhs rhs = [&](double t, const std::vector<double>& s, std::vector<double>& ds) {
    const std::span<const double> y(s.data(), nn * nx);
    const std::span<const double> p0(s.data() + nn * nx, nn * nx);
    solve_p1(t, y, p0, p1);
    ds.assign(s.size(), 0.0);
    std::vector<double> dp1(nn * nx, 0.0);
    if (m == 2) {
      for (std::size_t a = 0; a < nn; ++a) ring_derivative(std::span(p1).subspan(a * nx, nx), lay.dx, std::span(dp1).subspan(a * nx, nx));
    }
    std::vector<double> values(coords.size());
    for (std::size_t i = 0; i < nx; ++i) {
      fill(values, t, i, y, p0, p1);
      for (std::size_t a = 0; a < nn; ++a) {
        ds[a * nx + i] = dh_dp0[a](values);
        ds[nn * nx + a * nx + i] = -dh_dy[a](values) - dp1[a * nx + i];
      }
    }
  };

  GridSection out(pi, grid);
  auto store = [&](int level) {
    const double t = grid.coordinate(0, level);
    solve_p1(t, std::span(state).subspan(0, nn * nx), std::span(state).subspan(nn * nx, nn * nx), p1);
    for (std::size_t a = 0; a < nn; ++a) {
      const int ai = static_cast<int>(a);
      store_line(lay, out.field(Symbol::field(ai)), level, std::span(state).subspan(a * nx, nx));
      store_line(lay, out.field(Symbol::momentum(ai, 0)), level, std::span(state).subspan(nn * nx + a * nx, nx));
      if (m == 2) store_line(lay, out.field(Symbol::momentum(ai, 1)), level, std::span(p1).subspan(a * nx, nx));
    }
  };
  store(0);
  for (int step = 0; step < lay.steps; ++step) {
    rk4_step(rhs, grid.coordinate(0, step), lay.dt, state);
    for (double v : state) {
      if (!std::isfinite(v)) throw NumericError("evolution blew up at step " + std::to_string(step + 1));
    }
    store(step + 1);
  }
  return out;
}

double integrate(const Grid& grid, std::span<const double> f) {
  if (f.size() != grid.size()) throw InputError("array does not match the grid");
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unravel(i);
    double w = 1.0;
    for (int d = 0; d < grid.dim(); ++d) {
      const int k = idx[static_cast<std::size_t>(d)];
      const int n = grid.shape()[static_cast<std::size_t>(d)];
      w *= grid.spacing(d) * ((k == 0 || k == n - 1) ? 0.5 : 1.0);
    }
    total += w * f[i];
  }
  return total;
}

double action_lagrangian(const LagrangianSystem& sys, const SectionExpr& phi, const Grid& grid) {
  const Expr integrand = substitute(sys.lagrangian(), jet_prolongation(phi, sys.bundle().n));
  return integrate(grid, sample(grid, integrand));
}

double action_lagrangian(const LagrangianSystem& sys, const GridSection& phi) {
  const GridSection jet = prolong(phi);
  const CompiledExpr l(sys.lagrangian(), sys.chart().coordinates());
  std::vector<double> f(phi.grid().size());
  std::vector<double> values;
  for (std::size_t i = 0; i < f.size(); ++i) {
    jet.point(i, values);
    f[i] = l(values);
  }
  return integrate(phi.grid(), f);
}

double action_hamiltonian(const HamiltonianSystem& h, const PiSection& psi, const Grid& grid) {
  const HamiltonianSystem hp = h.kind() == ChartKind::Pi ? h : psi_transfer(h);
  const CoordinateMap sec = section_map(hp.bundle(), psi);
  const DiffForm top = pullback(sec, hamilton_cartan(hp).theta);
  IndexTuple all(static_cast<std::size_t>(hp.bundle().m));
  for (int nu = 0; nu < hp.bundle().m; ++nu) all[static_cast<std::size_t>(nu)] = nu;
  return integrate(grid, sample(grid, top.coefficient(all)));
}

double action_hamiltonian(const HamiltonianSystem& h, const GridSection& psi) {
  const HamiltonianSystem hp = h.kind() == ChartKind::Pi ? h : psi_transfer(h);
  if (!(psi.chart() == hp.chart())) throw InputError("action needs a section of Pi");
  const int m = hp.bundle().m;
  const int n = hp.bundle().n;
  const Grid& grid = psi.grid();
  const CompiledExpr hc(hp.hamiltonian(), psi.chart().coordinates());
  std::vector<double> f(grid.size());
  std::vector<double> values;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    psi.point(i, values);
    f[i] = -hc(values);
  }
  for (int nu = 0; nu < m; ++nu) {
    for (int a = 0; a < n; ++a) {
      const auto dy = grid_derivative(grid, psi.field(Symbol::field(a)), nu);
      const auto& p = psi.field(Symbol::momentum(a, nu));
      for (std::size_t i = 0; i < grid.size(); ++i) f[i] += p[i] * dy[i];
    }
  }
  return integrate(grid, f);
}

double max_difference(const GridSection& a, const GridSection& b, const Symbol& s) {
  const auto& fa = a.field(s);
  const auto& fb = b.field(s);
  if (fa.size() != fb.size()) throw InputError("sections live on different grids");
  double out = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) out = std::max(out, std::abs(fa[i] - fb[i]));
  return out;
}

GridSection perturb(const GridSection& s, double amplitude, std::uint64_t seed) {
  GridSection out = s;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const Grid& grid = s.grid();
  for (auto& f : out.fields()) {
    for (double& v : f) v += amplitude * dist(rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      auto idx = grid.unravel(i);
      bool moved = false;
      for (int d = 0; d < grid.dim(); ++d) {
        if (grid.periodic(d) && idx[static_cast<std::size_t>(d)] == grid.shape()[static_cast<std::size_t>(d)] - 1) {
          idx[static_cast<std::size_t>(d)] = 0;
          moved = true;
        }
      }
      if (moved) f[i] = f[grid.ravel(idx)];
    }
  }
  return out;
}

std::vector<double> energy_along(const HamiltonianSystem& h, const GridSection& psi) {
  const CompiledExpr hc(h.hamiltonian(), psi.chart().coordinates());
  std::vector<double> out(psi.grid().size());
  std::vector<double> values;
  for (std::size_t i = 0; i < out.size(); ++i) {
    psi.point(i, values);
    out[i] = hc(values);
  }
  return out;
}

}  // namespace multisym
