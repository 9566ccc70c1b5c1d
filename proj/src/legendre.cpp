#include "multisym/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "multisym/detail/poly.hpp"
#include "multisym/error.hpp"

namespace multisym {

std::string_view legendre_name(LegendreKind k) {
  switch (k) {
    case LegendreKind::Generalized: return "generalized";
    case LegendreKind::Reduced: return "reduced";
    case LegendreKind::ExtendedHat: return "extended_hat";
    case LegendreKind::ExtendedTilde: return "extended_tilde";
    case LegendreKind::Restricted: return "restricted";
  }
  return "?";
}

ChartKind legendre_target(LegendreKind k) {
  switch (k) {
    case LegendreKind::Generalized: return ChartKind::J1Estar;
    case LegendreKind::Reduced: return ChartKind::Pi;
    case LegendreKind::ExtendedHat:
    case LegendreKind::ExtendedTilde: return ChartKind::MPi;
    case LegendreKind::Restricted: return ChartKind::J1PiStar;
  }
  return ChartKind::Pi;
}

CoordinateMap legendre_map(const LagrangianSystem& sys, LegendreKind kind) {
  const int m = sys.bundle().m;
  const int n = sys.bundle().n;
  const Chart target = sys.bundle().chart(legendre_target(kind));
  const auto p = momenta(sys);
  auto v = [&](int a, int nu) { return Expr::symbol(Symbol::velocity(a, nu)); };
  std::vector<Expr> images;
  images.reserve(static_cast<std::size_t>(target.dim()));
  for (const Symbol& s : target.coordinates()) {
    switch (s.role()) {
      case Role::Base:
      case Role::Field: images.push_back(Expr::symbol(s)); break;
      case Role::Momentum:
        images.push_back(p[static_cast<std::size_t>(jet_index(s.first(), s.second(), n))]);
        break;
      case Role::GeneralizedMomentum: {
        // p^nu_eta = -v^A_eta dL/dv^A_nu
        const int eta = s.first();
        const int nu = s.second();
        Expr q;
        for (int a = 0; a < n; ++a) q -= v(a, eta) * p[static_cast<std::size_t>(jet_index(a, nu, n))];
        images.push_back(std::move(q));
        break;
      }
      case Role::ExtendedMomentum: {
        Expr vp;
        for (int nu = 0; nu < m; ++nu) {
          for (int a = 0; a < n; ++a) vp += v(a, nu) * p[static_cast<std::size_t>(jet_index(a, nu, n))];
        }
        images.push_back(kind == LegendreKind::ExtendedTilde ? sys.lagrangian() - vp : -vp);
        break;
      }
      default: throw InputError("unexpected coordinate " + s.name());
    }
  }
  return {sys.chart(), target, std::move(images)};
}

ReducedInverter::ReducedInverter(const LagrangianSystem& sys, double tol, int max_iterations)
    : m_(sys.bundle().m), n_(sys.bundle().n), tol_(tol), max_iterations_(max_iterations) {
  const auto coords = sys.chart().coordinates();
  for (const Expr& e : momenta(sys)) momenta_.emplace_back(e, coords);
  for (const auto& row : hessian(sys)) {
    hessian_.emplace_back();
    for (const Expr& e : row) hessian_.back().emplace_back(e, coords);
  }
}

std::vector<double> ReducedInverter::momenta_at(std::span<const double> xy,
                                                std::span<const double> v) const {
  std::vector<double> values(xy.begin(), xy.end());
  values.insert(values.end(), v.begin(), v.end());
  std::vector<double> out;
  out.reserve(momenta_.size());
  for (const auto& f : momenta_) out.push_back(f(values));
  return out;
}

std::vector<double> ReducedInverter::solve(std::span<const double> xy, std::span<const double> p,
                                           std::span<const double> start) const {
  const std::size_t k = momenta_.size();
  if (xy.size() != static_cast<std::size_t>(m_ + n_) || p.size() != k) {
    throw InputError("inversion point has the wrong number of coordinates");
  }
  std::vector<double> values(xy.begin(), xy.end());
  values.resize(xy.size() + k, 0.0);
  if (!start.empty()) std::copy(start.begin(), start.end(), values.begin() + static_cast<long>(xy.size()));
  const std::span<double> v(values.data() + xy.size(), k);

  auto residual = [&](std::vector<double>& f) {
    double norm = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      f[i] = momenta_[i](values) - p[i];
      norm = std::max(norm, std::abs(f[i]));
    }
    return norm;
  };
  std::vector<double> f(k), trial_f(k), saved(k);
  double norm = residual(f);
  for (int it = 0; it <= max_iterations_; ++it) {
    if (!std::isfinite(norm)) break;
    if (norm <= tol_) return {v.begin(), v.end()};
    if (it == max_iterations_) break;
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
      rhs(static_cast<Eigen::Index>(i)) = -f[i];
      for (std::size_t j = 0; j < k; ++j) {
        jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hessian_[i][j](values);
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw NumericError("singular Hessian at Newton iterate " + std::to_string(it));
    const Eigen::VectorXd step = lu.solve(rhs);
    std::copy(v.begin(), v.end(), saved.begin());
    double lambda = 1.0;
    double trial = norm;
    for (int halvings = 0; halvings < 40; ++halvings) {
      for (std::size_t i = 0; i < k; ++i) v[i] = saved[i] + lambda * step(static_cast<Eigen::Index>(i));
      trial = residual(trial_f);
      if (std::isfinite(trial) && trial < norm) break;
      lambda *= 0.5;
    }
    f = trial_f;
    norm = trial;
  }
  throw NumericError("Newton inversion did not converge in " + std::to_string(max_iterations_) +
                     " iterations (residual " + std::to_string(norm) + ")");
}

AffineMomenta affine_momenta(const LagrangianSystem& sys) {
  const ExprMatrix h = hessian(sys);
  AffineMomenta out;
  out.matrix = zeros(h.size(), h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = 0; j < h.size(); ++j) {
      const Expr& e = h[i][j];
      if (e.depends_on_role(Role::Velocity)) {
        throw InputError("momenta are not affine in the velocities (Lagrangian of degree > 2 in v)");
      }
      auto r = e.rational_value();
      if (!r) {
        throw InputError("Hessian entry " + std::to_string(i) + "," + std::to_string(j) +
                         " depends on (x, y); rank may vary and is not solved");
      }
      out.matrix[i][j] = *r;
    }
  }
  Assignment at_zero;
  for (const Symbol& v : sys.velocities()) at_zero.emplace(v, Expr());
  for (const Expr& p : momenta(sys)) out.offset.push_back(substitute(p, at_zero));
  return out;
}

namespace {

Expr momentum_symbol(std::size_t k, int n) {
  return Expr::symbol(Symbol::momentum(static_cast<int>(k) % n, static_cast<int>(k) / n));
}

// v := G (p - b), as an assignment on the velocity symbols.
Assignment velocity_substitution(const LagrangianSystem& sys, const QMatrix& g,
                                 const std::vector<Expr>& offset,
                                 const std::vector<Expr>& p) {
  Assignment out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Expr vi;
    for (std::size_t j = 0; j < g[i].size(); ++j) {
      if (g[i][j] != 0) vi += Expr(g[i][j]) * (p[j] - offset[j]);
    }
    out.emplace(sys.velocities()[i], std::move(vi));
  }
  return out;
}

// Determinant by Laplace expansion along columns, memoized on row subsets.
Expr determinant(const std::vector<std::vector<Expr>>& a) {
  const std::size_t n = a.size();
  if (n == 0) return Expr(1);
  std::map<unsigned, Expr> memo;
  auto rec = [&](auto&& self, unsigned rows, std::size_t col) -> Expr {
    if (col == n) return Expr(1);
    if (auto it = memo.find(rows); it != memo.end()) return it->second;
    Expr out;
    int sign = 1;
    for (std::size_t r = 0; r < n; ++r) {
      if (!(rows & (1u << r))) continue;
      if (!a[r][col].is_zero()) {
        const Expr sub = self(self, rows & ~(1u << r), col + 1);
        out += sign > 0 ? a[r][col] * sub : -(a[r][col] * sub);
      }
      sign = -sign;
    }
    memo.emplace(rows, out);
    return out;
  };
  return rec(rec, (1u << n) - 1, 0);
}

// Rows and columns of a numerically nonsingular maximal submatrix.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> pivot_structure(
    std::vector<std::vector<double>> a) {
  std::vector<std::size_t> rows, cols;
  if (a.empty() || a[0].empty()) return {rows, cols};
  double scale = 0.0;
  for (const auto& r : a) {
    for (double x : r) scale = std::max(scale, std::abs(x));
  }
  std::vector<bool> used_r(a.size()), used_c(a[0].size());
  for (;;) {
    double best = 0.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (used_r[i]) continue;
      for (std::size_t j = 0; j < a[i].size(); ++j) {
        if (!used_c[j] && std::abs(a[i][j]) > best) {
          best = std::abs(a[i][j]);
          bi = i;
          bj = j;
        }
      }
    }
    if (best <= 1e-9 * scale || best == 0.0) break;
    used_r[bi] = used_c[bj] = true;
    rows.push_back(bi);
    cols.push_back(bj);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (used_r[i]) continue;
      const double f = a[i][bj] / a[bi][bj];
      for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] -= f * a[bi][j];
    }
  }
  std::sort(rows.begin(), rows.end());
  std::sort(cols.begin(), cols.end());
  return {rows, cols};
}

// Divides out the largest symbol monomial common to every term.
Expr strip_monomial_content(const Expr& e) {
  const auto& terms = e.poly().terms;
  if (terms.size() < 2) return e;
  std::map<Symbol, int> common;
  for (const auto& f : terms.front().monomial) {
    if (f.atom.kind == detail::Atom::Kind::Symbol && f.exponent > 0) common[f.atom.symbol] = f.exponent;
  }
  for (const auto& t : terms) {
    std::map<Symbol, int> here;
    for (const auto& f : t.monomial) {
      if (f.atom.kind == detail::Atom::Kind::Symbol) here[f.atom.symbol] = f.exponent;
    }
    for (auto it = common.begin(); it != common.end();) {
      auto h = here.find(it->first);
      if (h == here.end() || h->second <= 0) {
        it = common.erase(it);
      } else {
        it->second = std::min(it->second, h->second);
        ++it;
      }
    }
  }
  if (common.empty()) return e;
  std::vector<detail::Term> out;
  for (const auto& t : terms) {
    detail::Term nt{{}, t.coefficient};
    for (const auto& f : t.monomial) {
      detail::Factor nf = f;
      if (f.atom.kind == detail::Atom::Kind::Symbol) {
        if (auto it = common.find(f.atom.symbol); it != common.end()) nf.exponent -= it->second;
      }
      if (nf.exponent != 0) nt.monomial.push_back(std::move(nf));
    }
    out.push_back(std::move(nt));
  }
  return detail::from_terms(std::move(out));
}

}  // namespace

std::vector<Expr> invert_reduced_symbolic(const LagrangianSystem& sys) {
  const AffineMomenta am = affine_momenta(sys);
  const auto inv = inverse(am.matrix);
  if (!inv) throw InputError("Hessian is singular; the reduced Legendre map has no inverse");
  std::vector<Expr> p;
  for (std::size_t k = 0; k < am.offset.size(); ++k) p.push_back(momentum_symbol(k, sys.bundle().n));
  const Assignment v = velocity_substitution(sys, *inv, am.offset, p);
  std::vector<Expr> out;
  for (const Symbol& s : sys.velocities()) out.push_back(v.at(s));
  return out;
}

LinearReducer::LinearReducer(const QMatrix& relations, const std::vector<Expr>& offset, int m,
                             int n) {
  const std::size_t k = static_cast<std::size_t>(m * n);
  if (relations.empty()) return;
  // Pivot on the greatest momentum symbols so the smaller ones are kept.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  auto sym = [n](std::size_t i) {
    return Symbol::momentum(static_cast<int>(i) % n, static_cast<int>(i) / n);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sym(b) < sym(a); });
  Rref r = rref(relations, order);
  std::vector<std::size_t> rows(r.pivots.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return r.pivots[a] < r.pivots[b]; });
  for (std::size_t i : rows) {
    Expr c;
    for (std::size_t j = 0; j < k; ++j) {
      if (r.reduced[i][j] != 0) c += Expr(r.reduced[i][j]) * (momentum_symbol(j, n) - offset[j]);
    }
    eliminate_.emplace(sym(r.pivots[i]), momentum_symbol(r.pivots[i], n) - c);
    constraints_.push_back(std::move(c));
    linear_part_.push_back(r.reduced[i]);
  }
}

Expr LinearReducer::reduce(const Expr& e) const {
  return eliminate_.empty() ? e : substitute(e, eliminate_);
}

ZeroTest check_constraints(const LagrangianSystem& sys, const ConstraintSet& set) {
  const CoordinateMap map = legendre_map(sys, set.kind);
  ZeroTest out{ZeroVerdict::ProvenZero, 0, 0.0};
  for (const Expr& c : set.constraints) {
    const ZeroTest z = is_zero(map.pull(c));
    out.samples += z.samples;
    out.max_abs = std::max(out.max_abs, z.max_abs);
    if (z.verdict == ZeroVerdict::ProvenNonzero) return {ZeroVerdict::ProvenNonzero, out.samples, out.max_abs};
    if (z.verdict == ZeroVerdict::Undecided) out.verdict = ZeroVerdict::Undecided;
  }
  return out;
}

ImageElimination image_elimination(const LagrangianSystem& sys) {
  const int n = sys.bundle().n;
  ImageElimination out;
  out.affine = affine_momenta(sys);
  out.reducer = LinearReducer(left_null_space(out.affine.matrix), out.affine.offset, sys.bundle().m, n);
  out.generalized_inverse = generalized_inverse(out.affine.matrix);
  std::vector<Expr> p_reduced;
  for (std::size_t k = 0; k < out.affine.offset.size(); ++k) {
    p_reduced.push_back(out.reducer.reduce(momentum_symbol(k, n)));
  }
  out.velocities = velocity_substitution(sys, out.generalized_inverse, out.affine.offset, p_reduced);
  return out;
}

ConstraintSet image_constraints(const LagrangianSystem& sys, LegendreKind kind) {
  const int m = sys.bundle().m;
  const int n = sys.bundle().n;
  const ImageElimination elim = image_elimination(sys);
  const AffineMomenta& am = elim.affine;
  const LinearReducer& red = elim.reducer;

  ConstraintSet set{sys.bundle().chart(legendre_target(kind)), kind, red.constraints(),
                    red.linear_part(), red.constraints().size(), {}};
  if (kind == LegendreKind::Reduced || kind == LegendreKind::Restricted) return set;

  const std::size_t jets = am.offset.size();
  std::vector<Expr> p_reduced;
  for (std::size_t k = 0; k < jets; ++k) p_reduced.push_back(red.reduce(momentum_symbol(k, n)));
  const Assignment& vsub = elim.velocities;
  const CoordinateMap map = legendre_map(sys, kind);

  if (kind == LegendreKind::ExtendedHat || kind == LegendreKind::ExtendedTilde) {
    const Expr pe_image = map.image(Symbol::extended());
    const Expr chi = Expr::symbol(Symbol::extended()) - red.reduce(substitute(pe_image, vsub));
    if (is_zero(map.pull(chi)).verdict == ZeroVerdict::ProvenNonzero) {
      set.notes.push_back("the energy-type coordinate is not constant on the fibres of the map; "
                          "no scalar constraint");
    } else {
      set.constraints.push_back(chi);
    }
    return set;
  }

  // Generalized: on the image v = G(p - b) + K t, so q = c(p) + D(p) t; the
  // relations are the maximal minors of [D | q - c] through a pivot block of D.
  const QMatrix kernel = null_space(am.matrix);
  std::vector<Expr> u;
  for (const Symbol& s : sys.velocities()) u.push_back(vsub.at(s));
  const std::size_t mm = static_cast<std::size_t>(m * m);
  std::vector<Expr> rhs(mm);
  std::vector<std::vector<Expr>> d(mm, std::vector<Expr>(kernel.size()));
  for (int eta = 0; eta < m; ++eta) {
    for (int nu = 0; nu < m; ++nu) {
      const std::size_t row = static_cast<std::size_t>(eta * m + nu);
      Expr c;
      for (int a = 0; a < n; ++a) {
        const auto ke = static_cast<std::size_t>(jet_index(a, eta, n));
        const Expr& pn = p_reduced[static_cast<std::size_t>(jet_index(a, nu, n))];
        c -= u[ke] * pn;
        for (std::size_t j = 0; j < kernel.size(); ++j) {
          if (kernel[j][ke] != 0) d[row][j] -= Expr(kernel[j][ke]) * pn;
        }
      }
      rhs[row] = Expr::symbol(Symbol::generalized(eta, nu)) - c;
    }
  }

  std::vector<std::size_t> prow, pcol;
  if (!kernel.empty()) {
    std::mt19937_64 rng(0x9e3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    Point pt;
    for (const Symbol& s : sys.chart().coordinates()) pt[s] = dist(rng);
    for (std::size_t k = 0; k < jets; ++k) pt[Symbol::momentum(static_cast<int>(k) % n, static_cast<int>(k) / n)] = dist(rng);
    std::vector<std::vector<double>> dn(mm, std::vector<double>(kernel.size()));
    for (std::size_t i = 0; i < mm; ++i) {
      for (std::size_t j = 0; j < kernel.size(); ++j) dn[i][j] = evaluate(d[i][j], pt);
    }
    std::tie(prow, pcol) = pivot_structure(std::move(dn));
  }
  for (std::size_t i = 0; i < mm; ++i) {
    if (std::find(prow.begin(), prow.end(), i) != prow.end()) continue;
    std::vector<std::size_t> rows = prow;
    rows.push_back(i);
    std::vector<std::vector<Expr>> block(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c : pcol) block[r].push_back(d[rows[r]][c]);
      block[r].push_back(rhs[rows[r]]);
    }
    Expr rel = strip_monomial_content(red.reduce(determinant(block)));
    if (!rel.is_zero()) set.constraints.push_back(std::move(rel));
  }
  if (!kernel.empty()) {
    set.notes.push_back("generalized relations are minors through a pivot block of rank " +
                        std::to_string(prow.size()) + "; they hold where that block is nonsingular and common monomial factors are nonzero");
  }
  return set;
}

std::vector<CompatCheck> check_projection_compat(const LagrangianSystem& sys) {
  const BundleSpec& b = sys.bundle();
  const CoordinateMap gen = legendre_map(sys, LegendreKind::Generalized);
  const CoordinateMap red = legendre_map(sys, LegendreKind::Reduced);
  const CoordinateMap hat = legendre_map(sys, LegendreKind::ExtendedHat);
  const CoordinateMap tilde = legendre_map(sys, LegendreKind::ExtendedTilde);
  const CoordinateMap res = legendre_map(sys, LegendreKind::Restricted);
  const CoordinateMap delta = projection_map(b, Projection::Delta);
  const CoordinateMap iota = projection_map(b, Projection::Iota0);
  const CoordinateMap mu = projection_map(b, Projection::Mu);
  const CoordinateMap psi = projection_map(b, Projection::Psi);

  std::vector<CompatCheck> out;
  auto add = [&](std::string name, const CoordinateMap& lhs, const CoordinateMap& rhs) {
    auto diff = first_difference(lhs, rhs);
    out.push_back({std::move(name), !diff, diff ? "differs at " + *diff : ""});
  };
  add("delta o generalized = reduced", compose(delta, gen), red);
  add("iota0 o generalized = extended_hat", compose(iota, gen), hat);
  add("mu o extended_tilde = restricted", compose(mu, tilde), res);
  add("mu o extended_hat = restricted", compose(mu, hat), res);
  add("psi o restricted = reduced", compose(psi, res), red);
  const Expr gap = tilde.image(Symbol::extended()) - hat.image(Symbol::extended()) - sys.lagrangian();
  out.push_back({"extended_tilde - extended_hat = L", gap.is_zero(),
                 gap.is_zero() ? "" : "differs at pe"});
  return out;
}

}  // namespace multisym
