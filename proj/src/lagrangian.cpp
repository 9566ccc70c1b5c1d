#include "multisym/lagrangian.hpp"

#include <random>

#include <Eigen/SVD>

#include "multisym/error.hpp"
#include "multisym/exact_linalg.hpp"

namespace multisym {

LagrangianSystem::LagrangianSystem(BundleSpec bundle, Expr lagrangian)
    : bundle_(BundleSpec::make(bundle.m, bundle.n)),
      chart_(bundle_.chart(ChartKind::J1E)),
      l_(std::move(lagrangian)) {
  for (const Symbol& s : l_.symbols()) {
    if (!chart_.contains(s)) {
      throw InputError("Lagrangian depends on " + s.name() + ", which is not a J1E coordinate");
    }
  }
  for (int nu = 0; nu < bundle_.m; ++nu) {
    for (int a = 0; a < bundle_.n; ++a) velocities_.push_back(Symbol::velocity(a, nu));
  }
}

std::vector<Expr> momenta(const LagrangianSystem& sys) {
  std::vector<Expr> out;
  out.reserve(sys.velocities().size());
  for (const Symbol& v : sys.velocities()) out.push_back(differentiate(sys.lagrangian(), v));
  return out;
}

ExprMatrix hessian(const LagrangianSystem& sys) {
  const auto p = momenta(sys);
  const auto& vs = sys.velocities();
  ExprMatrix out(p.size(), std::vector<Expr>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) out[i][j] = differentiate(p[i], vs[j]);
  }
  return out;
}

std::optional<QMatrix> constant_hessian(const LagrangianSystem& sys) {
  const ExprMatrix h = hessian(sys);
  QMatrix out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (const Expr& e : h[i]) {
      auto r = e.rational_value();
      if (!r) return std::nullopt;
      out[i].push_back(*r);
    }
  }
  return out;
}

std::string_view regularity_name(Regularity r) {
  switch (r) {
    case Regularity::Regular: return "regular";
    case Regularity::Singular: return "singular";
    case Regularity::Indeterminate: return "indeterminate";
  }
  return "?";
}

int numeric_rank(const std::vector<std::vector<double>>& a, double rel_tol) {
  if (a.empty()) return 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a[0].size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j];
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) >= rel_tol * s(0)) ++r;
  }
  return r;
}

RegularityReport classify_regularity(const LagrangianSystem& sys, int samples,
                                     std::span<const Point> points, std::uint64_t seed) {
  if (samples < 1 && points.empty()) throw InputError("need at least one sample point");
  RegularityReport rep;
  const int dim = sys.jet_count();
  rep.dimension = dim;
  const ExprMatrix h = hessian(sys);
  const auto coords = sys.chart().coordinates();

  std::vector<std::vector<CompiledExpr>> compiled(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (const Expr& e : h[i]) compiled[i].emplace_back(e, coords);
  }
  auto rank_at = [&](std::span<const double> values) {
    std::vector<std::vector<double>> a(h.size(), std::vector<double>(h.size()));
    for (std::size_t i = 0; i < h.size(); ++i) {
      for (std::size_t j = 0; j < h.size(); ++j) a[i][j] = compiled[i][j](values);
    }
    return numeric_rank(a);
  };

  std::vector<double> values(coords.size());
  if (points.empty()) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int k = 0; k < samples; ++k) {
      for (auto& v : values) v = dist(rng);
      rep.sampled_ranks.push_back(rank_at(values));
    }
  } else {
    for (const Point& p : points) {
      for (std::size_t i = 0; i < coords.size(); ++i) {
        auto it = p.find(coords[i]);
        values[i] = it == p.end() ? 0.0 : it->second;
      }
      rep.sampled_ranks.push_back(rank_at(values));
    }
  }

  if (auto c = constant_hessian(sys)) {
    rep.exact_rank = static_cast<int>(rank(*c));
    rep.kernel_dimension = dim - *rep.exact_rank;
    rep.classification = *rep.exact_rank == dim ? Regularity::Regular : Regularity::Singular;
    rep.hyperregular_certified = *rep.exact_rank == dim;
    return rep;
  }
  const int first = rep.sampled_ranks.front();
  bool uniform = true;
  for (int r : rep.sampled_ranks) uniform = uniform && r == first;
  if (!uniform) {
    rep.classification = Regularity::Indeterminate;
  } else {
    rep.classification = first == dim ? Regularity::Regular : Regularity::Singular;
  }
  return rep;
}

namespace {

Expr v_dot_momenta(const LagrangianSystem& sys, const std::vector<Expr>& p) {
  Expr out;
  for (std::size_t k = 0; k < p.size(); ++k) out += Expr::symbol(sys.velocities()[k]) * p[k];
  return out;
}

DiffForm momentum_wedge(const LagrangianSystem& sys, const std::vector<Expr>& p) {
  const Chart& chart = sys.chart();
  const int m = sys.bundle().m;
  const int n = sys.bundle().n;
  DiffForm out(chart, m);
  for (int nu = 0; nu < m; ++nu) {
    const DiffForm vol = volume_form_minus(chart, nu);
    for (int a = 0; a < n; ++a) {
      const Expr& c = p[static_cast<std::size_t>(jet_index(a, nu, n))];
      if (c.is_zero()) continue;
      out += c * wedge(DiffForm::differential(chart, Symbol::field(a)), vol);
    }
  }
  return out;
}

}  // namespace

CartanForms poincare_cartan(const LagrangianSystem& sys) {
  const auto p = momenta(sys);
  DiffForm theta = momentum_wedge(sys, p) -
                   (v_dot_momenta(sys, p) - sys.lagrangian()) * volume_form(sys.chart());
  DiffForm omega = -exterior_derivative(theta);
  return {std::move(theta), std::move(omega)};
}

DiffForm reduced_cartan_form(const LagrangianSystem& sys) {
  const auto p = momenta(sys);
  return momentum_wedge(sys, p) - v_dot_momenta(sys, p) * volume_form(sys.chart());
}

Expr energy_density(const LagrangianSystem& sys, const Connection& connection) {
  if (connection.base_dim() != sys.bundle().m || connection.fiber_dim() != sys.bundle().n) {
    throw InputError("connection dimensions do not match the bundle");
  }
  const auto p = momenta(sys);
  Expr out = -sys.lagrangian();
  for (std::size_t k = 0; k < p.size(); ++k) {
    out += p[k] * (Expr::symbol(sys.velocities()[k]) - connection.components()[k]);
  }
  return out;
}

SectionExpr::SectionExpr(int m_, std::vector<Expr> comps) : m(m_), components(std::move(comps)) {
  for (const Expr& c : components) {
    for (const Symbol& s : c.symbols()) {
      if (s.role() != Role::Base || s.first() >= m) {
        throw InputError("section component depends on " + s.name() +
                         "; only base coordinates are allowed");
      }
    }
  }
}

Assignment jet_prolongation(const SectionExpr& phi, int n) {
  if (static_cast<int>(phi.components.size()) != n) {
    throw InputError("section has " + std::to_string(phi.components.size()) +
                     " components, bundle has N = " + std::to_string(n));
  }
  Assignment out;
  for (int a = 0; a < n; ++a) {
    const Expr& f = phi.components[static_cast<std::size_t>(a)];
    out.emplace(Symbol::field(a), f);
    for (int nu = 0; nu < phi.m; ++nu) {
      out.emplace(Symbol::velocity(a, nu), differentiate(f, Symbol::base(nu)));
    }
  }
  return out;
}

std::vector<Expr> euler_lagrange_residual(const LagrangianSystem& sys, const SectionExpr& phi) {
  const int m = sys.bundle().m;
  const int n = sys.bundle().n;
  if (phi.m != m) throw InputError("section base dimension does not match the bundle");
  const Assignment jet = jet_prolongation(phi, n);
  const auto p = momenta(sys);
  std::vector<Expr> out;
  for (int a = 0; a < n; ++a) {
    Expr r = substitute(differentiate(sys.lagrangian(), Symbol::field(a)), jet);
    for (int nu = 0; nu < m; ++nu) {
      const Expr pa = substitute(p[static_cast<std::size_t>(jet_index(a, nu, n))], jet);
      r -= differentiate(pa, Symbol::base(nu));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace multisym
