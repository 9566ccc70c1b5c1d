#include "multisym/hamiltonian.hpp"

#include "multisym/error.hpp"

namespace multisym {

HamiltonianSystem::HamiltonianSystem(BundleSpec bundle, Expr h, ChartKind kind)
    : bundle_(BundleSpec::make(bundle.m, bundle.n)), kind_(kind), h_(std::move(h)) {
  if (kind != ChartKind::Pi && kind != ChartKind::J1PiStar) {
    throw InputError("a Hamiltonian system lives on Pi or J1PiStar");
  }
  const Chart c = chart();
  for (const Symbol& s : h_.symbols()) {
    if (!c.contains(s)) {
      throw InputError("Hamiltonian depends on " + s.name() + ", which is not a coordinate of " + c.name());
    }
  }
}

void HamiltonianSystem::set_connection(const Connection& c, const Expr& global) {
  if (c.base_dim() != bundle_.m || c.fiber_dim() != bundle_.n) {
    throw InputError("connection dimensions do not match the bundle");
  }
  if (global.depends_on_role(Role::Velocity)) throw InputError("H^nabla depends on a velocity");
  const Expr gap = h_ - global - c.momentum_contraction();
  if (is_zero(gap).verdict == ZeroVerdict::ProvenNonzero) {
    throw InputError("H - H^nabla - p Gamma does not vanish: " + gap.str());
  }
  connection_ = c;
  global_ = global;
}

CartanForms hamilton_cartan(const HamiltonianSystem& h) {
  const Chart chart = h.chart();
  DiffForm theta = momentum_part(chart) - h.hamiltonian() * volume_form(chart);
  DiffForm omega = -exterior_derivative(theta);
  return {std::move(theta), std::move(omega)};
}

CoordinateMap hamiltonian_section(const HamiltonianSystem& h) {
  const BundleSpec& b = h.bundle();
  const Expr diag = -h.hamiltonian() / Expr(b.m);
  std::vector<Expr> q(static_cast<std::size_t>(b.m * b.m));
  for (int nu = 0; nu < b.m; ++nu) q[static_cast<std::size_t>(nu * b.m + nu)] = diag;
  CoordinateMap sec = delta_section(b, q);
  if (h.kind() == ChartKind::J1PiStar) return compose(sec, projection_map(b, Projection::Psi));
  return sec;
}

CoordinateMap connection_section(const BundleSpec& bundle, const Connection& c) {
  std::vector<Expr> q(static_cast<std::size_t>(bundle.m * bundle.m));
  for (int eta = 0; eta < bundle.m; ++eta) {
    for (int nu = 0; nu < bundle.m; ++nu) {
      Expr e;
      for (int a = 0; a < bundle.n; ++a) e -= Expr::symbol(Symbol::momentum(a, nu)) * c.gamma(a, eta);
      q[static_cast<std::size_t>(eta * bundle.m + nu)] = e;
    }
  }
  return delta_section(bundle, q);
}

DiffForm connection_section_form(const BundleSpec& bundle, const Connection& c) {
  const Chart pi = bundle.chart(ChartKind::Pi);
  return momentum_part(pi) - c.momentum_contraction() * volume_form(pi);
}

HamiltonianSystem compose_density(const BundleSpec& bundle, const Connection& c, const Expr& global) {
  if (global.depends_on_role(Role::Velocity)) throw InputError("Hamiltonian density depends on a velocity");
  HamiltonianSystem h(bundle, global + c.momentum_contraction());
  h.set_connection(c, global);
  return h;
}

HamiltonianSystem from_hyperregular(const LagrangianSystem& sys, const std::optional<Connection>& c) {
  const std::vector<Expr> v = invert_reduced_symbolic(sys);
  Assignment a;
  Expr pv;
  const int n = sys.bundle().n;
  for (std::size_t k = 0; k < v.size(); ++k) {
    a.emplace(sys.velocities()[k], v[k]);
    pv += Expr::symbol(Symbol::momentum(static_cast<int>(k) % n, static_cast<int>(k) / n)) *
          Expr::symbol(sys.velocities()[k]);
  }
  HamiltonianSystem h(sys.bundle(), substitute(pv - sys.lagrangian(), a));
  if (c) h.set_connection(*c, h.hamiltonian() - c->momentum_contraction());
  return h;
}

HamiltonianSystem restrict_almost_regular(const LagrangianSystem& sys, const Connection& c) {
  const ImageElimination elim = image_elimination(sys);
  const Expr global = elim.reducer.reduce(substitute(energy_density(sys, c), elim.velocities));
  HamiltonianSystem h(sys.bundle(), global + c.momentum_contraction());
  h.set_connection(c, global);
  h.set_constraints(image_constraints(sys, LegendreKind::Reduced));
  return h;
}

Expr almost_regular_defect(const LagrangianSystem& sys, const HamiltonianSystem& h) {
  if (!h.connection()) throw InputError("almost-regular check needs a connection");
  const CoordinateMap fl = legendre_map(sys, LegendreKind::Reduced);
  return fl.pull(*h.global_hamiltonian()) - energy_density(sys, *h.connection());
}

NumericHamiltonian::NumericHamiltonian(const LagrangianSystem& sys)
    : inverter_(sys), lagrangian_(sys.lagrangian(), sys.chart().coordinates()) {}

std::vector<double> NumericHamiltonian::velocities(std::span<const double> xy,
                                                   std::span<const double> p) const {
  return inverter_.solve(xy, p);
}

double NumericHamiltonian::operator()(std::span<const double> xy, std::span<const double> p) const {
  const std::vector<double> v = inverter_.solve(xy, p);
  std::vector<double> values(xy.begin(), xy.end());
  values.insert(values.end(), v.begin(), v.end());
  double pv = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) pv += p[k] * v[k];
  return pv - lagrangian_(values);
}

HdwOperator hdw_residual(const HamiltonianSystem& h, HdwMode mode) {
  const int m = h.bundle().m;
  const int n = h.bundle().n;
  HdwOperator op;
  op.mode = mode;
  op.m = m;
  op.n = n;
  if (mode == HdwMode::Local) {
    for (int nu = 0; nu < m; ++nu) {
      for (int a = 0; a < n; ++a) op.flux.push_back(differentiate(h.hamiltonian(), Symbol::momentum(a, nu)));
    }
    for (int a = 0; a < n; ++a) op.source.push_back(differentiate(h.hamiltonian(), Symbol::field(a)));
    return op;
  }
  if (!h.connection() || !h.global_hamiltonian()) {
    throw InputError("covariant HDW equations need a connection and H^nabla");
  }
  const Connection& c = *h.connection();
  const Expr& hg = *h.global_hamiltonian();
  for (int nu = 0; nu < m; ++nu) {
    for (int a = 0; a < n; ++a) {
      op.flux.push_back(differentiate(hg, Symbol::momentum(a, nu)) + c.gamma(a, nu));
    }
  }
  for (int a = 0; a < n; ++a) {
    Expr s = differentiate(hg, Symbol::field(a));
    for (int eta = 0; eta < m; ++eta) {
      for (int b = 0; b < n; ++b) {
        s += Expr::symbol(Symbol::momentum(b, eta)) * differentiate(c.gamma(b, eta), Symbol::field(a));
      }
    }
    op.source.push_back(std::move(s));
  }
  return op;
}

PiSection::PiSection(int m_, std::vector<Expr> y_, std::vector<Expr> p_)
    : m(m_), y(std::move(y_)), p(std::move(p_)) {
  if (p.size() != y.size() * static_cast<std::size_t>(m)) {
    throw InputError("section needs m*N momentum components");
  }
  auto check = [&](const Expr& e) {
    for (const Symbol& s : e.symbols()) {
      if (s.role() != Role::Base || s.first() >= m) {
        throw InputError("section component depends on " + s.name() + "; only base coordinates are allowed");
      }
    }
  };
  for (const Expr& e : y) check(e);
  for (const Expr& e : p) check(e);
}

CoordinateMap section_map(const BundleSpec& bundle, const PiSection& psi) {
  if (psi.m != bundle.m || static_cast<int>(psi.y.size()) != bundle.n) {
    throw InputError("section dimensions do not match the bundle");
  }
  std::vector<Expr> images;
  for (int nu = 0; nu < bundle.m; ++nu) images.push_back(Expr::symbol(Symbol::base(nu)));
  images.insert(images.end(), psi.y.begin(), psi.y.end());
  images.insert(images.end(), psi.p.begin(), psi.p.end());
  return {bundle.chart(ChartKind::M), bundle.chart(ChartKind::Pi), std::move(images)};
}

std::vector<Expr> hdw_residual_on(const HdwOperator& op, const PiSection& psi) {
  const CoordinateMap sec = section_map(BundleSpec::make(op.m, op.n), psi);
  std::vector<Expr> out;
  for (int nu = 0; nu < op.m; ++nu) {
    for (int a = 0; a < op.n; ++a) {
      const auto k = static_cast<std::size_t>(jet_index(a, nu, op.n));
      out.push_back(differentiate(psi.y[static_cast<std::size_t>(a)], Symbol::base(nu)) - sec.pull(op.flux[k]));
    }
  }
  for (int a = 0; a < op.n; ++a) {
    Expr r = sec.pull(op.source[static_cast<std::size_t>(a)]);
    for (int nu = 0; nu < op.m; ++nu) {
      r += differentiate(psi.p[static_cast<std::size_t>(jet_index(a, nu, op.n))], Symbol::base(nu));
    }
    out.push_back(std::move(r));
  }
  return out;
}

VectorFieldExpr lift_vertical_field(const BundleSpec& bundle, const std::vector<Expr>& beta) {
  if (static_cast<int>(beta.size()) != bundle.n) throw InputError("vertical field needs N components");
  for (const Expr& b : beta) {
    for (const Symbol& s : b.symbols()) {
      const bool ok = (s.role() == Role::Base && s.first() < bundle.m) ||
                      (s.role() == Role::Field && s.first() < bundle.n);
      if (!ok) throw InputError("vertical field component depends on " + s.name());
    }
  }
  const Chart pi = bundle.chart(ChartKind::Pi);
  std::vector<Expr> comps(static_cast<std::size_t>(pi.dim()));
  for (int a = 0; a < bundle.n; ++a) {
    comps[static_cast<std::size_t>(*pi.index_of(Symbol::field(a)))] = beta[static_cast<std::size_t>(a)];
    for (int nu = 0; nu < bundle.m; ++nu) {
      Expr c;
      for (int b = 0; b < bundle.n; ++b) {
        c -= Expr::symbol(Symbol::momentum(b, nu)) *
             differentiate(beta[static_cast<std::size_t>(b)], Symbol::field(a));
      }
      comps[static_cast<std::size_t>(*pi.index_of(Symbol::momentum(a, nu)))] = c;
    }
  }
  return {pi, std::move(comps)};
}

HamiltonianSystem psi_transfer(const HamiltonianSystem& h) {
  HamiltonianSystem out = h;
  out.kind_ = h.kind_ == ChartKind::Pi ? ChartKind::J1PiStar : ChartKind::Pi;
  if (out.constraints_) {
    out.constraints_->chart = out.chart();
    out.constraints_->kind = out.kind_ == ChartKind::Pi ? LegendreKind::Reduced : LegendreKind::Restricted;
  }
  return out;
}

}  // namespace multisym
