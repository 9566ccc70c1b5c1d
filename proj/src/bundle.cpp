#include "multisym/bundle.hpp"

#include "multisym/error.hpp"

namespace multisym {

Connection Connection::trivial(int m, int n) {
  BundleSpec::make(m, n);
  return {m, n, std::vector<Expr>(static_cast<std::size_t>(m * n))};
}

bool Connection::is_trivial() const {
  for (const auto& g : gamma_) {
    if (!g.is_zero()) return false;
  }
  return true;
}

Expr Connection::momentum_contraction() const {
  Expr out;
  for (int nu = 0; nu < m_; ++nu) {
    for (int a = 0; a < n_; ++a) out += Expr::symbol(Symbol::momentum(a, nu)) * gamma(a, nu);
  }
  return out;
}

Expr Connection::contract(const std::vector<Expr>& weights) const {
  if (weights.size() != gamma_.size()) throw InputError("weight count does not match connection");
  Expr out;
  for (std::size_t k = 0; k < gamma_.size(); ++k) out += weights[k] * gamma_[k];
  return out;
}

Connection make_connection(int m, int n, std::vector<Expr> gamma) {
  BundleSpec::make(m, n);
  if (static_cast<int>(gamma.size()) != m * n) {
    throw InputError("connection needs m*N = " + std::to_string(m * n) + " components, got " +
                     std::to_string(gamma.size()));
  }
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    for (const Symbol& s : gamma[k].symbols()) {
      const bool ok = (s.role() == Role::Base && s.first() < m) ||
                      (s.role() == Role::Field && s.first() < n) || s.role() == Role::Auxiliary;
      if (!ok) {
        throw InputError("connection component " + std::to_string(k) + " depends on " + s.name() +
                         "; only base and field coordinates are allowed");
      }
    }
  }
  return {m, n, std::move(gamma)};
}

DiffForm momentum_part(const Chart& chart) {
  const int m = chart.base_dim();
  const int n = chart.fiber_dim();
  DiffForm out(chart, m);
  for (int nu = 0; nu < m; ++nu) {
    const DiffForm vol = volume_form_minus(chart, nu);
    for (int a = 0; a < n; ++a) {
      out += Expr::symbol(Symbol::momentum(a, nu)) *
             wedge(DiffForm::differential(chart, Symbol::field(a)), vol);
    }
  }
  return out;
}

DiffForm canonical_form(const BundleSpec& bundle, ChartKind kind) {
  const Chart chart = bundle.chart(kind);
  Expr energy;
  if (kind == ChartKind::J1Estar) {
    for (int nu = 0; nu < bundle.m; ++nu) energy += Expr::symbol(Symbol::generalized(nu, nu));
  } else if (kind == ChartKind::MPi) {
    energy = Expr::symbol(Symbol::extended());
  } else {
    throw InputError("no canonical form on chart " + chart.name());
  }
  return momentum_part(chart) + energy * volume_form(chart);
}

std::string_view projection_name(Projection p) {
  switch (p) {
    case Projection::Delta: return "delta";
    case Projection::Iota0: return "iota0";
    case Projection::Mu: return "mu";
    case Projection::Psi: return "psi";
    case Projection::PsiInverse: return "psi_inverse";
  }
  return "?";
}

namespace {

// Maps every target coordinate also present in the source to itself; the
// rest come from `extra`.
CoordinateMap keep_common(const Chart& source, const Chart& target,
                          const std::map<Symbol, Expr>& extra = {}) {
  std::vector<Expr> images;
  for (const Symbol& s : target.coordinates()) {
    if (auto it = extra.find(s); it != extra.end()) {
      images.push_back(it->second);
    } else if (source.contains(s)) {
      images.push_back(Expr::symbol(s));
    } else {
      throw InputError("no image for " + s.name());
    }
  }
  return {source, target, std::move(images)};
}

}  // namespace

CoordinateMap relabel(const Chart& source, const Chart& target) {
  if (source.dim() != target.dim()) throw InputError("relabel needs charts of equal dimension");
  return keep_common(source, target);
}

CoordinateMap projection_map(const BundleSpec& bundle, Projection p) {
  switch (p) {
    case Projection::Delta:
      return keep_common(bundle.chart(ChartKind::J1Estar), bundle.chart(ChartKind::Pi));
    case Projection::Iota0: {
      Expr trace;
      for (int nu = 0; nu < bundle.m; ++nu) trace += Expr::symbol(Symbol::generalized(nu, nu));
      return keep_common(bundle.chart(ChartKind::J1Estar), bundle.chart(ChartKind::MPi),
                         {{Symbol::extended(), trace}});
    }
    case Projection::Mu:
      return keep_common(bundle.chart(ChartKind::MPi), bundle.chart(ChartKind::J1PiStar));
    case Projection::Psi:
      return relabel(bundle.chart(ChartKind::J1PiStar), bundle.chart(ChartKind::Pi));
    case Projection::PsiInverse:
      return relabel(bundle.chart(ChartKind::Pi), bundle.chart(ChartKind::J1PiStar));
  }
  throw InputError("unknown projection");
}

CoordinateMap delta_section(const BundleSpec& bundle, const std::vector<Expr>& q) {
  if (static_cast<int>(q.size()) != bundle.m * bundle.m) {
    throw InputError("section of delta needs m^2 generalized momenta");
  }
  std::map<Symbol, Expr> extra;
  for (int eta = 0; eta < bundle.m; ++eta) {
    for (int nu = 0; nu < bundle.m; ++nu) {
      extra.emplace(Symbol::generalized(eta, nu), q[static_cast<std::size_t>(eta * bundle.m + nu)]);
    }
  }
  return keep_common(bundle.chart(ChartKind::Pi), bundle.chart(ChartKind::J1Estar), extra);
}

}  // namespace multisym
