#include <algorithm>
#include <cmath>
#include <cstdio>

#include "multisym/error.hpp"
#include "multisym/latex.hpp"
#include "multisym/theory.hpp"

namespace multisym {

namespace {

constexpr double kSymbolicTol = 1e-10;
constexpr double kPdeTol = 1e-3;
constexpr double kRoundoffFloor = 1e-12;

Json strings(const std::vector<Expr>& es) {
  Json out = Json::array();
  for (const Expr& e : es) out.push_back(e.str());
  return out;
}

Json latex_strings(const std::vector<Expr>& es) {
  Json out = Json::array();
  for (const Expr& e : es) out.push_back(latex(e));
  return out;
}

Json check_json(const IdentityCheck& c) {
  Json j;
  j["name"] = c.name;
  j["verdict"] = std::string(verdict_label(c.verdict));
  j["evidence"] = c.evidence;
  return j;
}

Json norms_json(const Norms& n) {
  Json j;
  j["max"] = n.max;
  j["rms"] = n.rms;
  return j;
}

Json dimensions_json(int m, int n) {
  Json j;
  j["m"] = m;
  j["N"] = n;
  for (ChartKind k : {ChartKind::E, ChartKind::J1E, ChartKind::J1Estar, ChartKind::Pi, ChartKind::MPi, ChartKind::J1PiStar}) {
    j[std::string(chart_kind_name(k))] = chart_dimension(k, m, n);
  }
  return j;
}

Json regularity_json(const RegularityReport& r) {
  Json j;
  j["classification"] = std::string(regularity_name(r.classification));
  j["dimension"] = r.dimension;
  j["sampled_ranks"] = r.sampled_ranks;
  j["exact_rank"] = r.exact_rank ? Json(*r.exact_rank) : Json(nullptr);
  j["kernel_dimension"] = r.kernel_dimension >= 0 ? Json(r.kernel_dimension) : Json(nullptr);
  j["hyperregular_certified"] = r.hyperregular_certified;
  return j;
}

Json constraint_json(const ConstraintSet& c) {
  Json j;
  j["chart"] = c.chart.name();
  j["linear_count"] = c.linear_count;
  j["constraints"] = strings(c.constraints);
  j["notes"] = c.notes;
  return j;
}

std::string momentum_name(int k, int n) { return Symbol::momentum(k % n, k / n).name(); }

bool is_affine(const LagrangianSystem& sys) {
  try {
    (void)affine_momenta(sys);
    return true;
  } catch (const InputError&) {
    return false;
  }
}

bool is_hyperregular(const LagrangianSystem& sys) {
  const auto hc = constant_hessian(sys);
  return hc && rank(*hc) == static_cast<std::size_t>(sys.jet_count());
}

struct Context {
  const TheorySpec& spec;
  const RunOptions& opt;
  std::optional<LagrangianSystem> sys;
  Connection conn;
  bool conn_given = false;
};

Context make_context(const TheorySpec& spec, const RunOptions& opt) {
  Context c{spec, opt, std::nullopt, Connection::trivial(spec.bundle.m, spec.bundle.n), false};
  if (spec.lagrangian) c.sys.emplace(spec.bundle, *spec.lagrangian);
  if (opt.spec_connection) {
    if (!spec.connection) throw InputError("--connection spec needs a 'connection' field in the theory");
    c.conn = *spec.connection;
    c.conn_given = true;
  }
  return c;
}

// The given Hamiltonian, else the one associated to the Lagrangian. Empty when neither applies.
std::optional<std::pair<HamiltonianSystem, std::string>> hamiltonian_of(const Context& c) {
  const TheorySpec& s = c.spec;
  if (s.hamiltonian) {
    HamiltonianSystem h(s.bundle, *s.hamiltonian, s.hamiltonian_chart);
    if (c.conn_given) h.set_connection(c.conn, h.hamiltonian() - c.conn.momentum_contraction());
    return std::make_pair(h, std::string("given"));
  }
  if (!c.sys) return std::nullopt;
  if (is_hyperregular(*c.sys)) {
    return std::make_pair(from_hyperregular(*c.sys, c.conn_given ? std::optional(c.conn) : std::nullopt),
                          std::string("hyper-regular"));
  }
  if (is_affine(*c.sys)) return std::make_pair(restrict_almost_regular(*c.sys, c.conn), std::string("almost-regular"));
  return std::nullopt;
}

Json hdw_json(const HdwOperator& op) {
  Json j;
  j["mode"] = op.mode == HdwMode::Local ? "local" : "covariant";
  j["flux"] = strings(op.flux);
  j["source"] = strings(op.source);
  return j;
}

Json derive(const Context& c, Json& latex_out) {
  const TheorySpec& s = c.spec;
  const int m = s.bundle.m;
  const int n = s.bundle.n;
  Json out;
  Json dims = Json::array();
  dims.push_back(dimensions_json(m, n));
  for (int extra : s.dimension_checks) dims.push_back(dimensions_json(m, extra));
  out["dimensions"] = dims;

  if (c.sys) {
    const LagrangianSystem& sys = *c.sys;
    out["lagrangian"] = sys.lagrangian().str();
    const auto p = momenta(sys);
    Json mom;
    for (std::size_t k = 0; k < p.size(); ++k) mom[momentum_name(static_cast<int>(k), n)] = p[k].str();
    out["momenta"] = mom;
    Json hs = Json::array();
    for (const auto& row : hessian(sys)) hs.push_back(strings(row));
    out["hessian"] = hs;
    out["regularity"] = regularity_json(classify_regularity(sys, c.opt.samples));

    Json leg;
    for (LegendreKind k : {LegendreKind::Generalized, LegendreKind::Reduced, LegendreKind::ExtendedHat,
                           LegendreKind::ExtendedTilde, LegendreKind::Restricted}) {
      const CoordinateMap f = legendre_map(sys, k);
      Json images;
      for (int i = m + n; i < f.target().dim(); ++i) images[f.target().coordinate(i).name()] = f.image(i).str();
      leg[std::string(legendre_name(k))] = images;
    }
    out["legendre"] = leg;

    if (is_affine(sys)) {
      Json cons;
      for (LegendreKind k : {LegendreKind::Reduced, LegendreKind::ExtendedHat, LegendreKind::ExtendedTilde,
                             LegendreKind::Generalized}) {
        const ConstraintSet set = image_constraints(sys, k);
        cons[std::string(legendre_name(k))] = constraint_json(set);
        if (c.opt.latex) latex_out["constraints_" + std::string(legendre_name(k))] = latex_strings(set.constraints);
      }
      out["constraints"] = cons;
    } else {
      out["constraints"] = nullptr;
    }

    const CartanForms pc = poincare_cartan(sys);
    Json cartan;
    cartan["theta_L"] = pc.theta.str();
    cartan["omega_L"] = pc.omega.str();
    out["poincare_cartan"] = cartan;
    out["energy_density"] = energy_density(sys, c.conn).str();

    Json el = Json::array();
    for (int a = 0; a < n; ++a) {
      Json e;
      e["field"] = Symbol::field(a).name();
      e["source"] = differentiate(sys.lagrangian(), Symbol::field(a)).str();
      std::vector<Expr> fluxes;
      for (int nu = 0; nu < m; ++nu) fluxes.push_back(p[static_cast<std::size_t>(jet_index(a, nu, n))]);
      e["fluxes"] = strings(fluxes);
      el.push_back(e);
    }
    out["euler_lagrange"] = el;
    if (c.opt.latex) {
      latex_out["lagrangian"] = latex(sys.lagrangian());
      latex_out["momenta"] = latex_strings(p);
      latex_out["theta_L"] = latex(pc.theta);
      latex_out["omega_L"] = latex(pc.omega);
    }
  }

  const auto h = hamiltonian_of(c);
  if (h) {
    const HamiltonianSystem& hs = h->first;
    Json hj;
    hj["origin"] = h->second;
    hj["chart"] = hs.chart().name();
    hj["H"] = hs.hamiltonian().str();
    hj["H_nabla"] = hs.global_hamiltonian() ? Json(hs.global_hamiltonian()->str()) : Json(nullptr);
    const CartanForms hc = hamilton_cartan(hs);
    hj["theta_h"] = hc.theta.str();
    hj["omega_h"] = hc.omega.str();
    hj["hdw"] = hdw_json(hdw_residual(hs, HdwMode::Local));
    hj["hdw_covariant"] = hs.connection() ? hdw_json(hdw_residual(hs, HdwMode::Covariant)) : Json(nullptr);
    out["hamiltonian"] = hj;
    if (c.opt.latex) {
      latex_out["H"] = latex(hs.hamiltonian());
      latex_out["theta_h"] = latex(hc.theta);
      latex_out["omega_h"] = latex(hc.omega);
    }
  } else {
    out["hamiltonian"] = nullptr;
  }
  return out;
}

Json classify(const Context& c, std::vector<IdentityCheck>& checks) {
  if (!c.sys) throw InputError("classify needs a lagrangian");
  const RegularityReport r = classify_regularity(*c.sys, c.opt.samples);
  Json out = regularity_json(r);
  if (is_affine(*c.sys)) {
    out["linear_constraints"] = image_constraints(*c.sys, LegendreKind::Reduced).linear_count;
  } else {
    out["linear_constraints"] = nullptr;
  }
  if (c.spec.assert_hyperregular) {
    checks.push_back({"declared hyper-regular", r.hyperregular_certified ? Verdict::Proven : Verdict::Fail,
                      std::string("classification ") + std::string(regularity_name(r.classification))});
  }
  return out;
}

VerifyOptions verify_options(const Context& c) {
  VerifyOptions v;
  v.samples = std::max(64, c.opt.samples);
  v.tol = c.opt.tol.value_or(kSymbolicTol);
  if (c.conn_given) v.connection = c.conn;
  return v;
}

void verify(const Context& c, std::vector<IdentityCheck>& checks) {
  const TheorySpec& s = c.spec;
  const VerifyOptions vopt = verify_options(c);
  std::vector<IdentityCheck> suite;
  if (c.sys) {
    suite = verify_lagrangian(*c.sys, vopt);
    if (s.hamiltonian && is_hyperregular(*c.sys)) {
      suite.push_back(expr_check("given H = associated H", *s.hamiltonian - from_hyperregular(*c.sys).hamiltonian(), vopt));
    }
  } else {
    const auto h = hamiltonian_of(c);
    suite = verify_hamiltonian(h->first, vopt);
  }
  for (int extra : s.dimension_checks) {
    for (IdentityCheck ch : verify_bundle(BundleSpec::make(s.bundle.m, extra), vopt)) {
      ch.name += " (N=" + std::to_string(extra) + ")";
      suite.push_back(std::move(ch));
    }
  }
  const auto h = hamiltonian_of(c);
  for (const SectionSpec& sec : s.sections) {
    if (c.sys && sec.p.empty()) {
      const auto r = euler_lagrange_residual(*c.sys, SectionExpr(s.bundle.m, sec.y));
      Expr total;
      for (const Expr& e : r) total += e * e;
      suite.push_back(expr_check("section " + sec.name + " solves Euler-Lagrange", total, vopt));
    }
    if (h && !sec.p.empty()) {
      const auto r = hdw_residual_on(hdw_residual(h->first, HdwMode::Local), PiSection(s.bundle.m, sec.y, sec.p));
      Expr total;
      for (const Expr& e : r) total += e * e;
      suite.push_back(expr_check("section " + sec.name + " solves HDW", total, vopt));
    }
  }
  checks.insert(checks.end(), suite.begin(), suite.end());
}

// p^0_A on the first line from y and dy/dx^0 through the Legendre map.
std::vector<Expr> initial_momentum(const LagrangianSystem& sys, const InitialData& d) {
  const int m = sys.bundle().m;
  const int n = sys.bundle().n;
  Assignment a;
  for (int b = 0; b < n; ++b) {
    a.emplace(Symbol::field(b), d.y[static_cast<std::size_t>(b)]);
    a.emplace(Symbol::velocity(b, 0), d.rate[static_cast<std::size_t>(b)]);
    for (int nu = 1; nu < m; ++nu) a.emplace(Symbol::velocity(b, nu), differentiate(d.y[static_cast<std::size_t>(b)], Symbol::base(nu)));
  }
  const auto p = momenta(sys);
  std::vector<Expr> out;
  for (int b = 0; b < n; ++b) out.push_back(substitute(p[static_cast<std::size_t>(b)], a));
  return out;
}

Json solve(const Context& c, std::vector<IdentityCheck>& checks) {
  const TheorySpec& s = c.spec;
  const int m = s.bundle.m;
  const int n = s.bundle.n;
  if (!s.grid) throw InputError("solve needs a 'grid' in the theory");
  if (!s.initial_data) throw InputError("solve needs 'initial_data' in the theory");
  Grid grid = *s.grid;
  if (c.opt.grid_shape) {
    if (static_cast<int>(c.opt.grid_shape->size()) != m) throw InputError("--grid needs " + std::to_string(m) + " sizes");
    grid = Grid(grid.lower(), grid.upper(), *c.opt.grid_shape,
                [&] {
                  std::vector<bool> p;
                  for (int nu = 0; nu < m; ++nu) p.push_back(grid.periodic(nu));
                  return p;
                }());
  }
  const double tol = c.opt.tol.value_or(kPdeTol);
  auto pass = [&](std::string name, bool ok, std::string evidence) {
    checks.push_back({std::move(name), ok ? Verdict::SampledPass : Verdict::Fail, std::move(evidence)});
  };
  auto fmt = [](const char* f, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return std::string(buf);
  };

  Json out;
  Json g;
  g["lower"] = grid.lower();
  g["upper"] = grid.upper();
  g["shape"] = grid.shape();
  std::vector<bool> per;
  for (int nu = 0; nu < m; ++nu) per.push_back(grid.periodic(nu));
  g["periodic"] = per;
  out["grid"] = g;

  const auto hp = hamiltonian_of(c);
  if (!hp) throw InputError("solve needs a hyper-regular lagrangian or a hamiltonian");
  const HamiltonianSystem& h = hp->first;

  std::optional<GridSection> phi;
  if (c.sys) {
    if (s.initial_data->rate.empty()) throw InputError("Lagrangian evolution needs initial_data.rate");
    phi = solve_evolution(*c.sys, *s.initial_data, grid);
  }
  InitialData hd{s.initial_data->y, s.initial_momentum};
  if (hd.rate.empty()) hd.rate = initial_momentum(*c.sys, *s.initial_data);
  const GridSection psi = solve_evolution(h, hd, grid);
  const HdwOperator op = hdw_residual(h.kind() == ChartKind::Pi ? h : psi_transfer(h), HdwMode::Local);

  const Norms res = residual_norm(op, psi);
  out["hdw_residual"] = norms_json(res);
  if (phi) {
    double diff = 0.0;
    for (int a = 0; a < n; ++a) diff = std::max(diff, max_difference(*phi, psi, Symbol::field(a)));
    out["el_hdw_max_difference"] = diff;
    pass("EL and HDW evolutions agree", diff <= tol, fmt("max |y_EL - y_HDW| = %.3g (tol %.3g)", diff, tol));
    const GridSection lp = legendre_prolong(*c.sys, *phi);
    out["prolonged_el_residual"] = norms_json(residual_norm(op, lp));
    out["euler_lagrange_residual"] = norms_json(euler_lagrange_norm(*c.sys, *phi));
    const double al = action_lagrangian(*c.sys, *phi);
    const double ah = action_hamiltonian(h, lp);
    Json act;
    act["lagrangian"] = al;
    act["hamiltonian"] = ah;
    act["difference"] = std::abs(al - ah);
    out["action"] = act;
    pass("action equality on the grid", std::abs(al - ah) <= tol, fmt("|S_L - S_h| = %.3g (tol %.3g)", std::abs(al - ah), tol));
  }

  Json errors;
  for (const SectionSpec& sec : s.sections) {
    const GridSection exact = sample_section(Chart(ChartKind::E, m, n), grid, sec.y);
    Json e;
    if (phi) {
      double d = 0.0;
      for (int a = 0; a < n; ++a) d = std::max(d, max_difference(*phi, exact, Symbol::field(a)));
      e["el"] = d;
    }
    double d = 0.0;
    for (int a = 0; a < n; ++a) {
      const auto& fa = psi.field(Symbol::field(a));
      const auto& fb = exact.field(Symbol::field(a));
      for (std::size_t i = 0; i < fa.size(); ++i) d = std::max(d, std::abs(fa[i] - fb[i]));
    }
    e["hdw"] = d;
    if (c.sys) {
      // Pointwise action densities of the closed-form section.
      const SectionExpr se(m, sec.y);
      const Assignment jet = jet_prolongation(se, n);
      std::vector<Expr> p;
      for (const Expr& pk : momenta(*c.sys)) p.push_back(substitute(pk, jet));
      const double al = action_lagrangian(*c.sys, se, grid);
      const double ah = action_hamiltonian(h, PiSection(m, sec.y, p), grid);
      e["action_lagrangian"] = al;
      e["action_hamiltonian"] = ah;
      pass("action equality for section " + sec.name, std::abs(al - ah) <= 1e-6,
           fmt("|S_L - S_h| = %.3g (tol %.3g)", std::abs(al - ah), 1e-6));
    }
    errors[sec.name] = e;
  }
  out["section_errors"] = errors.empty() ? Json(nullptr) : errors;

  // Vertical-lift criterion on the solved section and on a perturbed copy.
  {
    std::mt19937_64 rng(0x11f7);
    const GridSection noisy = perturb(psi, 0.1, 0x9e37);
    const double bound = 10.0 * std::max(res.max, kRoundoffFloor);
    double worst = 0.0;
    double noisy_min = INFINITY;
    for (int i = 0; i < 10; ++i) {
      const std::vector<Expr> beta = random_vertical_coefficients(n, rng);
      worst = std::max(worst, lift_criterion_norm(h, beta, psi).max);
      noisy_min = std::min(noisy_min, lift_criterion_norm(h, beta, noisy).max);
    }
    Json lift;
    lift["max_norm"] = worst;
    lift["bound"] = bound;
    lift["perturbed_min_norm"] = noisy_min;
    out["lift_criterion"] = lift;
    pass("lift criterion on the solved section", worst <= bound, fmt("max %.3g <= bound %.3g", worst, bound));
    pass("lift criterion fails on the perturbed section", noisy_min >= 10.0 * bound,
         fmt("min %.3g >= 10 x bound %.3g", noisy_min, bound));
  }

  if (m == 1) {
    const auto e = energy_along(h.kind() == ChartKind::Pi ? h : psi_transfer(h), psi);
    double drift = 0.0;
    for (double v : e) drift = std::max(drift, std::abs(v - e.front()));
    out["energy_drift"] = drift;
    pass("energy conserved", drift <= 1e-8, fmt("max |H - H(0)| = %.3g (tol %.3g)", drift, 1e-8));
  } else {
    out["energy_drift"] = nullptr;
  }
  return out;
}

}  // namespace

RunResult execute(const std::string& command, const TheorySpec& spec, const RunOptions& opt) {
  if (command != "derive" && command != "classify" && command != "verify" && command != "solve") {
    throw InputError("unknown command '" + command + "'");
  }
  const Context c = make_context(spec, opt);
  Json report;
  report["command"] = command;
  report["theory"] = spec.name;
  Json b;
  b["m"] = spec.bundle.m;
  b["N"] = spec.bundle.n;
  report["bundle"] = b;
  Json o;
  o["samples"] = opt.samples;
  o["tol"] = opt.tol ? Json(*opt.tol) : Json(nullptr);
  o["connection"] = opt.spec_connection ? "spec" : "trivial";
  report["options"] = o;

  std::vector<IdentityCheck> checks;
  Json latex_out = Json::object();
  if (command == "derive") {
    report["derived"] = derive(c, latex_out);
  } else if (command == "classify") {
    report["regularity"] = classify(c, checks);
  } else if (command == "verify") {
    verify(c, checks);
  } else {
    report["solve"] = solve(c, checks);
  }
  if (opt.latex) report["latex"] = latex_out;
  Json cj = Json::array();
  for (const auto& ch : checks) cj.push_back(check_json(ch));
  report["checks"] = cj;
  const bool ok = all_pass(checks);
  report["status"] = ok ? "ok" : "identity-failure";
  return {report, ok ? 0 : static_cast<int>(ErrorCode::IdentityFailure)};
}

}  // namespace multisym
