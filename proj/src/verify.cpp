#include "multisym/verify.hpp"

#include <algorithm>
#include <cstdio>

#include "multisym/error.hpp"

namespace multisym {

namespace {

std::string short_str(const std::string& s) {
  constexpr std::size_t limit = 120;
  return s.size() <= limit ? s : s.substr(0, limit) + "...";
}

std::string evidence_of(const ZeroTest& z) {
  if (z.verdict == ZeroVerdict::ProvenZero) return "normal form zero";
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |residual| %.3g over %d samples", z.max_abs, z.samples);
  return buf;
}

IdentityCheck pass_fail(std::string name, bool ok, std::string evidence) {
  return {std::move(name), ok ? Verdict::Proven : Verdict::Fail, std::move(evidence)};
}

IdentityCheck map_check(std::string name, const CoordinateMap& a, const CoordinateMap& b) {
  const auto diff = first_difference(a, b);
  return pass_fail(std::move(name), !diff, diff ? "differs at " + *diff : "all images equal in normal form");
}

DiffForm top_form(const Chart& chart, const Expr& c) { return c * volume_form(chart); }

// Combines several checks into one line: the weakest verdict wins.
IdentityCheck combine(std::string name, const std::vector<IdentityCheck>& parts) {
  IdentityCheck out{std::move(name), Verdict::Proven, ""};
  std::size_t proven = 0;
  for (const auto& p : parts) {
    if (p.verdict == Verdict::Proven) ++proven;
    if (p.verdict == Verdict::Fail && out.verdict != Verdict::Fail) {
      out.verdict = Verdict::Fail;
      out.evidence = p.name + ": " + p.evidence;
    } else if (p.verdict == Verdict::SampledPass && out.verdict == Verdict::Proven) {
      out.verdict = Verdict::SampledPass;
    }
  }
  if (out.verdict != Verdict::Fail) {
    out.evidence = std::to_string(proven) + "/" + std::to_string(parts.size()) + " proven";
  }
  return out;
}

std::vector<Symbol> base_field_symbols(int m, int n) {
  std::vector<Symbol> s;
  for (int nu = 0; nu < m; ++nu) s.push_back(Symbol::base(nu));
  for (int a = 0; a < n; ++a) s.push_back(Symbol::field(a));
  return s;
}

void append_hamiltonian(std::vector<IdentityCheck>& out, const HamiltonianSystem& h, const VerifyOptions& opt) {
  const BundleSpec& b = h.bundle();
  const CartanForms hc = hamilton_cartan(h);
  out.push_back(form_check("d Omega_h = 0", exterior_derivative(hc.omega), opt));
  const HamiltonianSystem other = psi_transfer(h);
  out.push_back(form_check("psi transfer preserves Theta_h",
                           pullback(relabel(h.chart(), other.chart()), hamilton_cartan(other).theta) - hc.theta, opt));
  out.push_back(form_check("h_delta^* Theta_hat = Theta_h",
                           pullback(hamiltonian_section(h), canonical_form(b, ChartKind::J1Estar)) - hc.theta, opt));
  if (h.kind() == ChartKind::Pi) {
    out.push_back(map_check("delta o h_delta = id", compose(projection_map(b, Projection::Delta), hamiltonian_section(h)),
                            CoordinateMap::identity(h.chart())));
  }
  if (h.connection() && h.global_hamiltonian()) {
    out.push_back(expr_check("H = H_nabla + p Gamma",
                             h.hamiltonian() - *h.global_hamiltonian() - h.connection()->momentum_contraction(), opt));
    const HdwOperator local = hdw_residual(h, HdwMode::Local);
    const HdwOperator cov = hdw_residual(h, HdwMode::Covariant);
    std::vector<IdentityCheck> parts;
    for (std::size_t k = 0; k < local.flux.size(); ++k) parts.push_back(expr_check("flux", local.flux[k] - cov.flux[k], opt));
    for (std::size_t a = 0; a < local.source.size(); ++a) {
      parts.push_back(expr_check("source", local.source[a] - cov.source[a], opt));
    }
    out.push_back(combine("covariant HDW = local HDW", parts));
  }
}

}  // namespace

std::string_view verdict_label(Verdict v) {
  switch (v) {
    case Verdict::Proven: return "proven";
    case Verdict::SampledPass: return "sampled-pass";
    case Verdict::Fail: return "fail";
  }
  return "fail";
}

Verdict verdict_of(const ZeroTest& z, double tol) {
  if (z.verdict == ZeroVerdict::ProvenZero) return Verdict::Proven;
  if (z.verdict == ZeroVerdict::Undecided && z.max_abs <= tol) return Verdict::SampledPass;
  return Verdict::Fail;
}

IdentityCheck form_check(std::string name, const DiffForm& difference, const VerifyOptions& opt) {
  const ZeroTest z = is_zero(difference, opt.samples);
  const Verdict v = verdict_of(z, opt.tol);
  std::string ev = evidence_of(z);
  if (v == Verdict::Fail) ev = "nonzero: " + short_str(difference.str());
  return {std::move(name), v, std::move(ev)};
}

IdentityCheck expr_check(std::string name, const Expr& difference, const VerifyOptions& opt) {
  const ZeroTest z = is_zero(difference, opt.samples);
  const Verdict v = verdict_of(z, opt.tol);
  std::string ev = evidence_of(z);
  if (v == Verdict::Fail) ev = "nonzero: " + short_str(difference.str());
  return {std::move(name), v, std::move(ev)};
}

Expr random_polynomial(std::span<const Symbol> symbols, int degree, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<int> terms(1, 4);
  std::uniform_int_distribution<int> deg(0, degree);
  std::uniform_int_distribution<std::size_t> pick(0, symbols.empty() ? 0 : symbols.size() - 1);
  Expr out;
  const int count = terms(rng);
  for (int t = 0; t < count; ++t) {
    int c = coef(rng);
    if (c == 0) c = 1;
    Expr term(c);
    const int d = symbols.empty() ? 0 : deg(rng);
    for (int i = 0; i < d; ++i) term *= Expr::symbol(symbols[pick(rng)]);
    out += term;
  }
  return out;
}

std::vector<Expr> random_vertical_coefficients(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-2, 2);
  std::uniform_int_distribution<int> field(0, n - 1);
  auto c = [&] { return Expr::rational(coef(rng), 4); };
  auto y = [&] { return Expr::symbol(Symbol::field(field(rng))); };
  std::vector<Expr> out;
  for (int a = 0; a < n; ++a) {
    int lead = coef(rng);
    if (lead == 0) lead = 2;  // keeps every beta^A nonzero
    out.push_back(Expr::rational(lead, 4) + c() * y() + c() * y() * y());
  }
  return out;
}

Connection random_connection(int m, int n, std::mt19937_64& rng) {
  const auto syms = base_field_symbols(m, n);
  std::vector<Expr> g;
  for (int k = 0; k < m * n; ++k) g.push_back(random_polynomial(syms, 2, rng));
  return make_connection(m, n, std::move(g));
}

DiffForm energy_identity_defect(const LagrangianSystem& sys, const Connection& c) {
  const BundleSpec& b = sys.bundle();
  const DiffForm pulled = pullback(legendre_map(sys, LegendreKind::Reduced), connection_section_form(b, c));
  return pulled - poincare_cartan(sys).theta - top_form(sys.chart(), energy_density(sys, c));
}

std::vector<IdentityCheck> verify_bundle(const BundleSpec& b, const VerifyOptions& opt) {
  (void)opt;
  std::vector<IdentityCheck> out;
  const CoordinateMap chain = compose(projection_map(b, Projection::Psi),
                                      compose(projection_map(b, Projection::Mu), projection_map(b, Projection::Iota0)));
  out.push_back(map_check("psi o mu o iota0 = delta", chain, projection_map(b, Projection::Delta)));
  const int m = b.m;
  const int n = b.n;
  const int jets = m + n + m * n;
  const bool dims = chart_dimension(ChartKind::J1E, m, n) == jets &&
                    chart_dimension(ChartKind::J1Estar, m, n) == jets + m * m &&
                    chart_dimension(ChartKind::Pi, m, n) == jets && chart_dimension(ChartKind::MPi, m, n) == jets + 1 &&
                    chart_dimension(ChartKind::J1PiStar, m, n) == jets;
  out.push_back(pass_fail("chart dimensions", dims,
                          "J1E " + std::to_string(chart_dimension(ChartKind::J1E, m, n)) + ", J1E* " +
                              std::to_string(chart_dimension(ChartKind::J1Estar, m, n)) + ", Pi " +
                              std::to_string(chart_dimension(ChartKind::Pi, m, n)) + ", MPi " +
                              std::to_string(chart_dimension(ChartKind::MPi, m, n))));
  return out;
}

std::vector<IdentityCheck> verify_lagrangian(const LagrangianSystem& sys, const VerifyOptions& opt) {
  const BundleSpec& b = sys.bundle();
  std::vector<IdentityCheck> out = verify_bundle(b, opt);

  {
    const ExprMatrix hs = hessian(sys);
    std::vector<IdentityCheck> parts;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      for (std::size_t j = i + 1; j < hs.size(); ++j) parts.push_back(expr_check("entry", hs[i][j] - hs[j][i], opt));
    }
    out.push_back(combine("Hessian symmetric", parts));
  }
  const CartanForms pc = poincare_cartan(sys);
  IndexTuple vol(static_cast<std::size_t>(b.m));
  for (int nu = 0; nu < b.m; ++nu) vol[static_cast<std::size_t>(nu)] = nu;
  out.push_back(expr_check("Theta_L volume coefficient = -E_L",
                           pc.theta.coefficient(vol) + energy_density(sys, Connection::trivial(b.m, b.n)), opt));
  out.push_back(form_check("d Omega_L = 0", exterior_derivative(pc.omega), opt));

  for (const CompatCheck& c : check_projection_compat(sys)) {
    out.push_back(pass_fail(c.name, c.pass, c.pass ? "all images equal in normal form" : "differs at " + c.detail));
  }

  const DiffForm theta_l = reduced_cartan_form(sys);
  out.push_back(form_check("extended_tilde^* Theta = Theta_L",
                           pullback(legendre_map(sys, LegendreKind::ExtendedTilde), canonical_form(b, ChartKind::MPi)) - pc.theta,
                           opt));
  out.push_back(form_check("extended_hat^* Theta = theta_L",
                           pullback(legendre_map(sys, LegendreKind::ExtendedHat), canonical_form(b, ChartKind::MPi)) - theta_l,
                           opt));
  out.push_back(form_check("generalized^* Theta_hat = theta_L",
                           pullback(legendre_map(sys, LegendreKind::Generalized), canonical_form(b, ChartKind::J1Estar)) - theta_l,
                           opt));

  {
    std::mt19937_64 rng(opt.seed);
    std::vector<IdentityCheck> parts;
    if (opt.connection) parts.push_back(form_check("given connection", energy_identity_defect(sys, *opt.connection), opt));
    for (int i = 0; i < opt.random_connections; ++i) {
      const Connection c = random_connection(b.m, b.n, rng);
      parts.push_back(form_check("connection " + std::to_string(i), energy_identity_defect(sys, c), opt));
    }
    out.push_back(combine("FL^* Theta_h_nabla - Theta_L = E_nabla d^m x", parts));
  }

  bool affine = true;
  try {
    (void)affine_momenta(sys);
  } catch (const InputError&) {
    affine = false;
  }
  const Connection conn = opt.connection ? *opt.connection : Connection::trivial(b.m, b.n);
  const auto hc = constant_hessian(sys);
  const bool hyperregular = hc && rank(*hc) == static_cast<std::size_t>(b.m * b.n);

  if (affine) {
    const ConstraintSet reduced = image_constraints(sys, LegendreKind::Reduced);
    const std::size_t kernel = static_cast<std::size_t>(b.m * b.n) - rank(*hc);
    out.push_back(pass_fail("kernel dimension = linear constraint count", kernel == reduced.linear_count,
                            "kernel " + std::to_string(kernel) + ", constraints " + std::to_string(reduced.linear_count)));
    for (LegendreKind k : {LegendreKind::Reduced, LegendreKind::ExtendedHat, LegendreKind::ExtendedTilde,
                           LegendreKind::Generalized}) {
      const ConstraintSet set = k == LegendreKind::Reduced ? reduced : image_constraints(sys, k);
      const ZeroTest z = check_constraints(sys, set);
      const Verdict v = verdict_of(z, opt.tol);
      out.push_back({"constraints vanish on the " + std::string(legendre_name(k)) + " image", v,
                     std::to_string(set.constraints.size()) + " constraints, " + evidence_of(z)});
    }
    if (!hyperregular) {
      try {
        const HamiltonianSystem h0 = restrict_almost_regular(sys, conn);
        out.push_back(expr_check("FL_0^* H_0 = E_nabla_L", almost_regular_defect(sys, h0), opt));
      } catch (const Error& e) {
        out.push_back({"FL_0^* H_0 = E_nabla_L", Verdict::Fail, e.what()});
      }
    }
  }

  if (hyperregular) {
    const HamiltonianSystem h = from_hyperregular(sys, conn);
    const CartanForms hcf = hamilton_cartan(h);
    const CoordinateMap fl = legendre_map(sys, LegendreKind::Reduced);
    out.push_back(form_check("FL^* Theta_h = Theta_L", pullback(fl, hcf.theta) - pc.theta, opt));
    out.push_back(form_check("FL^* Omega_h = Omega_L", pullback(fl, hcf.omega) - pc.omega, opt));
    append_hamiltonian(out, h, opt);

    // Pointwise action equality on a polynomial section.
    std::mt19937_64 rng(opt.seed ^ 0x5ec7);
    std::vector<Symbol> base;
    for (int nu = 0; nu < b.m; ++nu) base.push_back(Symbol::base(nu));
    std::vector<Expr> phi;
    for (int a = 0; a < b.n; ++a) phi.push_back(random_polynomial(base, 2, rng));
    const SectionExpr section(b.m, phi);
    const Assignment jet = jet_prolongation(section, b.n);
    std::vector<Expr> p;
    for (const Expr& e : momenta(sys)) p.push_back(substitute(e, jet));
    const DiffForm pulled = pullback(section_map(b, PiSection(b.m, phi, p)), hcf.theta);
    out.push_back(expr_check("(j1* phi)^* Theta_h = L(j1 phi)", pulled.coefficient(vol) - substitute(sys.lagrangian(), jet), opt));
  }
  return out;
}

std::vector<IdentityCheck> verify_hamiltonian(const HamiltonianSystem& h, const VerifyOptions& opt) {
  std::vector<IdentityCheck> out = verify_bundle(h.bundle(), opt);
  append_hamiltonian(out, h, opt);
  return out;
}

bool all_pass(const std::vector<IdentityCheck>& checks) {
  return std::none_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.verdict == Verdict::Fail; });
}

}  // namespace multisym
