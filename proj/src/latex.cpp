#include "multisym/latex.hpp"

#include <algorithm>
#include <cstdlib>

#include "multisym/detail/poly.hpp"

namespace multisym {

namespace {

std::string braced(int i) { return "{" + std::to_string(i) + "}"; }

std::string atom_latex(const detail::Atom& a) {
  switch (a.kind) {
    case detail::Atom::Kind::Symbol: return latex(a.symbol);
    case detail::Atom::Kind::Function:
      return "\\" + std::string(function_name(a.function)) + "\\left(" + latex(a.arg) + "\\right)";
    case detail::Atom::Kind::Reciprocal: return "\\left(" + latex(a.arg) + "\\right)";
  }
  return "";
}

// Monomial without its coefficient, split into numerator and denominator.
std::pair<std::string, std::string> monomial_latex(const detail::Monomial& m) {
  std::string num, den;
  for (const auto& f : m) {
    std::string base = atom_latex(f.atom);
    const int e = std::abs(f.exponent);
    if (e != 1 && f.atom.kind == detail::Atom::Kind::Symbol &&
        f.atom.symbol.role() != Role::ExtendedMomentum && f.atom.symbol.role() != Role::Auxiliary) {
      base = "\\left(" + base + "\\right)";
    }
    std::string& target = (f.atom.kind == detail::Atom::Kind::Reciprocal || f.exponent < 0) ? den : num;
    if (!target.empty()) target += " ";
    target += e == 1 ? base : base + "^{" + std::to_string(e) + "}";
  }
  return {num, den};
}

std::string join(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + " " + b;
}

std::string volume_latex(int m) { return m == 1 ? "dx^{0}" : "d^{" + std::to_string(m) + "}x"; }

}  // namespace

std::string latex(const Symbol& s) {
  switch (s.role()) {
    case Role::Base: return "x^" + braced(s.first());
    case Role::Field: return "y^" + braced(s.first());
    case Role::Velocity: return "v^" + braced(s.first()) + "_" + braced(s.second());
    case Role::Momentum: return "p^" + braced(s.second()) + "_" + braced(s.first());
    case Role::ExtendedMomentum: return "p";
    case Role::GeneralizedMomentum: return "p^" + braced(s.second()) + "_" + braced(s.first());
    case Role::Auxiliary: return "\\mathrm{" + s.name() + "}";
  }
  return s.name();
}

std::string latex(const Expr& e) {
  if (e.is_zero()) return "0";
  std::string out;
  for (const auto& t : e.poly().terms) {
    const bool negative = t.coefficient.sign() < 0;
    const Scalar mag = negative ? -t.coefficient : t.coefficient;
    auto [num, den] = monomial_latex(t.monomial);
    std::string top, bottom;
    if (mag.is_exact()) {
      const Rational& q = mag.exact();
      top = (q.get_num() == 1 && !num.empty()) ? num : join(q.get_num().get_str(), num);
      bottom = join(q.get_den() == 1 ? "" : q.get_den().get_str(), den);
    } else {
      top = (mag.is_one() && !num.empty()) ? num : join(mag.str(), num);
      bottom = den;
    }
    const std::string body = bottom.empty() ? top : "\\frac{" + top + "}{" + bottom + "}";
    if (out.empty()) {
      out = negative ? "-" + body : body;
    } else {
      out += negative ? " - " : " + ";
      out += body;
    }
  }
  return out;
}

std::string latex(const DiffForm& f) {
  if (f.is_zero()) return "0";
  const Chart& c = f.chart();
  const int m = c.base_dim();
  std::string out;
  for (const auto& [t, coef] : f.terms()) {
    Expr k = coef;
    std::string basis;
    int base_count = 0;
    for (int i : t) base_count += i < m ? 1 : 0;
    if (t.empty()) {
      basis = "";
    } else if (base_count == m && static_cast<int>(t.size()) == m) {
      basis = volume_latex(m);
    } else if (base_count == m - 1 && m > 1) {
      // sorted tuple (x..., w...) with one base index nu missing
      int nu = 0;
      while (nu < m && std::find(t.begin(), t.end(), nu) != t.end()) ++nu;
      std::string rest;
      for (int i : t) {
        if (i < m) continue;
        if (!rest.empty()) rest += " \\wedge ";
        rest += "d" + latex(c.coordinate(i));
      }
      const int extra = static_cast<int>(t.size()) - (m - 1);
      // moving the non-base differentials to the front, then x^nu into place
      const int sign = (((m - 1) * extra) % 2 == 0 ? 1 : -1) * (nu % 2 == 0 ? 1 : -1);
      if (sign < 0) k = -k;
      basis = rest + " \\wedge d^{" + std::to_string(m - 1) + "}x_{" + std::to_string(nu) + "}";
    } else {
      for (std::size_t j = 0; j < t.size(); ++j) {
        if (j > 0) basis += " \\wedge ";
        basis += "d" + latex(c.coordinate(t[j]));
      }
    }
    std::string cs = latex(k);
    const bool negative = !cs.empty() && cs.front() == '-' && k.term_count() == 1;
    if (negative) cs = cs.substr(1);
    if (k.term_count() > 1) cs = "\\left(" + cs + "\\right)";
    std::string term = basis.empty() ? cs : (cs == "1" ? basis : cs + " \\, " + basis);
    if (out.empty()) {
      out = negative ? "-" + term : term;
    } else {
      out += negative ? " - " : " + ";
      out += term;
    }
  }
  return out;
}

}  // namespace multisym
