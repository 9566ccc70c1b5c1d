#include "multisym/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include "multisym/detail/poly.hpp"
#include "multisym/error.hpp"

namespace multisym {

using detail::Atom;
using detail::Factor;
using detail::Monomial;
using detail::Poly;
using detail::Term;

// ---------------------------------------------------------------------------
// Symbol

Symbol Symbol::auxiliary(std::string name) {
  Symbol s;
  s.role_ = Role::Auxiliary;
  s.aux_ = std::move(name);
  return s;
}

std::string Symbol::name() const {
  auto idx = [](int i) { return std::to_string(i); };
  switch (role_) {
    case Role::Base: return "x_" + idx(first_);
    case Role::Field: return "y_" + idx(first_);
    case Role::Velocity: return "v_" + idx(first_) + "_" + idx(second_);
    case Role::Momentum: return "p_" + idx(first_) + "_" + idx(second_);
    case Role::ExtendedMomentum: return "pe";
    case Role::GeneralizedMomentum: return "q_" + idx(first_) + "_" + idx(second_);
    case Role::Auxiliary: return aux_;
  }
  return aux_;
}

std::string_view function_name(Function f) {
  switch (f) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sinh: return "sinh";
    case Function::Cosh: return "cosh";
  }
  return "?";
}

std::optional<Function> function_from_name(std::string_view name) {
  for (auto f : {Function::Sin, Function::Cos, Function::Exp, Function::Log, Function::Sinh,
                 Function::Cosh}) {
    if (function_name(f) == name) return f;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scalar

double Scalar::to_double() const {
  return is_exact() ? exact().get_d() : std::get<1>(value_);
}

bool Scalar::is_zero() const {
  return is_exact() ? sgn(exact()) == 0 : std::get<1>(value_) == 0.0;
}

bool Scalar::is_one() const { return is_exact() && exact() == 1; }

int Scalar::sign() const {
  if (is_exact()) return sgn(exact());
  const double d = std::get<1>(value_);
  return (d > 0) - (d < 0);
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) return Scalar(Rational(a.exact() + b.exact()));
  return Scalar(a.to_double() + b.to_double());
}

Scalar operator-(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) return Scalar(Rational(a.exact() - b.exact()));
  return Scalar(a.to_double() - b.to_double());
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) return Scalar(Rational(a.exact() * b.exact()));
  return Scalar(a.to_double() * b.to_double());
}

Scalar operator/(const Scalar& a, const Scalar& b) {
  if (b.is_zero()) throw DomainError("division by zero");
  if (a.is_exact() && b.is_exact()) return Scalar(Rational(a.exact() / b.exact()));
  return Scalar(a.to_double() / b.to_double());
}

Scalar Scalar::operator-() const {
  if (is_exact()) return Scalar(Rational(-exact()));
  return Scalar(-std::get<1>(value_));
}

Scalar Scalar::pow(int n) const {
  if (n < 0) return Scalar(1) / pow(-n);
  if (!is_exact()) return Scalar(std::pow(std::get<1>(value_), n));
  mpz_class num;
  mpz_class den;
  mpz_pow_ui(num.get_mpz_t(), exact().get_num_mpz_t(), static_cast<unsigned long>(n));
  mpz_pow_ui(den.get_mpz_t(), exact().get_den_mpz_t(), static_cast<unsigned long>(n));
  Rational r(num, den);
  r.canonicalize();
  return Scalar(r);
}

int Scalar::compare(const Scalar& other) const {
  if (is_exact() != other.is_exact()) return is_exact() ? -1 : 1;
  if (is_exact()) return cmp(exact(), other.exact());
  const double a = std::get<1>(value_);
  const double b = std::get<1>(other.value_);
  return (a > b) - (a < b);
}

std::string Scalar::str() const {
  if (is_exact()) return exact().get_str();
  const double d = std::get<1>(value_);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

// ---------------------------------------------------------------------------
// Normal-form plumbing

namespace detail {

int compare(const Atom& a, const Atom& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  switch (a.kind) {
    case Atom::Kind::Symbol:
      if (a.symbol == b.symbol) return 0;
      return a.symbol < b.symbol ? -1 : 1;
    case Atom::Kind::Function:
      if (a.function != b.function) return a.function < b.function ? -1 : 1;
      return a.arg.compare(b.arg);
    case Atom::Kind::Reciprocal:
      return a.arg.compare(b.arg);
  }
  return 0;
}

int degree(const Monomial& m) {
  int d = 0;
  for (const auto& f : m) d += f.exponent;
  return d;
}

int compare_monomials(const Monomial& a, const Monomial& b) {
  const int da = degree(a);
  const int db = degree(b);
  if (da != db) return da > db ? 1 : -1;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const int c = compare(a[i].atom, b[j].atom);
    if (c == 0) {
      if (a[i].exponent != b[j].exponent) return a[i].exponent > b[j].exponent ? 1 : -1;
      ++i;
      ++j;
    } else if (c < 0) {
      return a[i].exponent > 0 ? 1 : -1;
    } else {
      return b[j].exponent > 0 ? -1 : 1;
    }
  }
  if (i < a.size()) return a[i].exponent > 0 ? 1 : -1;
  if (j < b.size()) return b[j].exponent > 0 ? -1 : 1;
  return 0;
}

namespace {

Monomial multiply_monomials(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const int c = compare(a[i].atom, b[j].atom);
    if (c == 0) {
      const int e = a[i].exponent + b[j].exponent;
      if (e != 0) out.push_back({a[i].atom, e});
      ++i;
      ++j;
    } else if (c < 0) {
      out.push_back(a[i++]);
    } else {
      out.push_back(b[j++]);
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j) out.push_back(b[j]);
  return out;
}

std::shared_ptr<const Poly> zero_poly() {
  static const auto zero = std::make_shared<const Poly>();
  return zero;
}

}  // namespace

Expr from_terms(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    return compare_monomials(a.monomial, b.monomial) > 0;
  });
  auto poly = std::make_shared<Poly>();
  poly->terms.reserve(terms.size());
  for (auto& t : terms) {
    if (!poly->terms.empty() &&
        compare_monomials(poly->terms.back().monomial, t.monomial) == 0) {
      poly->terms.back().coefficient = poly->terms.back().coefficient + t.coefficient;
      if (poly->terms.back().coefficient.is_zero()) poly->terms.pop_back();
      continue;
    }
    if (t.coefficient.is_zero()) continue;
    poly->terms.push_back(std::move(t));
  }
  return Expr(std::shared_ptr<const Poly>(std::move(poly)));
}

Expr from_monomial(const Monomial& m, const Scalar& coefficient) {
  if (coefficient.is_zero()) return Expr();
  auto poly = std::make_shared<Poly>();
  poly->terms.push_back({m, coefficient});
  return Expr(std::shared_ptr<const Poly>(std::move(poly)));
}

Expr from_atom(const Atom& atom, int exponent) {
  if (exponent == 0) return Expr(1);
  if (atom.kind == Atom::Kind::Reciprocal && exponent < 0) return atom.arg.pow(-exponent);
  return from_monomial(Monomial{Factor{atom, exponent}}, Scalar(1));
}

}  // namespace detail

namespace {

Expr reciprocal(const Expr& e) {
  const auto& terms = e.poly().terms;
  if (terms.empty()) throw DomainError("division by zero");
  if (terms.size() == 1) {
    const Term& t = terms.front();
    Expr out = detail::from_monomial({}, Scalar(1) / t.coefficient);
    Monomial plain;
    for (const auto& f : t.monomial) {
      if (f.atom.kind == Atom::Kind::Reciprocal) {
        out = out * f.atom.arg.pow(f.exponent);
      } else {
        plain.push_back({f.atom, -f.exponent});
      }
    }
    return out * detail::from_monomial(plain, Scalar(1));
  }
  const Scalar lead = terms.front().coefficient;
  Atom atom;
  atom.kind = Atom::Kind::Reciprocal;
  atom.arg = e * detail::from_monomial({}, Scalar(1) / lead);
  return detail::from_monomial({}, Scalar(1) / lead) * detail::from_atom(atom, 1);
}

double apply_numeric(Function f, double x) {
  switch (f) {
    case Function::Sin: return std::sin(x);
    case Function::Cos: return std::cos(x);
    case Function::Exp: return std::exp(x);
    case Function::Log:
      if (!(x > 0.0)) throw DomainError("log of non-positive value " + std::to_string(x));
      return std::log(x);
    case Function::Sinh: return std::sinh(x);
    case Function::Cosh: return std::cosh(x);
  }
  return 0.0;
}

double int_pow(double base, int e) {
  if (e < 0) {
    if (base == 0.0) throw DomainError("division by zero");
    return 1.0 / int_pow(base, -e);
  }
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

template <class Visitor>
bool any_symbol(const Expr& e, const Visitor& visit) {
  for (const auto& t : e.poly().terms) {
    for (const auto& f : t.monomial) {
      if (f.atom.kind == Atom::Kind::Symbol) {
        if (visit(f.atom.symbol)) return true;
      } else if (any_symbol(f.atom.arg, visit)) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() : poly_(detail::zero_poly()) {}

Expr::Expr(const Rational& r) : Expr(detail::from_monomial({}, Scalar(r))) {}
Expr::Expr(long n) : Expr(Rational(n)) {}
Expr::Expr(int n) : Expr(Rational(n)) {}

Expr Expr::rational(long num, long den) {
  if (den == 0) throw DomainError("division by zero");
  Rational r(num, den);
  r.canonicalize();
  return Expr(r);
}

Expr Expr::number(double d) { return detail::from_monomial({}, Scalar(d)); }

Expr Expr::symbol(const Symbol& s) {
  Atom a;
  a.kind = Atom::Kind::Symbol;
  a.symbol = s;
  return detail::from_atom(a, 1);
}

Expr Expr::apply(Function f, const Expr& arg) {
  if (arg.is_constant()) {
    if (auto r = arg.rational_value()) {
      if (sgn(*r) == 0) {
        switch (f) {
          case Function::Sin:
          case Function::Sinh: return Expr(0);
          case Function::Cos:
          case Function::Exp:
          case Function::Cosh: return Expr(1);
          case Function::Log: throw DomainError("log of non-positive value 0");
        }
      }
      if (f == Function::Log) {
        if (sgn(*r) < 0) throw DomainError("log of non-positive value " + r->get_str());
        if (*r == 1) return Expr(0);
      }
    } else {
      return Expr::number(apply_numeric(f, *arg.constant_value()));
    }
  }
  Atom a;
  a.kind = Atom::Kind::Function;
  a.function = f;
  a.arg = arg;
  return detail::from_atom(a, 1);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  std::vector<Term> terms;
  terms.reserve(a.term_count() + b.term_count());
  terms.insert(terms.end(), a.poly().terms.begin(), a.poly().terms.end());
  terms.insert(terms.end(), b.poly().terms.begin(), b.poly().terms.end());
  return detail::from_terms(std::move(terms));
}

Expr Expr::operator-() const {
  std::vector<Term> terms = poly().terms;
  for (auto& t : terms) t.coefficient = -t.coefficient;
  return detail::from_terms(std::move(terms));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  std::vector<Term> terms;
  terms.reserve(a.term_count() * b.term_count());
  for (const auto& ta : a.poly().terms) {
    for (const auto& tb : b.poly().terms) {
      terms.push_back({detail::multiply_monomials(ta.monomial, tb.monomial),
                       ta.coefficient * tb.coefficient});
    }
  }
  return detail::from_terms(std::move(terms));
}

Expr operator/(const Expr& a, const Expr& b) { return a * reciprocal(b); }

Expr Expr::pow(int n) const {
  if (n == 0) return Expr(1);
  if (n < 0) return reciprocal(*this).pow(-n);
  const auto& terms = poly().terms;
  if (terms.empty()) return Expr();
  if (terms.size() == 1) {
    Monomial m = terms.front().monomial;
    for (auto& f : m) f.exponent *= n;
    return detail::from_monomial(m, terms.front().coefficient.pow(n));
  }
  Expr result(1);
  Expr base = *this;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

bool Expr::is_zero() const { return poly_->terms.empty(); }

bool Expr::is_constant() const {
  return poly_->terms.empty() ||
         (poly_->terms.size() == 1 && poly_->terms.front().monomial.empty());
}

std::optional<Rational> Expr::rational_value() const {
  if (poly_->terms.empty()) return Rational(0);
  if (!is_constant() || !poly_->terms.front().coefficient.is_exact()) return std::nullopt;
  return poly_->terms.front().coefficient.exact();
}

std::optional<double> Expr::constant_value() const {
  if (!is_constant()) return std::nullopt;
  if (poly_->terms.empty()) return 0.0;
  return poly_->terms.front().coefficient.to_double();
}

bool Expr::is_polynomial() const {
  for (const auto& t : poly_->terms) {
    if (!t.coefficient.is_exact()) return false;
    for (const auto& f : t.monomial) {
      if (f.atom.kind != Atom::Kind::Symbol || f.exponent < 0) return false;
    }
  }
  return true;
}

std::size_t Expr::term_count() const { return poly_->terms.size(); }

std::set<Symbol> Expr::symbols() const {
  std::set<Symbol> out;
  any_symbol(*this, [&out](const Symbol& s) {
    out.insert(s);
    return false;
  });
  return out;
}

bool Expr::depends_on(const Symbol& s) const {
  return any_symbol(*this, [&s](const Symbol& t) { return t == s; });
}

bool Expr::depends_on_role(Role r) const {
  return any_symbol(*this, [r](const Symbol& t) { return t.role() == r; });
}

int Expr::compare(const Expr& other) const {
  if (poly_ == other.poly_) return 0;
  const auto& a = poly_->terms;
  const auto& b = other.poly_->terms;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = detail::compare_monomials(a[i].monomial, b[i].monomial); c != 0) return c;
    if (int c = a[i].coefficient.compare(b[i].coefficient); c != 0) return c;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

namespace {

std::string factor_str(const Factor& f) {
  std::string s;
  switch (f.atom.kind) {
    case Atom::Kind::Symbol: s = f.atom.symbol.name(); break;
    case Atom::Kind::Function:
      s = std::string(function_name(f.atom.function)) + "(" + f.atom.arg.str() + ")";
      break;
    case Atom::Kind::Reciprocal: s = "(" + f.atom.arg.str() + ")"; break;
  }
  if (f.atom.kind == Atom::Kind::Reciprocal) return s + "^-" + std::to_string(f.exponent);
  if (f.exponent != 1) s += "^" + std::to_string(f.exponent);
  return s;
}

std::string term_str(const Term& t) {
  std::string mono;
  for (const auto& f : t.monomial) {
    if (!mono.empty()) mono += "*";
    mono += factor_str(f);
  }
  if (mono.empty()) return t.coefficient.str();
  if (t.coefficient.is_one()) return mono;
  if (t.coefficient.is_exact() && t.coefficient.exact() == -1) return "-" + mono;
  return t.coefficient.str() + "*" + mono;
}

}  // namespace

std::string Expr::str() const {
  if (is_zero()) return "0";
  std::string out;
  for (const auto& t : poly_->terms) {
    std::string s = term_str(t);
    if (out.empty()) {
      out = s;
    } else if (s.front() == '-') {
      out += " - " + s.substr(1);
    } else {
      out += " + " + s;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calculus and substitution

namespace {

Expr differentiate_atom(const Atom& a, const Symbol& s) {
  switch (a.kind) {
    case Atom::Kind::Symbol: return a.symbol == s ? Expr(1) : Expr();
    case Atom::Kind::Function: {
      Expr inner = differentiate(a.arg, s);
      if (inner.is_zero()) return Expr();
      Expr outer;
      switch (a.function) {
        case Function::Sin: outer = Expr::apply(Function::Cos, a.arg); break;
        case Function::Cos: outer = -Expr::apply(Function::Sin, a.arg); break;
        case Function::Exp: outer = Expr::apply(Function::Exp, a.arg); break;
        case Function::Log: outer = reciprocal(a.arg); break;
        case Function::Sinh: outer = Expr::apply(Function::Cosh, a.arg); break;
        case Function::Cosh: outer = Expr::apply(Function::Sinh, a.arg); break;
      }
      return outer * inner;
    }
    case Atom::Kind::Reciprocal: {
      Expr inner = differentiate(a.arg, s);
      if (inner.is_zero()) return Expr();
      return -(detail::from_atom(a, 2) * inner);
    }
  }
  return Expr();
}

}  // namespace

Expr differentiate(const Expr& e, const Symbol& s) {
  std::vector<Term> acc;
  std::map<Atom, Expr, detail::AtomLess> memo;
  for (const auto& t : e.poly().terms) {
    for (std::size_t i = 0; i < t.monomial.size(); ++i) {
      const Factor& f = t.monomial[i];
      if (f.atom.kind == Atom::Kind::Symbol && !(f.atom.symbol == s)) continue;
      auto it = memo.find(f.atom);
      if (it == memo.end()) it = memo.emplace(f.atom, differentiate_atom(f.atom, s)).first;
      const Expr& da = it->second;
      if (da.is_zero()) continue;
      Monomial rest = t.monomial;
      if (--rest[i].exponent == 0) rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      Expr piece = detail::from_monomial(rest, t.coefficient * Scalar(f.exponent)) * da;
      acc.insert(acc.end(), piece.poly().terms.begin(), piece.poly().terms.end());
    }
  }
  return detail::from_terms(std::move(acc));
}

namespace {

struct Substituter {
  const Assignment& assignment;
  std::map<Atom, std::optional<Expr>, detail::AtomLess> atoms;
  std::map<std::pair<Atom, int>, Expr, bool (*)(const std::pair<Atom, int>&,
                                                const std::pair<Atom, int>&)>
      powers{[](const std::pair<Atom, int>& a, const std::pair<Atom, int>& b) {
        if (int c = detail::compare(a.first, b.first); c != 0) return c < 0;
        return a.second < b.second;
      }};

  // nullopt when the atom is unchanged by the assignment.
  const std::optional<Expr>& image(const Atom& a) {
    auto it = atoms.find(a);
    if (it != atoms.end()) return it->second;
    std::optional<Expr> out;
    if (a.kind == Atom::Kind::Symbol) {
      if (auto hit = assignment.find(a.symbol); hit != assignment.end()) out = hit->second;
    } else {
      Expr arg = run(a.arg);
      if (!(arg == a.arg)) {
        out = a.kind == Atom::Kind::Function ? Expr::apply(a.function, arg) : reciprocal(arg);
      }
    }
    return atoms.emplace(a, std::move(out)).first->second;
  }

  const Expr& power(const Atom& a, const Expr& base, int e) {
    auto key = std::make_pair(a, e);
    auto it = powers.find(key);
    if (it == powers.end()) it = powers.emplace(key, base.pow(e)).first;
    return it->second;
  }

  Expr run(const Expr& e) {
    std::vector<Term> acc;
    for (const auto& t : e.poly().terms) {
      Monomial keep;
      std::vector<const Expr*> changed;
      for (const auto& f : t.monomial) {
        const auto& img = image(f.atom);
        if (img) {
          changed.push_back(&power(f.atom, *img, f.exponent));
        } else {
          keep.push_back(f);
        }
      }
      if (changed.empty()) {
        acc.push_back(t);
        continue;
      }
      Expr piece = detail::from_monomial(keep, t.coefficient);
      for (const Expr* c : changed) piece = piece * *c;
      acc.insert(acc.end(), piece.poly().terms.begin(), piece.poly().terms.end());
    }
    return detail::from_terms(std::move(acc));
  }
};

}  // namespace

Expr substitute(const Expr& e, const Assignment& assignment) {
  if (assignment.empty()) return e;
  Substituter sub{assignment, {}};
  return sub.run(e);
}

namespace {

double evaluate_atom(const Atom& a, const Point& point) {
  switch (a.kind) {
    case Atom::Kind::Symbol: {
      auto it = point.find(a.symbol);
      if (it == point.end()) throw InputError("unassigned symbol " + a.symbol.name());
      return it->second;
    }
    case Atom::Kind::Function: return apply_numeric(a.function, evaluate(a.arg, point));
    case Atom::Kind::Reciprocal: {
      const double b = evaluate(a.arg, point);
      if (b == 0.0) throw DomainError("division by zero");
      return 1.0 / b;
    }
  }
  return 0.0;
}

}  // namespace

double evaluate(const Expr& e, const Point& point) {
  double sum = 0.0;
  for (const auto& t : e.poly().terms) {
    double v = t.coefficient.to_double();
    for (const auto& f : t.monomial) v *= int_pow(evaluate_atom(f.atom, point), f.exponent);
    sum += v;
  }
  return sum;
}

ZeroTest is_zero(const Expr& e, int samples, std::uint64_t seed) {
  ZeroTest out;
  if (e.is_zero()) {
    out.verdict = ZeroVerdict::ProvenZero;
    return out;
  }
  bool symbol_atoms_only = true;
  for (const auto& t : e.poly().terms) {
    for (const auto& f : t.monomial) {
      if (f.atom.kind != Atom::Kind::Symbol) symbol_atoms_only = false;
    }
  }
  if (symbol_atoms_only) {
    // A nonzero Laurent polynomial is a nonzero function.
    out.verdict = ZeroVerdict::ProvenNonzero;
    return out;
  }
  const auto syms = e.symbols();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  int attempts = 0;
  while (out.samples < samples && attempts < 16 * samples) {
    ++attempts;
    Point p;
    for (const auto& s : syms) p[s] = dist(rng);
    double v = 0.0;
    try {
      v = evaluate(e, p);
    } catch (const DomainError&) {
      continue;
    }
    ++out.samples;
    out.max_abs = std::max(out.max_abs, std::abs(v));
  }
  out.verdict = out.max_abs > 1e-6 ? ZeroVerdict::ProvenNonzero : ZeroVerdict::Undecided;
  return out;
}

std::string_view verdict_name(ZeroVerdict v) {
  switch (v) {
    case ZeroVerdict::ProvenZero: return "proven-zero";
    case ZeroVerdict::ProvenNonzero: return "proven-nonzero";
    case ZeroVerdict::Undecided: return "undecided";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// CompiledExpr

struct CompiledExpr::Impl {
  struct AtomSlot {
    Atom::Kind kind = Atom::Kind::Symbol;
    int slot = -1;
    Function function = Function::Sin;
    std::shared_ptr<const Impl> arg;
  };
  struct CTerm {
    double coefficient = 0.0;
    std::vector<std::pair<int, int>> factors;  // (atom index, exponent)
  };
  std::vector<AtomSlot> atoms;
  std::vector<CTerm> terms;

  double eval(std::span<const double> values) const {
    constexpr std::size_t kStack = 32;
    double stack[kStack];
    std::vector<double> heap;
    double* vals = stack;
    if (atoms.size() > kStack) {
      heap.resize(atoms.size());
      vals = heap.data();
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto& a = atoms[i];
      switch (a.kind) {
        case Atom::Kind::Symbol: vals[i] = values[static_cast<std::size_t>(a.slot)]; break;
        case Atom::Kind::Function: vals[i] = apply_numeric(a.function, a.arg->eval(values)); break;
        case Atom::Kind::Reciprocal: {
          const double b = a.arg->eval(values);
          if (b == 0.0) throw DomainError("division by zero");
          vals[i] = 1.0 / b;
          break;
        }
      }
    }
    double sum = 0.0;
    for (const auto& t : terms) {
      double v = t.coefficient;
      for (const auto& [idx, e] : t.factors) {
        v *= e == 1 ? vals[idx] : int_pow(vals[idx], e);
      }
      sum += v;
    }
    return sum;
  }

  static std::shared_ptr<const Impl> build(const Expr& e, std::span<const Symbol> slots) {
    auto impl = std::make_shared<Impl>();
    std::map<Atom, int, detail::AtomLess> index;
    for (const auto& t : e.poly().terms) {
      CTerm ct;
      ct.coefficient = t.coefficient.to_double();
      for (const auto& f : t.monomial) {
        auto it = index.find(f.atom);
        if (it == index.end()) {
          AtomSlot slot;
          slot.kind = f.atom.kind;
          if (f.atom.kind == Atom::Kind::Symbol) {
            auto pos = std::find(slots.begin(), slots.end(), f.atom.symbol);
            if (pos == slots.end()) {
              throw InputError("symbol " + f.atom.symbol.name() + " has no evaluation slot");
            }
            slot.slot = static_cast<int>(pos - slots.begin());
          } else {
            slot.function = f.atom.function;
            slot.arg = build(f.atom.arg, slots);
          }
          impl->atoms.push_back(std::move(slot));
          it = index.emplace(f.atom, static_cast<int>(impl->atoms.size()) - 1).first;
        }
        ct.factors.emplace_back(it->second, f.exponent);
      }
      impl->terms.push_back(std::move(ct));
    }
    return impl;
  }
};

CompiledExpr::CompiledExpr(const Expr& e, std::span<const Symbol> slots)
    : impl_(Impl::build(e, slots)) {}

double CompiledExpr::operator()(std::span<const double> values) const {
  return impl_ ? impl_->eval(values) : 0.0;
}

}  // namespace multisym
