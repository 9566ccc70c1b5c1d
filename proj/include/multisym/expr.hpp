#pragma once

// Symbolic scalar expressions over named chart coordinates.
//
// Every Expr is held in a canonical expanded form: a sum of terms, each term a
// coefficient times a monomial over "atoms" (symbols, elementary-function
// applications, reciprocals of non-monomial sums). Monomials are kept in
// graded-lexicographic order and like terms are collected, so two polynomial
// expressions are equal iff their normal forms are identical.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <gmpxx.h>

namespace multisym {

using Rational = mpq_class;

enum class Role : std::uint8_t {
  Base,                 // x^nu
  Field,                // y^A
  Velocity,             // v^A_nu
  Momentum,             // p^nu_A
  ExtendedMomentum,     // p (the extra scalar on the extended bundle)
  GeneralizedMomentum,  // p^nu_eta
  Auxiliary,            // free names used by tests and user expressions
};

/// A chart coordinate identified by role and indices.
///
/// Index layout: Base(nu), Field(A), Velocity(A, nu), Momentum(A, nu) meaning
/// p^nu_A, GeneralizedMomentum(eta, nu) meaning p^nu_eta. Names follow the
/// expression grammar: x_0, y_1, v_1_0, p_1_0, pe, q_0_1.
class Symbol {
 public:
  Symbol() = default;

  static Symbol base(int nu) { return {Role::Base, nu, -1}; }
  static Symbol field(int a) { return {Role::Field, a, -1}; }
  static Symbol velocity(int a, int nu) { return {Role::Velocity, a, nu}; }
  static Symbol momentum(int a, int nu) { return {Role::Momentum, a, nu}; }
  static Symbol extended() { return {Role::ExtendedMomentum, -1, -1}; }
  static Symbol generalized(int eta, int nu) { return {Role::GeneralizedMomentum, eta, nu}; }
  static Symbol auxiliary(std::string name);

  [[nodiscard]] Role role() const noexcept { return role_; }
  [[nodiscard]] int first() const noexcept { return first_; }
  [[nodiscard]] int second() const noexcept { return second_; }
  [[nodiscard]] std::string name() const;

  friend auto operator<=>(const Symbol&, const Symbol&) = default;
  friend bool operator==(const Symbol&, const Symbol&) = default;

 private:
  Symbol(Role role, int first, int second) : role_(role), first_(first), second_(second) {}

  Role role_ = Role::Auxiliary;
  int first_ = -1;
  int second_ = -1;
  std::string aux_;
};

enum class Function : std::uint8_t { Sin, Cos, Exp, Log, Sinh, Cosh };

[[nodiscard]] std::string_view function_name(Function f);
[[nodiscard]] std::optional<Function> function_from_name(std::string_view name);

/// Coefficient: exact rational, or an IEEE double once a float has entered.
class Scalar {
 public:
  Scalar() : value_(Rational(0)) {}
  Scalar(Rational r) : value_(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  Scalar(double d) : value_(d) {}                // NOLINT(google-explicit-constructor)
  Scalar(long n) : value_(Rational(n)) {}        // NOLINT(google-explicit-constructor)
  Scalar(int n) : value_(Rational(n)) {}         // NOLINT(google-explicit-constructor)

  [[nodiscard]] bool is_exact() const noexcept { return value_.index() == 0; }
  [[nodiscard]] const Rational& exact() const { return std::get<0>(value_); }
  [[nodiscard]] double to_double() const;
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] bool is_one() const;
  [[nodiscard]] int sign() const;

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend Scalar operator/(const Scalar& a, const Scalar& b);
  Scalar operator-() const;
  [[nodiscard]] Scalar pow(int n) const;

  /// Total order: exact values before floats, then by value.
  [[nodiscard]] int compare(const Scalar& other) const;
  friend bool operator==(const Scalar& a, const Scalar& b) { return a.compare(b) == 0; }

  /// Parseable text: "3", "-1/4", "0.5", "1e-07".
  [[nodiscard]] std::string str() const;

 private:
  std::variant<Rational, double> value_;
};

namespace detail {
struct Poly;
}

class Expr {
 public:
  Expr();  // zero
  Expr(const Rational& r);  // NOLINT(google-explicit-constructor)
  Expr(long n);             // NOLINT(google-explicit-constructor)
  Expr(int n);              // NOLINT(google-explicit-constructor)

  static Expr rational(long num, long den);
  static Expr number(double d);
  static Expr symbol(const Symbol& s);
  static Expr apply(Function f, const Expr& arg);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr operator-() const;
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }
  [[nodiscard]] Expr pow(int n) const;

  /// Structural zero of the normal form.
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] bool is_constant() const;
  [[nodiscard]] std::optional<Rational> rational_value() const;
  [[nodiscard]] std::optional<double> constant_value() const;
  /// Rational coefficients, symbol atoms only, non-negative exponents.
  [[nodiscard]] bool is_polynomial() const;
  [[nodiscard]] std::size_t term_count() const;
  /// All symbols, including those inside function arguments and reciprocals.
  [[nodiscard]] std::set<Symbol> symbols() const;
  [[nodiscard]] bool depends_on(const Symbol& s) const;
  [[nodiscard]] bool depends_on_role(Role r) const;

  [[nodiscard]] std::string str() const;

  [[nodiscard]] int compare(const Expr& other) const;
  friend bool operator==(const Expr& a, const Expr& b) { return a.compare(b) == 0; }
  friend bool operator<(const Expr& a, const Expr& b) { return a.compare(b) < 0; }

  [[nodiscard]] const detail::Poly& poly() const { return *poly_; }
  explicit Expr(std::shared_ptr<const detail::Poly> p) : poly_(std::move(p)) {}

 private:
  std::shared_ptr<const detail::Poly> poly_;
};

using Assignment = std::map<Symbol, Expr>;
using Point = std::map<Symbol, double>;

/// Exact partial derivative, all other symbols held independent.
[[nodiscard]] Expr differentiate(const Expr& e, const Symbol& s);
/// Simultaneous substitution; unassigned symbols pass through.
[[nodiscard]] Expr substitute(const Expr& e, const Assignment& assignment);
/// Throws InputError for an unassigned symbol, DomainError outside a domain.
[[nodiscard]] double evaluate(const Expr& e, const Point& point);

enum class ZeroVerdict { ProvenZero, ProvenNonzero, Undecided };

struct ZeroTest {
  ZeroVerdict verdict = ZeroVerdict::Undecided;
  int samples = 0;        // number of evaluation points used (0 when decided exactly)
  double max_abs = 0.0;   // largest |value| over the samples
};

/// proven-zero iff the normal form vanishes; nonzero polynomials are proven
/// nonzero; anything else is sampled on [-2, 2]^dim and never reported as proof.
[[nodiscard]] ZeroTest is_zero(const Expr& e, int samples = 64, std::uint64_t seed = 0x5eed);

[[nodiscard]] std::string_view verdict_name(ZeroVerdict v);

/// Parse with free identifiers: indexed names map to their roles, anything
/// else becomes an auxiliary symbol.
[[nodiscard]] Expr parse(std::string_view text);
/// Parse, accepting only the listed symbols.
[[nodiscard]] Expr parse(std::string_view text, std::span<const Symbol> allowed);

/// Fast numeric evaluation with symbols bound to fixed slots.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  /// Throws InputError when `e` has a symbol outside `slots`.
  CompiledExpr(const Expr& e, std::span<const Symbol> slots);

  [[nodiscard]] double operator()(std::span<const double> values) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

}  // namespace multisym
