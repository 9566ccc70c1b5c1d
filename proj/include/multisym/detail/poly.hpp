#pragma once

// Internal representation of Expr normal forms. Exposed so that other modules
// can walk terms (coefficient extraction, printing); not a stable API.

#include <vector>

#include "multisym/expr.hpp"

namespace multisym::detail {

struct Atom {
  enum class Kind : std::uint8_t { Symbol, Function, Reciprocal };
  Kind kind = Kind::Symbol;
  multisym::Symbol symbol;
  multisym::Function function = multisym::Function::Sin;
  Expr arg;  // function argument, or the (multi-term, monic) reciprocal base
};

int compare(const Atom& a, const Atom& b);

struct AtomLess {
  bool operator()(const Atom& a, const Atom& b) const { return compare(a, b) < 0; }
};

struct Factor {
  Atom atom;
  int exponent = 1;  // non-zero; Reciprocal atoms only carry positive exponents
};

/// Factors sorted by atom, one per atom.
using Monomial = std::vector<Factor>;

struct Term {
  Monomial monomial;
  Scalar coefficient;
};

/// Terms sorted by descending graded-lex monomial order, no zero coefficients.
struct Poly {
  std::vector<Term> terms;
};

/// Graded-lex comparison: >0 when a ranks ahead of b.
int compare_monomials(const Monomial& a, const Monomial& b);
int degree(const Monomial& m);

/// Builds a normalized Expr from arbitrary (unsorted, uncombined) terms.
Expr from_terms(std::vector<Term> terms);
Expr from_atom(const Atom& atom, int exponent = 1);
Expr from_monomial(const Monomial& m, const Scalar& coefficient);

}  // namespace multisym::detail
