// Recursive-descent parser for the expression grammar:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' exponent)?
//   exponent:= ['+'|'-'] INT | '(' ['+'|'-'] INT ')'
//   primary := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
//
// Integer literals are exact; literals with '.' or an exponent are doubles.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "multisym/error.hpp"
#include "multisym/expr.hpp"

namespace multisym {

namespace {

std::optional<Symbol> indexed_symbol(std::string_view id) {
  auto read_indices = [](std::string_view rest, int want) -> std::optional<std::vector<int>> {
    std::vector<int> out;
    while (!rest.empty()) {
      if (rest.front() != '_') return std::nullopt;
      rest.remove_prefix(1);
      std::size_t n = 0;
      while (n < rest.size() && std::isdigit(static_cast<unsigned char>(rest[n]))) ++n;
      if (n == 0) return std::nullopt;
      int v = 0;
      auto res = std::from_chars(rest.data(), rest.data() + n, v);
      if (res.ec != std::errc()) return std::nullopt;
      out.push_back(v);
      rest.remove_prefix(n);
    }
    if (static_cast<int>(out.size()) != want) return std::nullopt;
    return out;
  };
  if (id == "pe") return Symbol::extended();
  if (id.size() < 3) return std::nullopt;
  const char head = id.front();
  const std::string_view rest = id.substr(1);
  switch (head) {
    case 'x':
      if (auto ix = read_indices(rest, 1)) return Symbol::base((*ix)[0]);
      break;
    case 'y':
      if (auto ix = read_indices(rest, 1)) return Symbol::field((*ix)[0]);
      break;
    case 'v':
      if (auto ix = read_indices(rest, 2)) return Symbol::velocity((*ix)[0], (*ix)[1]);
      break;
    case 'p':
      if (auto ix = read_indices(rest, 2)) return Symbol::momentum((*ix)[0], (*ix)[1]);
      break;
    case 'q':
      if (auto ix = read_indices(rest, 2)) return Symbol::generalized((*ix)[0], (*ix)[1]);
      break;
    default: break;
  }
  return std::nullopt;
}

class Parser {
 public:
  Parser(std::string_view text, std::optional<std::span<const Symbol>> allowed)
      : text_(text), allowed_(allowed) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Expr d = unary();
        if (d.is_zero()) throw ParseError("division by zero", at);
        e = e / d;
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    const bool paren = accept('(');
    int sign = 1;
    if (accept('-')) {
      sign = -1;
    } else {
      accept('+');
    }
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be an integer");
    int n = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, n);
    if (res.ec != std::errc()) fail("exponent out of range");
    if (paren) expect(')');
    if (base.is_zero() && sign < 0) throw ParseError("division by zero", start);
    return base.pow(sign * n);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    bool is_float = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      is_float = true;
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        is_float = true;
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    const std::string lit(text_.substr(start, pos_ - start));
    if (lit == ".") throw ParseError("malformed number", start);
    if (is_float) return Expr::number(std::strtod(lit.c_str(), nullptr));
    return Expr(Rational(mpz_class(lit)));
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view id = text_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      auto f = function_from_name(id);
      if (!f) throw ParseError("unknown function '" + std::string(id) + "'", start);
      ++pos_;
      Expr arg = expr();
      expect(')');
      try {
        return Expr::apply(*f, arg);
      } catch (const DomainError& e) {
        throw ParseError(e.what(), start);
      }
    }
    if (function_from_name(id)) {
      throw ParseError("function '" + std::string(id) + "' needs an argument", start);
    }
    auto sym = indexed_symbol(id);
    if (!allowed_) {
      return Expr::symbol(sym ? *sym : Symbol::auxiliary(std::string(id)));
    }
    if (!sym) {
      // Auxiliary names may be whitelisted explicitly.
      Symbol aux = Symbol::auxiliary(std::string(id));
      if (std::find(allowed_->begin(), allowed_->end(), aux) != allowed_->end()) {
        return Expr::symbol(aux);
      }
      throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }
    if (std::find(allowed_->begin(), allowed_->end(), *sym) == allowed_->end()) {
      throw ParseError("index out of range or coordinate not on this chart: '" +
                           std::string(id) + "'",
                       start);
    }
    return Expr::symbol(*sym);
  }

  std::string_view text_;
  std::optional<std::span<const Symbol>> allowed_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text, std::nullopt).run(); }

Expr parse(std::string_view text, std::span<const Symbol> allowed) {
  return Parser(text, allowed).run();
}

}  // namespace multisym
