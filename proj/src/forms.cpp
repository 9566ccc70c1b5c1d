#include "multisym/forms.hpp"

#include <algorithm>

#include "multisym/error.hpp"

namespace multisym {

namespace {

// Sorts `t` in place; returns the permutation sign, or 0 on a repeated index.
int sort_with_sign(IndexTuple& t) {
  int sign = 1;
  for (std::size_t i = 1; i < t.size(); ++i) {
    for (std::size_t j = i; j > 0 && t[j - 1] >= t[j]; --j) {
      if (t[j - 1] == t[j]) return 0;
      std::swap(t[j - 1], t[j]);
      sign = -sign;
    }
  }
  return sign;
}

void require_same_chart(const Chart& a, const Chart& b, const char* op) {
  if (!(a == b)) {
    throw InputError(std::string(op) + ": chart mismatch (" + a.name() + " vs " + b.name() + ")");
  }
}

}  // namespace

DiffForm::DiffForm(Chart chart, int degree) : chart_(std::move(chart)), degree_(degree) {
  // Degrees above dim are allowed; such forms are always zero.
  if (degree < 0) throw InputError("negative form degree");
}

DiffForm DiffForm::scalar(Chart chart, Expr f) {
  DiffForm out(std::move(chart), 0);
  out.add({}, f);
  return out;
}

DiffForm DiffForm::differential(Chart chart, int i) {
  if (i < 0 || i >= chart.dim()) throw InputError("coordinate index out of range");
  DiffForm out(std::move(chart), 1);
  out.add({i}, Expr(1));
  return out;
}

DiffForm DiffForm::differential(const Chart& chart, const Symbol& s) {
  auto i = chart.index_of(s);
  if (!i) throw InputError(s.name() + " is not a coordinate of " + chart.name());
  return differential(chart, *i);
}

Expr DiffForm::coefficient(const IndexTuple& tuple) const {
  if (static_cast<int>(tuple.size()) != degree_) {
    throw InputError("index tuple length " + std::to_string(tuple.size()) +
                     " does not match degree " + std::to_string(degree_));
  }
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (tuple[i] < 0 || tuple[i] >= chart_.dim() || (i > 0 && tuple[i - 1] >= tuple[i])) {
      throw InputError("index tuple must be strictly increasing and in range");
    }
  }
  auto it = terms_.find(tuple);
  return it == terms_.end() ? Expr() : it->second;
}

void DiffForm::add(IndexTuple tuple, const Expr& c) {
  if (static_cast<int>(tuple.size()) != degree_) throw InputError("index tuple length mismatch");
  for (int i : tuple) {
    if (i < 0 || i >= chart_.dim()) throw InputError("coordinate index out of range");
  }
  if (c.is_zero()) return;
  const int sign = sort_with_sign(tuple);
  if (sign == 0) return;
  auto [it, inserted] = terms_.try_emplace(std::move(tuple), sign > 0 ? c : -c);
  if (!inserted) {
    it->second = sign > 0 ? it->second + c : it->second - c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

DiffForm& DiffForm::operator+=(const DiffForm& other) {
  require_same_chart(chart_, other.chart_, "add");
  if (degree_ != other.degree_) throw InputError("cannot add forms of different degree");
  for (const auto& [t, c] : other.terms_) add(t, c);
  return *this;
}

DiffForm& DiffForm::operator-=(const DiffForm& other) {
  require_same_chart(chart_, other.chart_, "subtract");
  if (degree_ != other.degree_) throw InputError("cannot subtract forms of different degree");
  for (const auto& [t, c] : other.terms_) add(t, -c);
  return *this;
}

DiffForm DiffForm::operator-() const {
  DiffForm out(chart_, degree_);
  for (const auto& [t, c] : terms_) out.terms_.emplace(t, -c);
  return out;
}

DiffForm operator*(const Expr& f, const DiffForm& a) {
  DiffForm out(a.chart_, a.degree_);
  for (const auto& [t, c] : a.terms_) out.add(t, f * c);
  return out;
}

bool operator==(const DiffForm& a, const DiffForm& b) {
  if (!(a.chart_ == b.chart_) || a.degree_ != b.degree_ || a.terms_.size() != b.terms_.size()) {
    return false;
  }
  return std::equal(a.terms_.begin(), a.terms_.end(), b.terms_.begin(),
                    [](const auto& x, const auto& y) { return x.first == y.first && x.second == y.second; });
}

std::string DiffForm::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& [t, c] : terms_) {
    if (!out.empty()) out += " + ";
    std::string cs = c.str();
    if (t.empty()) {
      out += cs;
      continue;
    }
    if (c.term_count() > 1) cs = "(" + cs + ")";
    out += cs;
    out += ' ';
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i > 0) out += '^';
      out += 'd';
      out += chart_.coordinate(t[i]).name();
    }
  }
  return out;
}

VectorFieldExpr::VectorFieldExpr(Chart c, std::vector<Expr> comps)
    : chart(std::move(c)), components(std::move(comps)) {
  if (static_cast<int>(components.size()) != chart.dim()) {
    throw InputError("vector field needs " + std::to_string(chart.dim()) + " components, got " +
                     std::to_string(components.size()));
  }
}

VectorFieldExpr VectorFieldExpr::coordinate(const Chart& chart, int i) {
  std::vector<Expr> comps(static_cast<std::size_t>(chart.dim()));
  comps.at(static_cast<std::size_t>(i)) = Expr(1);
  return {chart, std::move(comps)};
}

DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  DiffForm out(a.chart(), a.degree() + b.degree());
  for (const auto& [ta, ca] : a.terms()) {
    for (const auto& [tb, cb] : b.terms()) {
      IndexTuple t = ta;
      t.insert(t.end(), tb.begin(), tb.end());
      out.add(std::move(t), ca * cb);
    }
  }
  return out;
}

DiffForm exterior_derivative(const DiffForm& f) {
  const Chart& chart = f.chart();
  DiffForm out(chart, f.degree() + 1);
  for (const auto& [t, c] : f.terms()) {
    for (const Symbol& s : c.symbols()) {
      auto j = chart.index_of(s);
      if (!j) continue;  // parameters are constants
      IndexTuple nt;
      nt.reserve(t.size() + 1);
      nt.push_back(*j);
      nt.insert(nt.end(), t.begin(), t.end());
      out.add(std::move(nt), differentiate(c, s));
    }
  }
  return out;
}

DiffForm interior_product(const VectorFieldExpr& x, const DiffForm& f) {
  require_same_chart(x.chart, f.chart(), "interior product");
  if (f.degree() == 0) throw InputError("interior product of a 0-form");
  DiffForm out(f.chart(), f.degree() - 1);
  for (const auto& [t, c] : f.terms()) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      const Expr& xk = x.components[static_cast<std::size_t>(t[k])];
      if (xk.is_zero()) continue;
      IndexTuple nt;
      nt.reserve(t.size() - 1);
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i != k) nt.push_back(t[i]);
      }
      out.add(std::move(nt), (k % 2 == 0 ? xk : -xk) * c);
    }
  }
  return out;
}

DiffForm pullback(const CoordinateMap& map, const DiffForm& f) {
  require_same_chart(map.target(), f.chart(), "pullback");
  const Chart& src = map.source();
  const Assignment assignment = map.assignment();
  std::map<int, DiffForm> dcache;
  auto d_image = [&](int c) -> const DiffForm& {
    auto it = dcache.find(c);
    if (it != dcache.end()) return it->second;
    DiffForm df(src, 1);
    const Expr& img = map.image(c);
    for (const Symbol& s : img.symbols()) {
      if (auto j = src.index_of(s)) df.add({*j}, differentiate(img, s));
    }
    return dcache.emplace(c, std::move(df)).first->second;
  };
  DiffForm out(src, f.degree());
  for (const auto& [t, c] : f.terms()) {
    DiffForm acc = DiffForm::scalar(src, substitute(c, assignment));
    for (int i : t) {
      acc = wedge(acc, d_image(i));
      if (acc.is_zero()) break;
    }
    if (!acc.is_zero()) out += acc;
  }
  return out;
}

DiffForm volume_form(const Chart& chart) {
  const int m = chart.base_dim();
  DiffForm out(chart, m);
  IndexTuple t(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) t[static_cast<std::size_t>(i)] = i;
  out.add(std::move(t), Expr(1));
  return out;
}

DiffForm volume_form_minus(const Chart& chart, int nu) {
  if (nu < 0 || nu >= chart.base_dim()) throw InputError("base index out of range");
  return interior_product(VectorFieldExpr::coordinate(chart, nu), volume_form(chart));
}

ZeroTest is_zero(const DiffForm& f, int samples) {
  ZeroTest out{ZeroVerdict::ProvenZero, 0, 0.0};
  for (const auto& [t, c] : f.terms()) {
    const ZeroTest z = is_zero(c, samples);
    out.samples += z.samples;
    out.max_abs = std::max(out.max_abs, z.max_abs);
    if (z.verdict == ZeroVerdict::ProvenNonzero) {
      out.verdict = ZeroVerdict::ProvenNonzero;
    } else if (z.verdict == ZeroVerdict::Undecided && out.verdict == ZeroVerdict::ProvenZero) {
      out.verdict = ZeroVerdict::Undecided;
    }
  }
  return out;
}

}  // namespace multisym
