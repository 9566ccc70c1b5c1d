#include "multisym/chart.hpp"

#include "multisym/error.hpp"

namespace multisym {

std::string_view chart_kind_name(ChartKind k) {
  switch (k) {
    case ChartKind::M: return "M";
    case ChartKind::E: return "E";
    case ChartKind::J1E: return "J1E";
    case ChartKind::J1Estar: return "J1Estar";
    case ChartKind::Pi: return "Pi";
    case ChartKind::MPi: return "MPi";
    case ChartKind::J1PiStar: return "J1PiStar";
    case ChartKind::Custom: return "Custom";
  }
  return "?";
}

int chart_dimension(ChartKind k, int m, int n) {
  switch (k) {
    case ChartKind::M: return m;
    case ChartKind::E: return m + n;
    case ChartKind::J1E: return m + n + m * n;
    case ChartKind::J1Estar: return m + n + m * m + m * n;
    case ChartKind::Pi: return m + n + m * n;
    case ChartKind::MPi: return m + n + 1 + m * n;
    case ChartKind::J1PiStar: return m + n + m * n;
    case ChartKind::Custom: break;
  }
  throw InputError("custom charts have no closed-form dimension");
}

namespace {

std::vector<Symbol> standard_coordinates(ChartKind kind, int m, int n) {
  std::vector<Symbol> out;
  for (int nu = 0; nu < m; ++nu) out.push_back(Symbol::base(nu));
  if (kind == ChartKind::M) return out;
  for (int a = 0; a < n; ++a) out.push_back(Symbol::field(a));
  auto push_jet = [&](auto make) {
    for (int nu = 0; nu < m; ++nu) {
      for (int a = 0; a < n; ++a) out.push_back(make(a, nu));
    }
  };
  switch (kind) {
    case ChartKind::J1E: push_jet(Symbol::velocity); break;
    case ChartKind::J1Estar:
      push_jet(Symbol::momentum);
      for (int eta = 0; eta < m; ++eta) {
        for (int nu = 0; nu < m; ++nu) out.push_back(Symbol::generalized(eta, nu));
      }
      break;
    case ChartKind::MPi:
      out.push_back(Symbol::extended());
      push_jet(Symbol::momentum);
      break;
    case ChartKind::Pi:
    case ChartKind::J1PiStar: push_jet(Symbol::momentum); break;
    default: break;
  }
  return out;
}

}  // namespace

Chart::Chart(ChartKind kind, int m, int n) {
  if (kind == ChartKind::Custom) throw InputError("use Chart::custom for custom charts");
  if (m < 1 || n < 1) {
    throw InputError("bundle dimensions must be positive (m=" + std::to_string(m) +
                     ", N=" + std::to_string(n) + ")");
  }
  auto d = std::make_shared<Data>();
  d->kind = kind;
  d->m = m;
  d->n = n;
  d->name = std::string(chart_kind_name(kind));
  d->coords = standard_coordinates(kind, m, n);
  for (std::size_t i = 0; i < d->coords.size(); ++i) d->index[d->coords[i]] = static_cast<int>(i);
  data_ = std::move(d);
}

Chart Chart::custom(std::string name, std::vector<Symbol> coordinates, int m) {
  auto d = std::make_shared<Data>();
  d->kind = ChartKind::Custom;
  d->m = m;
  d->name = std::move(name);
  d->coords = std::move(coordinates);
  for (std::size_t i = 0; i < d->coords.size(); ++i) {
    if (!d->index.emplace(d->coords[i], static_cast<int>(i)).second) {
      throw InputError("duplicate coordinate " + d->coords[i].name() + " in chart " + d->name);
    }
  }
  return Chart(std::shared_ptr<const Data>(std::move(d)));
}

std::optional<int> Chart::index_of(const Symbol& s) const {
  auto it = data_->index.find(s);
  if (it == data_->index.end()) return std::nullopt;
  return it->second;
}

bool operator==(const Chart& a, const Chart& b) {
  if (a.data_ == b.data_) return true;
  if (a.kind() != b.kind()) return false;
  if (a.kind() != ChartKind::Custom) {
    return a.base_dim() == b.base_dim() && a.fiber_dim() == b.fiber_dim();
  }
  return a.name() == b.name() && a.data_->coords == b.data_->coords;
}

Expr parse(std::string_view text, const Chart& chart) { return parse(text, chart.coordinates()); }

CoordinateMap::CoordinateMap(Chart source, Chart target, std::vector<Expr> images)
    : source_(std::move(source)), target_(std::move(target)), images_(std::move(images)) {
  if (static_cast<int>(images_.size()) != target_.dim()) {
    throw InputError("coordinate map to " + target_.name() + " needs " +
                     std::to_string(target_.dim()) + " images, got " +
                     std::to_string(images_.size()));
  }
}

CoordinateMap CoordinateMap::identity(const Chart& chart) {
  std::vector<Expr> images;
  for (const auto& s : chart.coordinates()) images.push_back(Expr::symbol(s));
  return {chart, chart, std::move(images)};
}

const Expr& CoordinateMap::image(const Symbol& target_coordinate) const {
  auto i = target_.index_of(target_coordinate);
  if (!i) throw InputError(target_coordinate.name() + " is not a coordinate of " + target_.name());
  return images_[static_cast<std::size_t>(*i)];
}

Assignment CoordinateMap::assignment() const {
  Assignment out;
  for (int i = 0; i < target_.dim(); ++i) out.emplace(target_.coordinate(i), images_[static_cast<std::size_t>(i)]);
  return out;
}

Expr CoordinateMap::pull(const Expr& f) const { return substitute(f, assignment()); }

CoordinateMap compose(const CoordinateMap& outer, const CoordinateMap& inner) {
  if (!(inner.target() == outer.source())) {
    throw InputError("cannot compose: " + inner.target().name() + " does not match " +
                     outer.source().name());
  }
  const Assignment a = inner.assignment();
  std::vector<Expr> images;
  images.reserve(outer.images().size());
  for (const auto& img : outer.images()) images.push_back(substitute(img, a));
  return {inner.source(), outer.target(), std::move(images)};
}

std::optional<std::string> first_difference(const CoordinateMap& a, const CoordinateMap& b) {
  if (!(a.source() == b.source()) || !(a.target() == b.target())) {
    return std::string("chart mismatch (") + a.source().name() + "->" + a.target().name() +
           " vs " + b.source().name() + "->" + b.target().name() + ")";
  }
  for (int i = 0; i < a.target().dim(); ++i) {
    if (!(a.image(i) == b.image(i))) return a.target().coordinate(i).name();
  }
  return std::nullopt;
}

BundleSpec BundleSpec::make(int m, int n) {
  if (m < 1 || n < 1) {
    throw InputError("bundle dimensions must be positive (m=" + std::to_string(m) +
                     ", N=" + std::to_string(n) + ")");
  }
  return BundleSpec{m, n};
}

}  // namespace multisym
