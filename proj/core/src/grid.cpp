#include "carnot/grid.hpp"

#include "carnot/error.hpp"
#include "carnot/format.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace carnot {

namespace {

std::string describe_point(const GroupPoint& p) {
  std::string s = "(";
  for (int i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += format_double(p[i]);
  }
  return s + ")";
}

}  // namespace

BoxDomain::BoxDomain(GroupPtr group, Coords lower, Coords upper)
    : group_(std::move(group)), lower_(std::move(lower)), upper_(std::move(upper)) {
  if (!group_) throw InvalidArgumentError("box domain needs a group");
  if (lower_.size() != group_->dim() || upper_.size() != group_->dim()) {
    throw InvalidArgumentError("box bounds must have the group dimension " +
                               std::to_string(group_->dim()));
  }
  for (int i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
      throw InvalidArgumentError("box bounds need lower < upper on axis " + std::to_string(i));
    }
  }
}

bool BoxDomain::contains(const GroupPoint& p) const {
  if (p.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (!contains_coordinate(i, p[i])) return false;
  }
  return true;
}

bool BoxDomain::contains(const BoxDomain& inner) const {
  if (inner.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (inner.lower_[i] < lower_[i] || inner.upper_[i] > upper_[i]) return false;
  }
  return true;
}

BoxDomain symmetric_box(GroupPtr group, double half_width) {
  const int n = group->dim();
  return BoxDomain(std::move(group), Coords::Constant(n, -half_width),
                   Coords::Constant(n, half_width));
}

Grid::Grid(BoxDomain domain, std::vector<int> resolution)
    : domain_(std::move(domain)), resolution_(std::move(resolution)) {
  if (static_cast<int>(resolution_.size()) != domain_.dim()) {
    throw InvalidArgumentError("resolution needs one entry per axis (" +
                               std::to_string(domain_.dim()) + ")");
  }
  size_ = 1;
  for (int r : resolution_) {
    if (r < 2) throw InvalidArgumentError("resolution must be >= 2 per axis");
    size_ *= static_cast<std::size_t>(r);
  }
  spacing_.resize(resolution_.size());
  stride_.resize(resolution_.size());
  std::size_t stride = 1;
  for (int a = dim() - 1; a >= 0; --a) {
    const auto ua = static_cast<std::size_t>(a);
    spacing_[ua] = (domain_.upper()[a] - domain_.lower()[a]) / (resolution_[ua] - 1);
    stride_[ua] = stride;
    stride *= static_cast<std::size_t>(resolution_[ua]);
  }
}

Grid::Grid(BoxDomain domain, int resolution_per_axis)
    : Grid(domain, std::vector<int>(static_cast<std::size_t>(domain.dim()), resolution_per_axis)) {}

double Grid::min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }
double Grid::max_spacing() const { return *std::max_element(spacing_.begin(), spacing_.end()); }

std::size_t Grid::ravel(std::span<const int> index) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < index.size(); ++a) flat += static_cast<std::size_t>(index[a]) * stride_[a];
  return flat;
}

void Grid::unravel_into(std::size_t flat, std::span<int> index) const {
  for (std::size_t a = 0; a < stride_.size(); ++a) {
    index[a] = static_cast<int>(flat / stride_[a]);
    flat %= stride_[a];
  }
}

std::vector<int> Grid::unravel(std::size_t flat) const {
  std::vector<int> index(resolution_.size());
  unravel_into(flat, index);
  return index;
}

double Grid::coordinate(int axis, int i) const {
  const auto ua = static_cast<std::size_t>(axis);
  if (i == resolution_[ua] - 1) return domain_.upper()[axis];
  return domain_.lower()[axis] + i * spacing_[ua];
}

GroupPoint Grid::node(std::size_t flat) const {
  GroupPoint p{Coords(dim())};
  for (int a = 0; a < dim(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const int i = static_cast<int>(flat / stride_[ua]);
    flat %= stride_[ua];
    p[a] = coordinate(a, i);
  }
  return p;
}

bool Grid::is_boundary(std::size_t flat) const {
  for (std::size_t a = 0; a < stride_.size(); ++a) {
    const int i = static_cast<int>(flat / stride_[a]);
    flat %= stride_[a];
    if (i == 0 || i == resolution_[a] - 1) return true;
  }
  return false;
}

bool Grid::operator==(const Grid& other) const {
  return (domain_.group_ptr() == other.domain_.group_ptr() ||
          domain_.group().name() == other.domain_.group().name()) &&
         resolution_ == other.resolution_ &&
         domain_.lower() == other.domain_.lower() && domain_.upper() == other.domain_.upper();
}

GridField::GridField(Grid grid, std::vector<double> values, FieldMetadata metadata)
    : grid_(std::move(grid)), values_(std::move(values)), metadata_(std::move(metadata)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgumentError("field has " + std::to_string(values_.size()) +
                               " values but the lattice has " + std::to_string(grid_.size()) +
                               " nodes");
  }
  min_ = std::numeric_limits<double>::infinity();
  max_ = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v)) {
      throw NonFiniteError("non-finite field value at node " + std::to_string(i) + " " +
                           describe_point(grid_.node(i)));
    }
    sup_norm_ = std::max(sup_norm_, std::abs(v));
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
  }
}

namespace {

void locate(const Grid& grid, const GroupPoint& p, std::array<int, kMaxDim>& cell,
            std::array<double, kMaxDim>& theta) {
  for (int a = 0; a < grid.dim(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    grid.locate_axis(a, p[a], cell[ua], theta[ua]);
  }
}

// Calls visit(flat, weight) for every corner of the cell with nonzero weight,
// in increasing corner-mask order. Axes with theta == 0 only contribute their
// lower corner, and skipping their unit factors leaves every product exact.
template <class Visit>
void for_each_corner(const Grid& grid, const std::array<int, kMaxDim>& cell,
                     const std::array<double, kMaxDim>& theta, Visit&& visit) {
  const int n = grid.dim();
  std::size_t base = 0;
  unsigned live = 0;
  for (int a = 0; a < n; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    base += static_cast<std::size_t>(cell[ua]) * grid.stride(a);
    if (theta[ua] != 0.0) live |= 1u << a;
  }
  unsigned mask = 0;
  do {
    double w = 1.0;
    std::size_t flat = base;
    for (int a = 0; a < n && w != 0.0; ++a) {
      if (!((live >> a) & 1u)) continue;
      const auto ua = static_cast<std::size_t>(a);
      if ((mask >> a) & 1u) {
        w *= theta[ua];
        flat += grid.stride(a);
      } else {
        w *= 1.0 - theta[ua];
      }
    }
    if (w != 0.0) visit(flat, w);
    mask = (mask - live) & live;  // next subset of `live` in increasing order
  } while (mask != 0);
}

}  // namespace

double GridField::evaluate(const GroupPoint& p) const {
  if (!domain().contains(p)) {
    throw DomainError("point " + describe_point(p) + " lies outside the field's domain");
  }
  return evaluate_unchecked(p);
}

double GridField::evaluate_unchecked(const GroupPoint& p) const {
  std::array<int, kMaxDim> cell;
  std::array<double, kMaxDim> theta;
  locate(grid_, p, cell, theta);
  // Zero-weight corners are skipped so node evaluation reproduces the stored
  // value bit-for-bit.
  double result = 0.0;
  for_each_corner(grid_, cell, theta, [&](std::size_t flat, double w) { result += w * values_[flat]; });
  return result;
}

bool GridField::supported_by(const std::vector<std::uint8_t>& inside, const GroupPoint& p) const {
  if (!domain().contains(p)) return false;
  std::array<int, kMaxDim> cell;
  std::array<double, kMaxDim> theta;
  locate(grid_, p, cell, theta);
  bool ok = true;
  for_each_corner(grid_, cell, theta, [&](std::size_t flat, double) { ok = ok && inside[flat] != 0; });
  return ok;
}

GridField GridField::with_metadata(const std::string& key, const std::string& value) const {
  GridField copy = *this;
  copy.metadata_[key] = value;
  return copy;
}

GridField sample(const AnalyticSource& source, const Grid& grid) {
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GroupPoint p = grid.node(i);
    const double v = source.fn(p);
    if (!std::isfinite(v)) {
      throw NonFiniteError("source '" + source.name + "' is not finite at node " +
                           std::to_string(i) + " " + describe_point(p));
    }
    values[i] = v;
  }
  return GridField(grid, std::move(values), {{"source", source.name}});
}

Evaluable::Evaluable(GroupPtr group, std::function<double(const GroupPoint&)> fn,
                     std::optional<BoxDomain> domain, std::string name)
    : group_(std::move(group)), fn_(std::move(fn)), domain_(std::move(domain)), name_(std::move(name)) {
  if (!group_) throw InvalidArgumentError("evaluable needs a group");
}

Evaluable Evaluable::from_source(GroupPtr group, const AnalyticSource& source,
                                 std::optional<BoxDomain> domain) {
  return Evaluable(std::move(group), source.fn, std::move(domain), source.name);
}

Evaluable Evaluable::from_field(std::shared_ptr<const GridField> field) {
  auto name = field->metadata().count("source") ? field->metadata().at("source") : "field";
  BoxDomain domain = field->domain();
  GroupPtr group = domain.group_ptr();
  return Evaluable(
      std::move(group), [field](const GroupPoint& p) { return field->evaluate(p); },
      std::move(domain), std::move(name));
}

Evaluable Evaluable::from_field(const GridField& field) {
  return from_field(std::make_shared<const GridField>(field));
}

Evaluable Evaluable::restricted(std::function<bool(const GroupPoint&)> region, std::string name) const {
  Evaluable out = *this;
  if (region_) {
    out.region_ = [outer = region_, inner = std::move(region)](const GroupPoint& p) {
      return outer(p) && inner(p);
    };
  } else {
    out.region_ = std::move(region);
  }
  out.name_ = std::move(name);
  return out;
}

double Evaluable::operator()(const GroupPoint& p) const {
  if (!contains(p)) {
    throw DomainError("point " + describe_point(p) + " lies outside the domain of '" + name_ + "'");
  }
  return fn_(p);
}

std::size_t InnerDomainMask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

bool InnerDomainMask::subset_of(const InnerDomainMask& other) const {
  if (inside.size() != other.inside.size()) return false;
  for (std::size_t i = 0; i < inside.size(); ++i) {
    if (inside[i] && !other.inside[i]) return false;
  }
  return true;
}

InnerDomainMask InnerDomainMask::intersect(const InnerDomainMask& other) const {
  if (!(grid == other.grid)) throw InvalidArgumentError("masks live on different lattices");
  InnerDomainMask out = *this;
  for (std::size_t i = 0; i < inside.size(); ++i) out.inside[i] = inside[i] && other.inside[i];
  out.eps = std::max(eps, other.eps);
  return out;
}

BoundaryDistance::BoundaryDistance(const Grid& grid) : grid_(grid), distance_(grid.size(), 0.0) {
  const CarnotGroup& g = grid.group();
  std::vector<GroupPoint> boundary_inverses;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.is_boundary(i)) boundary_inverses.push_back(g.inverse(grid.node(i)));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.is_boundary(i)) continue;
    // d(x^{-1}, y^{-1}) = N(x * y^{-1})
    const GroupPoint x = grid.node(i);
    double best = std::numeric_limits<double>::infinity();
    for (const GroupPoint& yinv : boundary_inverses) {
      best = std::min(best, g.gauge_power(g.multiply(x, yinv)));
    }
    distance_[i] = best == 0.0 ? 0.0 : std::pow(best, 1.0 / g.gauge_exponent());
  }
}

InnerDomainMask BoundaryDistance::mask(double eps) const {
  if (!(eps >= 0.0)) throw InvalidArgumentError("inner-domain shrink must be >= 0");
  InnerDomainMask m{grid_, std::vector<std::uint8_t>(grid_.size(), 0), eps};
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    m.inside[i] = !grid_.is_boundary(i) && distance_[i] >= eps;
  }
  return m;
}

InnerDomainMask inner_domain(const Grid& grid, double eps) {
  if (!(eps >= 0.0)) throw InvalidArgumentError("inner-domain shrink must be >= 0");
  return BoundaryDistance(grid).mask(eps);
}

}  // namespace carnot
