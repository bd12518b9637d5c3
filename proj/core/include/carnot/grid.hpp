#pragma once

#include "carnot/group.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

// Coordinate box [lower, upper] in exponential coordinates.
class BoxDomain {
 public:
  BoxDomain(GroupPtr group, Coords lower, Coords upper);

  const GroupPtr& group_ptr() const { return group_; }
  const CarnotGroup& group() const { return *group_; }
  const Coords& lower() const { return lower_; }
  const Coords& upper() const { return upper_; }
  int dim() const { return static_cast<int>(lower_.size()); }

  // Closed-box membership, with a relative slack of 1e-12 per axis to absorb
  // round-off in points produced by the group law.
  bool contains(const GroupPoint& p) const;
  // The same test for a single coordinate.
  bool contains_coordinate(int axis, double value) const {
    const double slack = 1e-12 * (upper_[axis] - lower_[axis]);
    return value >= lower_[axis] - slack && value <= upper_[axis] + slack;
  }
  // True if `inner` is a subset of this box.
  bool contains(const BoxDomain& inner) const;

 private:
  GroupPtr group_;
  Coords lower_;
  Coords upper_;
};

BoxDomain symmetric_box(GroupPtr group, double half_width);

/// Regular lattice on a box, row-major with the last axis fastest.
class Grid {
 public:
  Grid(BoxDomain domain, std::vector<int> resolution);
  Grid(BoxDomain domain, int resolution_per_axis);

  const BoxDomain& domain() const { return domain_; }
  const CarnotGroup& group() const { return domain_.group(); }
  const std::vector<int>& resolution() const { return resolution_; }
  int dim() const { return domain_.dim(); }
  std::size_t size() const { return size_; }
  double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
  // Flat-index step of one node along `axis`.
  std::size_t stride(int axis) const { return stride_[static_cast<std::size_t>(axis)]; }
  double min_spacing() const;
  double max_spacing() const;

  std::size_t ravel(std::span<const int> index) const;
  std::vector<int> unravel(std::size_t flat) const;
  void unravel_into(std::size_t flat, std::span<int> index) const;
  double coordinate(int axis, int i) const;
  // Interpolation cell along `axis` and the offset theta in [0, 1] within it.
  // Values within 1e-9 cells of a node snap to it; the last node is reached
  // with theta == 1 in the last cell.
  void locate_axis(int axis, double value, int& cell, double& theta) const {
    const auto ua = static_cast<std::size_t>(axis);
    double s = (value - domain_.lower()[axis]) / spacing_[ua];
    // s > -1 for points in the box, so truncation acts as floor; the snap only
    // fires when s is within 1e-9 of the rounded value.
    const double nearest = static_cast<double>(static_cast<long long>(s + 0.5));
    if (std::abs(s - nearest) < 1e-9) s = nearest;
    s = std::clamp(s, 0.0, static_cast<double>(resolution_[ua] - 1));
    cell = std::min(static_cast<int>(s), resolution_[ua] - 2);
    theta = s - cell;
  }
  GroupPoint node(std::size_t flat) const;
  bool is_boundary(std::size_t flat) const;

  bool operator==(const Grid& other) const;

 private:
  BoxDomain domain_;
  std::vector<int> resolution_;
  std::vector<double> spacing_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

// Ordered key/value provenance. Numbers are stored via format_double.
using FieldMetadata = std::map<std::string, std::string>;

/// Scalar field sampled on a Grid. Immutable after construction.
class GridField {
 public:
  GridField(Grid grid, std::vector<double> values, FieldMetadata metadata = {});

  const Grid& grid() const { return grid_; }
  const BoxDomain& domain() const { return grid_.domain(); }
  const CarnotGroup& group() const { return grid_.group(); }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t flat) const { return values_[flat]; }
  const FieldMetadata& metadata() const { return metadata_; }
  // R_0 = max |value|
  double sup_norm() const { return sup_norm_; }
  double min_value() const { return min_; }
  double max_value() const { return max_; }

  // Multilinear interpolation; exact at nodes. Throws DomainError outside the box.
  double evaluate(const GroupPoint& p) const;
  // evaluate() for p already known to satisfy domain().contains(p).
  double evaluate_unchecked(const GroupPoint& p) const;

  // True when p is in the box and every node carrying interpolation weight at
  // p is set in `inside` (a per-node flag vector on this grid).
  bool supported_by(const std::vector<std::uint8_t>& inside, const GroupPoint& p) const;

  GridField with_metadata(const std::string& key, const std::string& value) const;

 private:
  Grid grid_;
  std::vector<double> values_;
  FieldMetadata metadata_;
  double sup_norm_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

struct AnalyticSource {
  std::string name;
  std::function<double(const GroupPoint&)> fn;
};

GridField sample(const AnalyticSource& source, const Grid& grid);

/// Anything the calculus and convexity testers can evaluate: an analytic
/// function (optionally restricted to a box) or an interpolated GridField.
class Evaluable {
 public:
  Evaluable(GroupPtr group, std::function<double(const GroupPoint&)> fn,
            std::optional<BoxDomain> domain = std::nullopt, std::string name = "analytic");

  static Evaluable from_source(GroupPtr group, const AnalyticSource& source,
                               std::optional<BoxDomain> domain = std::nullopt);
  static Evaluable from_field(std::shared_ptr<const GridField> field);
  static Evaluable from_field(const GridField& field);

  const CarnotGroup& group() const { return *group_; }
  const GroupPtr& group_ptr() const { return group_; }
  const std::optional<BoxDomain>& domain() const { return domain_; }
  const std::string& name() const { return name_; }

  bool contains(const GroupPoint& p) const {
    return (!domain_ || domain_->contains(p)) && (!region_ || region_(p));
  }
  double operator()(const GroupPoint& p) const;

  // Same function with the domain further cut down to `region`.
  Evaluable restricted(std::function<bool(const GroupPoint&)> region, std::string name) const;

 private:
  GroupPtr group_;
  std::function<double(const GroupPoint&)> fn_;
  std::optional<BoxDomain> domain_;
  std::function<bool(const GroupPoint&)> region_;
  std::string name_;
};

struct InnerDomainMask {
  Grid grid;
  std::vector<std::uint8_t> inside;
  double eps = 0.0;

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  bool operator[](std::size_t flat) const { return inside[flat] != 0; }
  bool subset_of(const InnerDomainMask& other) const;
  InnerDomainMask intersect(const InnerDomainMask& other) const;
};

/// For every interior node x, min over boundary-face nodes y of d(x^{-1}, y^{-1}).
/// Boundary nodes get 0. Computed once per lattice and thresholded per eps.
class BoundaryDistance {
 public:
  explicit BoundaryDistance(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& distances() const { return distance_; }
  InnerDomainMask mask(double eps) const;

 private:
  Grid grid_;
  std::vector<double> distance_;
};

InnerDomainMask inner_domain(const Grid& grid, double eps);

}  // namespace carnot
