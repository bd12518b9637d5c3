#include "carnot/regularize.hpp"

#include "carnot/calculus.hpp"
#include "carnot/error.hpp"
#include "carnot/format.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace carnot {

SupConvParams SupConvParams::make(double eps, const GridField& u, PenaltyOrientation orientation) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgumentError("sup-convolution needs eps > 0, got " + format_double(eps));
  }
  SupConvParams p;
  p.eps = eps;
  p.sup_norm = u.sup_norm();
  p.exponent = u.group().gauge_exponent();
  p.pruning_radius = std::pow(4.0 * eps * p.sup_norm, 1.0 / p.exponent);
  p.orientation = orientation;
  return p;
}

double sup_conv_penalty(const CarnotGroup& g, const GroupPoint& x, const GroupPoint& y, double eps,
                        PenaltyOrientation orientation) {
  const GroupPoint rel = orientation == PenaltyOrientation::inverted
                             ? g.multiply(x, g.inverse(y))
                             : g.multiply(g.inverse(x), y);
  return g.gauge_power(rel) / (2.0 * eps);
}

Coords offset_from_index(const Grid& grid, std::span<const int> d) {
  const int n = grid.dim();
  if (static_cast<int>(d.size()) != n) throw InvalidArgumentError("offset index has the wrong length");
  Coords gvec(n);
  for (int k = 0; k < n; ++k) gvec[k] = d[static_cast<std::size_t>(k)] * grid.spacing(k);
  return gvec;
}

namespace {

// y with the coordinates of weight >= layer still to be filled. Coordinates
// of weight `layer` in y = g^{-1} x (or x g) equal base -+ g_k, where base is
// the product taken with those g coordinates zeroed.
GroupPoint layer_base(const CarnotGroup& g, const Coords& gvec, int layer, const GroupPoint& x,
                      PenaltyOrientation orientation) {
  GroupPoint gz{gvec};
  for (int k = 0; k < g.dim(); ++k) {
    if (g.weight(k) >= layer) gz[k] = 0.0;
  }
  return orientation == PenaltyOrientation::inverted ? g.multiply(g.inverse(gz), x) : g.multiply(x, gz);
}

double vertical_coordinate(double base, double gk, PenaltyOrientation orientation) {
  return orientation == PenaltyOrientation::inverted ? base - gk : base + gk;
}

// `interpolated` is u~(y) for the candidate's y.
double candidate_value_from_power(const GridField& u, double interpolated, double gauge_power, double eps) {
  const double v = std::clamp(interpolated, u.min_value(), u.max_value());
  return v - gauge_power / (2.0 * eps);
}

double candidate_value(const GridField& u, double interpolated, const Coords& gvec, double eps) {
  return candidate_value_from_power(u, interpolated, u.group().gauge_power(gvec), eps);
}

// Horizontal offset index range that keeps y on the lattice.
std::pair<int, int> horizontal_range(int xi, int res, PenaltyOrientation orientation) {
  return orientation == PenaltyOrientation::inverted ? std::pair{xi - (res - 1), xi}
                                                     : std::pair{-xi, res - 1 - xi};
}

// Offset index range for a vertical coordinate; one wider than the box on
// each side, exact membership is decided by BoxDomain::contains.
std::pair<int, int> vertical_range(double base, double lo, double hi, double h,
                                   PenaltyOrientation orientation) {
  // inverted: y = base - d h, direct: y = base + d h.
  double a = (base - hi) / h;
  double b = (base - lo) / h;
  if (orientation == PenaltyOrientation::direct) {
    a = (lo - base) / h;
    b = (hi - base) / h;
  }
  return {static_cast<int>(std::ceil(a)) - 1, static_cast<int>(std::floor(b)) + 1};
}

class OffsetScan {
 public:
  OffsetScan(const GridField& u, const SupConvParams& params, bool prune)
      : u_(u), grid_(u.grid()), g_(u.group()), params_(params), prune_(prune), n_(grid_.dim()) {
    for (int w = 1; w <= g_.step(); ++w) bound_[static_cast<std::size_t>(w)] = std::pow(params.pruning_radius, w);
    layer_start_.assign(static_cast<std::size_t>(g_.step()) + 2, n_);
    for (int k = n_ - 1; k >= 0; --k) layer_start_[static_cast<std::size_t>(g_.weight(k))] = k;
  }

  void run(std::size_t xi) {
    x_ = grid_.node(xi);
    grid_.unravel_into(xi, std::span<int>(xidx_.data(), static_cast<std::size_t>(n_)));
    gvec_ = Coords::Zero(n_);
    y_ = GroupPoint::identity(n_);
    best_ = -std::numeric_limits<double>::infinity();
    horizontal(0, true);
  }

  double best() const { return best_; }
  const GroupPoint& best_y() const { return best_y_; }
  const Coords& best_offset() const { return best_g_; }
  std::size_t examined() const { return examined_; }
  std::size_t skipped() const { return skipped_; }

 private:
  bool pruned(int k) const {
    return prune_ && std::abs(gvec_[k]) > bound_[static_cast<std::size_t>(g_.weight(k))];
  }

  void horizontal(int a, bool live) {
    if (a == g_.horizontal_dim()) {
      vertical_layer(2, live);
      return;
    }
    const auto ua = static_cast<std::size_t>(a);
    const auto [lo, hi] = horizontal_range(xidx_[ua], grid_.resolution()[ua], params_.orientation);
    for (int d = lo; d <= hi; ++d) {
      gvec_[a] = d * grid_.spacing(a);
      const int iy = params_.orientation == PenaltyOrientation::inverted ? xidx_[ua] - d : xidx_[ua] + d;
      y_[a] = grid_.coordinate(a, iy);
      hflat_[ua + 1] = hflat_[ua] + static_cast<std::size_t>(iy) * grid_.stride(a);
      horizontal(a + 1, live && !pruned(a));
    }
    gvec_[a] = 0.0;
  }

  void vertical_layer(int layer, bool live) {
    // Layer layer - 1 is complete; its gauge term is shared by every leaf
    // below. Liveness never returns once lost, so live leaves see every term.
    if (live) term_[static_cast<std::size_t>(layer - 1)] = g_.gauge_power_term(gvec_, layer - 1);
    if (layer > g_.step()) {
      leaf(live);
      return;
    }
    const GroupPoint base = layer_base(g_, gvec_, layer, x_, params_.orientation);
    vertical_coord(layer, layer_start_[static_cast<std::size_t>(layer)], base, live);
  }

  void vertical_coord(int layer, int k, const GroupPoint& base, bool live) {
    if (k == layer_start_[static_cast<std::size_t>(layer) + 1]) {
      vertical_layer(layer + 1, live);
      return;
    }
    const BoxDomain& box = grid_.domain();
    const double h = grid_.spacing(k);
    const auto [lo, hi] = vertical_range(base[k], box.lower()[k], box.upper()[k], h, params_.orientation);
    for (int d = lo; d <= hi; ++d) {
      gvec_[k] = d * h;
      y_[k] = vertical_coordinate(base[k], gvec_[k], params_.orientation);
      // Horizontal coordinates are lattice nodes, so checking each vertical
      // coordinate as it is set decides box membership of the leaf.
      if (!box.contains_coordinate(k, y_[k])) continue;
      vertical_coord(layer, k + 1, base, live && !pruned(k));
    }
    gvec_[k] = 0.0;
  }

  void leaf(bool live) {
    if (!live) {
      ++skipped_;
      return;
    }
    ++examined_;
    double power = 0.0;  // same layer order as CarnotGroup::gauge_power
    for (int l = 1; l <= g_.step(); ++l) power += term_[static_cast<std::size_t>(l)];
    const double v = candidate_value_from_power(u_, interpolate(), power, params_.eps);
    if (v > best_) {
      best_ = v;
      best_y_ = y_;
      best_g_ = gvec_;
    }
  }

  // u~(y), equal bit-for-bit to u_.evaluate(y_). The horizontal coordinates
  // of y are nodes, which GridField::evaluate weighs by exact 1.0 factors, so
  // only the vertical axes are located and blended, in the same corner order.
  double interpolate() const {
    const int m = g_.horizontal_dim();
    std::size_t base = hflat_[static_cast<std::size_t>(m)];
    std::array<double, kMaxDim> theta;
    std::array<std::size_t, kMaxDim> step;
    unsigned live = 0;
    for (int k = m; k < n_; ++k) {
      const auto j = static_cast<std::size_t>(k - m);
      int cell = 0;
      grid_.locate_axis(k, y_[k], cell, theta[j]);
      base += static_cast<std::size_t>(cell) * grid_.stride(k);
      step[j] = grid_.stride(k);
      if (theta[j] != 0.0) live |= 1u << j;
    }
    const std::vector<double>& values = u_.values();
    double result = 0.0;
    unsigned mask = 0;
    do {
      double w = 1.0;
      std::size_t flat = base;
      for (std::size_t j = 0; j < static_cast<std::size_t>(n_ - m) && w != 0.0; ++j) {
        if (!((live >> j) & 1u)) continue;
        if ((mask >> j) & 1u) {
          w *= theta[j];
          flat += step[j];
        } else {
          w *= 1.0 - theta[j];
        }
      }
      if (w != 0.0) result += w * values[flat];
      mask = (mask - live) & live;
    } while (mask != 0);
    return result;
  }

  const GridField& u_;
  const Grid& grid_;
  const CarnotGroup& g_;
  const SupConvParams& params_;
  bool prune_;
  int n_;
  std::array<double, 4> bound_{};
  std::array<double, 4> term_{};  // gauge_power_term of each completed layer
  std::vector<int> layer_start_;  // first coordinate of each weight; weight step+1 -> n
  GroupPoint x_;
  std::array<int, kMaxDim> xidx_{};
  std::array<std::size_t, kMaxDim + 1> hflat_{};  // flat index of y's horizontal part, by prefix
  Coords gvec_;
  GroupPoint y_;
  double best_ = 0.0;
  GroupPoint best_y_;
  Coords best_g_;
  std::size_t examined_ = 0;
  std::size_t skipped_ = 0;
};

}  // namespace

std::optional<SupConvCandidate> sup_conv_candidate(const GridField& u, std::size_t x_flat,
                                                   std::span<const int> d, double eps,
                                                   PenaltyOrientation orientation) {
  const Grid& grid = u.grid();
  const CarnotGroup& g = grid.group();
  const int n = grid.dim();
  const GroupPoint x = grid.node(x_flat);
  const std::vector<int> xidx = grid.unravel(x_flat);
  const Coords gvec = offset_from_index(grid, d);
  GroupPoint y = GroupPoint::identity(n);
  for (int a = 0; a < g.horizontal_dim(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const int iy = orientation == PenaltyOrientation::inverted ? xidx[ua] - d[ua] : xidx[ua] + d[ua];
    if (iy < 0 || iy >= grid.resolution()[ua]) return std::nullopt;
    y[a] = grid.coordinate(a, iy);
  }
  for (int layer = 2; layer <= g.step(); ++layer) {
    const GroupPoint base = layer_base(g, gvec, layer, x, orientation);
    for (int k = 0; k < n; ++k) {
      if (g.weight(k) == layer) y[k] = vertical_coordinate(base[k], gvec[k], orientation);
    }
  }
  if (!grid.domain().contains(y)) return std::nullopt;
  return SupConvCandidate{candidate_value(u, u.evaluate_unchecked(y), gvec, eps), y, GroupPoint{gvec}};
}

SupConvResult sup_convolution(const GridField& u, const SupConvParams& params, bool prune) {
  if (!(params.eps > 0.0)) {
    throw InvalidArgumentError("sup-convolution needs eps > 0, got " + format_double(params.eps));
  }
  const Grid& grid = u.grid();
  if (grid.group().step() > 3) {
    throw UnsupportedStepError("sup-convolution supports step <= 3");
  }
  std::vector<double> out(grid.size());
  std::vector<GroupPoint> maximizer(grid.size());
  std::vector<GroupPoint> offset(grid.size());
  OffsetScan scan(u, params, prune);
  for (std::size_t xi = 0; xi < grid.size(); ++xi) {
    scan.run(xi);
    out[xi] = scan.best();
    maximizer[xi] = scan.best_y();
    offset[xi] = GroupPoint{scan.best_offset()};
  }

  FieldMetadata meta = u.metadata();
  meta["supconv.eps"] = format_double(params.eps);
  meta["supconv.sup_norm"] = format_double(params.sup_norm);
  meta["supconv.pruning_radius"] = format_double(params.pruning_radius);
  meta["supconv.orientation"] =
      params.orientation == PenaltyOrientation::inverted ? "inverted" : "direct";
  meta["supconv.candidates_examined"] = std::to_string(scan.examined());
  meta["supconv.candidates_skipped"] = std::to_string(scan.skipped());
  return {GridField(grid, std::move(out), std::move(meta)), std::move(maximizer), std::move(offset),
          scan.examined(), scan.skipped()};
}

double mollifier_profile(const CarnotGroup& g, const GroupPoint& s) {
  const double N = g.gauge_norm(s);
  if (N >= 1.0) return 0.0;
  const double b = 1.0 - N * N;
  return b * b * b * b;
}

MollifierSpec MollifierSpec::make(const CarnotGroup& g, double delta, int samples_per_axis) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidArgumentError("mollifier needs delta > 0, got " + format_double(delta));
  }
  const int n = g.dim();
  if (samples_per_axis <= 0) samples_per_axis = n <= 3 ? 9 : n == 4 ? 7 : n <= 6 ? 5 : 3;
  if (samples_per_axis % 2 == 0) {
    throw InvalidArgumentError("mollifier samples per axis must be odd");
  }
  MollifierSpec spec;
  spec.delta = delta;
  spec.samples_per_axis = samples_per_axis;
  const int K = samples_per_axis;
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(K);
  std::vector<double> raw;
  for (std::size_t flat = 0; flat < total; ++flat) {
    GroupPoint s = GroupPoint::identity(n);
    std::size_t rest = flat;
    for (int a = n - 1; a >= 0; --a) {
      const int k = static_cast<int>(rest % static_cast<std::size_t>(K));
      rest /= static_cast<std::size_t>(K);
      // Cell-centred and symmetric about 0; K odd puts a sample at 0.
      s[a] = -1.0 + (2.0 * k + 1.0) / K;
    }
    const double w = mollifier_profile(g, s);
    if (w <= 0.0) continue;
    spec.offsets.push_back(g.dilate(delta, s));
    raw.push_back(w);
  }
  for (double w : raw) spec.discrete_mass += w;
  spec.weights.reserve(raw.size());
  for (double w : raw) spec.weights.push_back(w / spec.discrete_mass);
  // Fold the rounding residual into the largest (central) weight so the
  // weights sum to 1 in summation order.
  const auto centre = std::max_element(spec.weights.begin(), spec.weights.end());
  for (int pass = 0; pass < 2; ++pass) {
    double sum = 0.0;
    for (double w : spec.weights) sum += w;
    *centre += 1.0 - sum;
  }
  return spec;
}

MollifyResult mollify(const GridField& f, const MollifierSpec& spec) {
  const Grid& grid = f.grid();
  const CarnotGroup& g = grid.group();
  if (spec.offsets.empty()) throw InvalidArgumentError("mollifier has no support points");
  std::vector<GroupPoint> inverse_offsets;
  inverse_offsets.reserve(spec.offsets.size());
  for (const GroupPoint& p : spec.offsets) inverse_offsets.push_back(g.inverse(p));

  std::vector<double> out(grid.size());
  InnerDomainMask valid{grid, std::vector<std::uint8_t>(grid.size(), 0), spec.delta};
  std::vector<GroupPoint> shifted(inverse_offsets.size());
  for (std::size_t qi = 0; qi < grid.size(); ++qi) {
    const GroupPoint q = grid.node(qi);
    const double center = f.value(qi);
    bool inside = true;
    for (std::size_t k = 0; k < inverse_offsets.size(); ++k) {
      shifted[k] = g.multiply(inverse_offsets[k], q);
      if (!f.domain().contains(shifted[k])) {
        inside = false;
        break;
      }
    }
    if (!inside) {
      out[qi] = center;
      continue;
    }
    // Summing deviations from the centre keeps constants exact.
    double acc = 0.0;
    double lo = center;
    double hi = center;
    for (std::size_t k = 0; k < shifted.size(); ++k) {
      const double v = f.evaluate(shifted[k]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      acc += spec.weights[k] * (v - center);
    }
    out[qi] = std::clamp(center + acc, lo, hi);
    valid.inside[qi] = 1;
  }
  if (valid.empty()) {
    throw DegenerateInputError("mollifier support of radius " + format_double(spec.delta) +
                               " leaves the domain at every node");
  }
  FieldMetadata meta = f.metadata();
  meta["mollify.delta"] = format_double(spec.delta);
  meta["mollify.samples_per_axis"] = std::to_string(spec.samples_per_axis);
  meta["mollify.support_points"] = std::to_string(spec.offsets.size());
  meta["mollify.valid_nodes"] = std::to_string(valid.count());
  return {GridField(grid, std::move(out), std::move(meta)), std::move(valid)};
}

double semiconvexity_certificate(const GridField& f, const InnerDomainMask& mask, double h) {
  if (mask.empty()) throw DegenerateInputError("semiconvexity certificate: mask is empty");
  const Evaluable e = Evaluable::from_field(f);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t tested = 0;
  for (std::size_t i = 0; i < mask.grid.size(); ++i) {
    if (!mask[i]) continue;
    const GroupPoint p = mask.grid.node(i);
    if (!euclidean_stencil_inside(e, p, h)) continue;
    worst = std::min(worst, min_eigenvalue(euclidean_hessian(e, p, h)));
    ++tested;
  }
  if (tested == 0) throw DegenerateInputError("semiconvexity certificate: no valid stencil on the mask");
  return std::max(0.0, -worst) / 2.0;
}

double c_omega_d(const Grid& grid, double h) {
  const GroupPtr& gp = grid.domain().group_ptr();
  const CarnotGroup& g = *gp;
  double best = 0.0;
  for (std::size_t yi = 0; yi < grid.size(); ++yi) {
    const GroupPoint yinv = g.inverse(grid.node(yi));
    const Evaluable penalty(gp, [&g, yinv](const GroupPoint& x) {
      return g.gauge_power(g.multiply(x, yinv));
    }, std::nullopt, "gauge_power");
    for (std::size_t xi = 0; xi < grid.size(); ++xi) {
      best = std::max(best, euclidean_hessian(penalty, grid.node(xi), h).spectral_norm());
    }
  }
  return best;
}

double vconvexity_shrink(double eps, double sup_norm, int exponent) {
  if (!(eps >= 0.0)) throw InvalidArgumentError("shrunk mask needs eps >= 0");
  if (!(sup_norm >= 0.0)) throw InvalidArgumentError("shrunk mask needs R_0 >= 0");
  return std::max((2.0 * sup_norm + 1.0) * eps, std::pow(4.0 * eps * sup_norm, 1.0 / exponent));
}

InnerDomainMask shrunk_mask_for_vconvexity(const Grid& grid, double eps, double sup_norm) {
  return shrunk_mask_for_vconvexity(BoundaryDistance(grid), eps, sup_norm);
}

InnerDomainMask shrunk_mask_for_vconvexity(const BoundaryDistance& distance, double eps,
                                           double sup_norm) {
  return distance.mask(
      vconvexity_shrink(eps, sup_norm, distance.grid().group().gauge_exponent()));
}

}  // namespace carnot
