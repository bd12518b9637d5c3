#include "carnot/convexity.hpp"

#include "carnot/calculus.hpp"
#include "carnot/error.hpp"
#include "carnot/format.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <numbers>

namespace carnot {

namespace {

using json = nlohmann::ordered_json;

json coords_json(const Coords& c) {
  json a = json::array();
  for (int i = 0; i < c.size(); ++i) a.push_back(c[i]);
  return a;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

constexpr std::array<std::uint64_t, kMaxDim> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                        23, 29, 31, 37, 41, 43, 47, 53};

Coords padded_direction(const CarnotGroup& g, const Coords& v) {
  Coords full = Coords::Zero(g.dim());
  full.head(v.size()) = v;
  return full;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

std::string to_json(const VerificationReport& r) {
  json j;
  j["test"] = r.test;
  j["verdict"] = to_string(r.verdict);
  j["worst_violation"] = r.worst_violation;
  j["worst_location"] = r.worst_location ? coords_json(r.worst_location->coords) : json(nullptr);
  j["worst_direction"] = r.worst_direction ? coords_json(*r.worst_direction) : json(nullptr);
  j["worst_radius"] = r.worst_radius;
  j["tolerance"] = r.tolerance;
  j["nodes_tested"] = r.nodes_tested;
  j["samples_tested"] = r.samples_tested;
  j["samples_skipped"] = r.samples_skipped;
  json params = json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  j["parameters"] = params;
  return j.dump(2);
}

std::vector<Coords> horizontal_directions(int m, int count, std::uint64_t seed) {
  if (m < 1) throw InvalidArgumentError("direction set needs m >= 1");
  std::vector<Coords> dirs;
  if (m == 1) {
    dirs.push_back(Coords::Ones(1));
    return dirs;
  }
  if (m == 2) {
    const int k = count > 0 ? count : 16;
    // v and -v give the same midpoint test, so the angles cover [0, pi).
    for (int i = 0; i < k; ++i) {
      const double angle = std::numbers::pi * i / k;
      Coords v(2);
      v << std::cos(angle), std::sin(angle);
      dirs.push_back(v);
    }
    return dirs;
  }
  const int k = count > 0 ? count : 4 * m * m;
  std::uint64_t state = seed;
  Coords shift(m);
  for (int a = 0; a < m; ++a) shift[a] = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  // Coordinate axes first, then the shifted Halton points.
  for (int a = 0; a < m && static_cast<int>(dirs.size()) < k; ++a) {
    Coords e = Coords::Zero(m);
    e[a] = 1.0;
    dirs.push_back(e);
  }
  for (std::uint64_t index = 1; static_cast<int>(dirs.size()) < k; ++index) {
    Coords v(m);
    for (int a = 0; a < m; ++a) {
      double u = radical_inverse(index, kPrimes[static_cast<std::size_t>(a)]) + shift[a];
      u -= std::floor(u);
      v[a] = 2.0 * u - 1.0;
    }
    const double norm = v.norm();
    if (norm < 1e-3) continue;
    dirs.push_back(v / norm);
  }
  return dirs;
}

VerificationReport h_convex_midpoint_test(const Evaluable& f, const InnerDomainMask& mask,
                                          const MidpointTestOptions& options) {
  if (mask.empty()) throw DegenerateInputError("h-convexity midpoint test: mask is empty");
  if (options.radii.empty()) throw InvalidArgumentError("midpoint test needs at least one radius");
  for (double rho : options.radii) {
    if (!(rho > 0.0)) throw InvalidArgumentError("midpoint radii must be positive");
  }
  const CarnotGroup& g = f.group();
  const int m = g.horizontal_dim();
  const std::vector<Coords> dirs = horizontal_directions(m, options.directions_per_node, options.seed);

  VerificationReport report;
  report.test = "h_convex_midpoint";
  report.tolerance = options.tolerance;
  report.worst_violation = std::numeric_limits<double>::infinity();
  std::string radii;
  for (double rho : options.radii) radii += (radii.empty() ? "" : ",") + format_double(rho);
  report.parameters = {{"radii", radii},
                       {"directions", std::to_string(dirs.size())},
                       {"seed", std::to_string(options.seed)},
                       {"mask_eps", format_double(mask.eps)}};

  for (std::size_t node = 0; node < mask.grid.size(); ++node) {
    if (!mask[node]) continue;
    const GroupPoint p = mask.grid.node(node);
    if (!f.contains(p)) continue;
    bool tested = false;
    double center = 0.0;
    for (double rho : options.radii) {
      for (const Coords& v : dirs) {
        const AlgebraElement step{padded_direction(g, rho * v)};
        const GroupPoint plus = g.flow(p, step);
        const GroupPoint minus = g.flow(p, AlgebraElement{-step.coords});
        if (!f.contains(plus) || !f.contains(minus)) {
          ++report.samples_skipped;
          continue;
        }
        if (!tested) {
          center = f(p);
          tested = true;
        }
        const double gap = 0.5 * (f(plus) + f(minus)) - center;
        ++report.samples_tested;
        if (gap < report.worst_violation) {
          report.worst_violation = gap;
          report.worst_location = p;
          report.worst_direction = v;
          report.worst_radius = rho;
        }
      }
    }
    if (tested) ++report.nodes_tested;
  }
  if (report.nodes_tested == 0) {
    throw DegenerateInputError("h-convexity midpoint test: every offset left the domain");
  }
  report.verdict = report.worst_violation >= -report.tolerance ? Verdict::pass : Verdict::fail;
  return report;
}

VerificationReport h_convex_segment_test(const Evaluable& f, const GroupPoint& p,
                                         const AlgebraElement& v, double t_begin, double t_end,
                                         int samples, double tolerance, SegmentMode mode) {
  const CarnotGroup& g = f.group();
  if (samples < 3) throw DegenerateInputError("segment test needs at least 3 samples");
  for (int a = g.horizontal_dim(); a < v.size(); ++a) {
    if (v[a] != 0.0) throw InvalidArgumentError("segment direction must lie in the horizontal layer");
  }
  VerificationReport report;
  report.test = mode == SegmentMode::group_flow ? "h_convex_segment" : "h_convex_segment_affine";
  report.tolerance = tolerance;
  report.worst_violation = std::numeric_limits<double>::infinity();
  report.parameters = {{"t_begin", format_double(t_begin)},
                       {"t_end", format_double(t_end)},
                       {"samples", std::to_string(samples)},
                       {"mode", mode == SegmentMode::group_flow ? "group_flow" : "affine"}};

  // Euclidean segment along the left-invariant field X_v at p: the t-derivative
  // of p * exp(t v) at t = 0, from the BCH series.
  const AlgebraElement pv = g.bracket(log(p), v);
  const Coords tangent = v.coords + 0.5 * pv.coords + g.bracket(log(p), pv).coords / 12.0;

  std::vector<std::optional<double>> values(static_cast<std::size_t>(samples));
  std::vector<GroupPoint> points;
  std::size_t in_domain = 0;
  for (int k = 0; k < samples; ++k) {
    const double t = t_begin + (t_end - t_begin) * k / (samples - 1);
    GroupPoint q = mode == SegmentMode::group_flow ? g.flow(p, AlgebraElement{t * v.coords})
                                                   : GroupPoint{p.coords + t * tangent};
    points.push_back(q);
    if (f.contains(q)) {
      values[static_cast<std::size_t>(k)] = f(q);
      ++in_domain;
    } else {
      ++report.samples_skipped;
    }
  }
  if (in_domain < 3) throw DegenerateInputError("segment test: fewer than 3 in-domain samples");
  const double dt = (t_end - t_begin) / (samples - 1);
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    if (!values[k - 1] || !values[k] || !values[k + 1]) continue;
    const double gap = 0.5 * (*values[k - 1] + *values[k + 1]) - *values[k];
    ++report.samples_tested;
    if (gap < report.worst_violation) {
      report.worst_violation = gap;
      report.worst_location = points[k];
      report.worst_direction = v.coords.head(g.horizontal_dim());
      report.worst_radius = std::abs(dt);
    }
  }
  report.nodes_tested = report.samples_tested;
  if (report.samples_tested == 0) {
    throw DegenerateInputError("segment test: no three consecutive in-domain samples");
  }
  report.verdict = report.worst_violation >= -tolerance ? Verdict::pass : Verdict::fail;
  return report;
}

VerificationReport v_convex_pointwise_test(const Evaluable& f, const InnerDomainMask& mask,
                                           double h, double tolerance) {
  if (mask.empty()) throw DegenerateInputError("v-convexity test: mask is empty");
  VerificationReport report;
  report.test = "v_convex_pointwise";
  report.tolerance = tolerance;
  report.worst_violation = std::numeric_limits<double>::infinity();
  report.parameters = {{"h", format_double(h)}, {"mask_eps", format_double(mask.eps)}};
  for (std::size_t node = 0; node < mask.grid.size(); ++node) {
    if (!mask[node]) continue;
    const GroupPoint p = mask.grid.node(node);
    if (!horizontal_stencil_inside(f, p, h)) {
      ++report.samples_skipped;
      continue;
    }
    const SymmetricMatrix H = horizontal_hessian(f, p, h);
    const double lambda = min_eigenvalue(H);
    ++report.nodes_tested;
    ++report.samples_tested;
    if (lambda < report.worst_violation) {
      report.worst_violation = lambda;
      report.worst_location = p;
      Coords dir(H.size());
      const Eigen::VectorXd ev = H.min_eigenvector();
      for (int i = 0; i < H.size(); ++i) dir[i] = ev[i];
      report.worst_direction = dir;
      report.worst_radius = h;
    }
  }
  if (report.nodes_tested == 0) {
    throw DegenerateInputError("v-convexity test: every stencil left the domain");
  }
  report.verdict = report.worst_violation >= -tolerance ? Verdict::pass : Verdict::fail;
  return report;
}

double interpolation_error_estimate(const Grid& grid) {
  double s = 0.0;
  for (int a = 0; a < grid.dim(); ++a) s += grid.spacing(a) * grid.spacing(a);
  return s / 8.0;
}

double default_tolerance(const Grid& grid, double h, double scale) {
  return 10.0 * scale * (interpolation_error_estimate(grid) + h * h);
}

double horizontal_curvature_scale(const Evaluable& f, const InnerDomainMask& mask, double h) {
  double scale = 0.0;
  for (std::size_t node = 0; node < mask.grid.size(); ++node) {
    if (!mask[node]) continue;
    const GroupPoint p = mask.grid.node(node);
    if (!horizontal_stencil_inside(f, p, h)) continue;
    scale = std::max(scale, horizontal_hessian(f, p, h).spectral_norm());
  }
  return scale;
}

double interpolation_error_bound(const GridField& f, const InnerDomainMask& mask) {
  const Grid& grid = f.grid();
  const int n = grid.dim();
  std::vector<double> curvature(static_cast<std::size_t>(n), 0.0);
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (std::size_t node = 0; node < grid.size(); ++node) {
    if (!mask[node]) continue;
    grid.unravel_into(node, idx);
    for (int a = 0; a < n; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const int i = idx[ua];
      if (i == 0 || i == grid.resolution()[ua] - 1) continue;
      idx[ua] = i - 1;
      const double lo = f.value(grid.ravel(idx));
      idx[ua] = i + 1;
      const double hi = f.value(grid.ravel(idx));
      idx[ua] = i;
      const double h = grid.spacing(a);
      curvature[ua] = std::max(curvature[ua], std::abs(lo + hi - 2.0 * f.value(node)) / (h * h));
    }
  }
  double bound = 0.0;
  for (int a = 0; a < n; ++a) bound += grid.spacing(a) * grid.spacing(a) / 8.0 * curvature[static_cast<std::size_t>(a)];
  return bound;
}

}  // namespace carnot
