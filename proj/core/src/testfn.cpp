#include "carnot/testfn.hpp"

#include "carnot/error.hpp"

#include <algorithm>
#include <cmath>

namespace carnot {

namespace {

// Keeps the sup-convolution displacement bound (4 eps R_0)^{1/2r!} near 0.4
// at eps = 0.2, so the inner domain of the unit box stays nonempty.
constexpr double kAmplitude = 1.0 / 32.0;

double horizontal_norm_sq(int m, const GroupPoint& p) {
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += p[i] * p[i];
  return s;
}

}  // namespace

std::vector<AnalyticSource> testfn_library(const CarnotGroup& g) {
  const int m = g.horizontal_dim();
  // First coordinate of layer 2, if any. Layer-2 coordinates are h-affine on every group.
  const int t = g.step() >= 2 ? m : -1;
  std::vector<AnalyticSource> lib;

  for (int i = 0; i < m; ++i) {
    lib.push_back({"convex/affine_x" + std::to_string(i + 1), [i](const GroupPoint& p) { return p[i]; }});
  }
  if (t >= 0) {
    lib.push_back({"convex/affine_t", [t](const GroupPoint& p) { return p[t]; }});
  }
  lib.push_back({"convex/horizontal_norm_sq",
                 [m](const GroupPoint& p) { return horizontal_norm_sq(m, p) / m; }});
  lib.push_back({"convex/horizontal_quartic", [m](const GroupPoint& p) {
                   const double s = horizontal_norm_sq(m, p);
                   return s * s / (m * m);
                 }});
  if (m >= 2) {
    lib.push_back({"convex/max_x1_x2", [](const GroupPoint& p) { return std::max(p[0], p[1]); }});
  }
  if (t >= 0) {
    lib.push_back({"convex/t_squared", [t](const GroupPoint& p) { return p[t] * p[t]; }});
    // Square of the h-affine function x1 + t.
    lib.push_back({"convex/affine_combo_sq", [t](const GroupPoint& p) {
                     const double a = p[0] + p[t];
                     return 0.25 * a * a;
                   }});
    lib.push_back({"convex/t_plus_x1_sq", [t](const GroupPoint& p) {
                     return 0.5 * p[t] + 0.25 * p[0] * p[0];
                   }});
  }

  lib.push_back({"nonconvex/neg_horizontal_norm_sq",
                 [m](const GroupPoint& p) { return -horizontal_norm_sq(m, p) / m; }});
  if (m >= 2) {
    lib.push_back({"nonconvex/x1_times_x2", [](const GroupPoint& p) { return p[0] * p[1]; }});
  }
  lib.push_back({"nonconvex/sin_x1", [](const GroupPoint& p) { return std::sin(3.0 * p[0]); }});
  lib.push_back({"nonconvex/usc_step", [](const GroupPoint& p) { return p[0] >= 0.0 ? 1.0 : 0.0; }});
  for (AnalyticSource& s : lib) {
    s.fn = [f = std::move(s.fn)](const GroupPoint& p) { return kAmplitude * f(p); };
  }
  return lib;
}

AnalyticSource lookup_testfn(const CarnotGroup& g, std::string_view name) {
  // A bare name matches the entry of that name under either prefix.
  for (AnalyticSource& s : testfn_library(g)) {
    const std::string_view full = s.name;
    const std::string_view bare = full.substr(full.find('/') + 1);
    if (full == name || bare == name) return s;
  }
  throw InvalidArgumentError("unknown test function '" + std::string(name) + "' for group '" +
                             g.name() + "'");
}

std::vector<std::string> testfn_names(const CarnotGroup& g, std::string_view prefix) {
  std::vector<std::string> names;
  for (const AnalyticSource& s : testfn_library(g)) {
    if (s.name.starts_with(prefix)) names.push_back(s.name);
  }
  return names;
}

}  // namespace carnot
