#pragma once

#include "carnot/grid.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict v);

/// Outcome of a convexity check. verdict == pass iff worst_violation >= -tolerance.
struct VerificationReport {
  std::string test;
  Verdict verdict = Verdict::pass;
  // Most negative margin found (midpoint gap, or smallest Hessian eigenvalue).
  double worst_violation = 0.0;
  std::optional<GroupPoint> worst_location;
  // Horizontal test direction at the worst location (m components).
  std::optional<Coords> worst_direction;
  double worst_radius = 0.0;
  double tolerance = 0.0;
  std::size_t nodes_tested = 0;
  std::size_t samples_tested = 0;
  std::size_t samples_skipped = 0;
  std::map<std::string, std::string> parameters;
};

// Structured-text (JSON) rendering with the report's exact fields.
std::string to_json(const VerificationReport& report);

/// Deterministic unit directions in R^m. For m == 2, `count` equally spaced
/// angles (default 16). For m > 2, a seeded Halton set rotated by a
/// seeded shift and projected to the sphere (default 4 m^2 vectors).
std::vector<Coords> horizontal_directions(int m, int count = 0, std::uint64_t seed = 0);

struct MidpointTestOptions {
  std::vector<double> radii;
  int directions_per_node = 0;  // 0 selects the default count
  std::uint64_t seed = 0;
  double tolerance = 0.0;
};

/// Checks f(p) <= (f(p * exp(rho v)) + f(p * exp(-rho v))) / 2 for masked
/// nodes p, horizontal unit v and each radius rho. Offsets outside f's domain
/// are skipped and counted.
VerificationReport h_convex_midpoint_test(const Evaluable& f, const InnerDomainMask& mask,
                                          const MidpointTestOptions& options);

enum class SegmentMode {
  group_flow,  // t -> p * exp(t v)
  affine,      // t -> p + t X_v(p) in coordinates; equals group_flow on step <= 2
};

/// Discrete midpoint convexity of t -> f(curve(t)) on `samples` equally spaced
/// t in [t_begin, t_end].
VerificationReport h_convex_segment_test(const Evaluable& f, const GroupPoint& p,
                                         const AlgebraElement& v, double t_begin, double t_end,
                                         int samples, double tolerance,
                                         SegmentMode mode = SegmentMode::group_flow);

/// Smallest eigenvalue of the horizontal Hessian over masked nodes.
/// Nodes whose stencil leaves the domain are skipped.
VerificationReport v_convex_pointwise_test(const Evaluable& f, const InnerDomainMask& mask,
                                           double h, double tolerance);

// (1/8) sum_k h_k^2: multilinear interpolation error for unit curvature.
double interpolation_error_estimate(const Grid& grid);

// 10 * scale * (interpolation_error_estimate + h^2). Both estimates are per
// unit curvature; `scale` carries the field's curvature.
double default_tolerance(const Grid& grid, double h, double scale = 1.0);

// Largest spectral norm of the horizontal Hessian over masked nodes with a
// valid stencil; 0 if there are none.
double horizontal_curvature_scale(const Evaluable& f, const InnerDomainMask& mask, double h);

// sum_k (h_k^2 / 8) max |D_k^2 f| over masked nodes, D_k^2 the lattice second
// difference along axis k: bounds the multilinear interpolation error there.
double interpolation_error_bound(const GridField& f, const InnerDomainMask& mask);

}  // namespace carnot
