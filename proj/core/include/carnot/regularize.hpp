#pragma once

#include "carnot/grid.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace carnot {

// Which pair of points the sup-convolution penalty measures.
enum class PenaltyOrientation {
  inverted,  // d(x^{-1}, y^{-1}) = N(x * y^{-1})
  direct,    // d(x, y) = N(x^{-1} * y), kept for comparison
};

struct SupConvParams {
  double eps = 0.0;
  double sup_norm = 0.0;  // R_0 of the input field
  int exponent = 2;       // 2 r!
  // (4 eps R_0)^{1 / 2r!}: candidates farther than this can never be the argmax.
  double pruning_radius = 0.0;
  PenaltyOrientation orientation = PenaltyOrientation::inverted;

  static SupConvParams make(double eps, const GridField& u,
                            PenaltyOrientation orientation = PenaltyOrientation::inverted);
};

// d^{2 r!} / (2 eps) for the chosen orientation.
double sup_conv_penalty(const CarnotGroup& g, const GroupPoint& x, const GroupPoint& y, double eps,
                        PenaltyOrientation orientation = PenaltyOrientation::inverted);

/// Group offsets g = x * y^{-1} (inverted) or x^{-1} * y (direct) are drawn
/// from the fixed lattice g_k = d_k * h_k, h_k the grid spacing of axis k.
/// Horizontal offsets then land y on lattice nodes, and the vertical
/// coordinates of y are interpolated.
Coords offset_from_index(const Grid& grid, std::span<const int> d);

struct SupConvCandidate {
  double value = 0.0;  // u~(y) - N(g)^{2r!} / (2 eps)
  GroupPoint y;
  GroupPoint offset;
};

/// One candidate of the sup-convolution at node `x_flat` for integer offset
/// `d`, or nullopt when y falls outside the box. The production scan and
/// exhaustive oracles share this arithmetic.
std::optional<SupConvCandidate> sup_conv_candidate(const GridField& u, std::size_t x_flat,
                                                   std::span<const int> d, double eps,
                                                   PenaltyOrientation orientation);

struct SupConvResult {
  GridField field;
  std::vector<GroupPoint> maximizer;  // y_eps per node
  std::vector<GroupPoint> offset;     // maximizing g per node
  std::size_t candidates_examined = 0;
  std::size_t candidates_skipped = 0;
};

/// u^eps(x) = max over lattice offsets g of u~(y) - N(g)^{2r!} / (2 eps),
/// y = g^{-1} * x, u~ the multilinear interpolant of u.
///
/// Every candidate is a left translate of u~, so horizontal convexity of u~
/// carries over to u^eps. With `prune` set, offsets with some |g_k| above
/// radius^{w_k} are skipped: they have N(g) > radius and are strictly
/// non-maximal, so the result is bit-identical to the exhaustive scan. Ties go
/// to the lexicographically smallest offset.
SupConvResult sup_convolution(const GridField& u, const SupConvParams& params, bool prune = true);

/// Discrete group mollifier: offsets delta_delta(s) for s on a symmetric
/// cell-centred lattice in [-1, 1]^n with N(s) < 1, weighted by
/// (1 - N(s)^2)^4 and renormalized to unit mass.
struct MollifierSpec {
  double delta = 0.0;
  int samples_per_axis = 0;
  std::vector<GroupPoint> offsets;
  std::vector<double> weights;
  double discrete_mass = 0.0;  // lattice sum of the profile before renormalization

  static MollifierSpec make(const CarnotGroup& g, double delta, int samples_per_axis = 0);
};

// (1 - N(s)^2)^4 inside the unit gauge ball, 0 outside.
double mollifier_profile(const CarnotGroup& g, const GroupPoint& s);

struct MollifyResult {
  GridField field;
  // Nodes whose whole support p^{-1} * q stayed inside the box. Other nodes
  // keep the input value.
  InnerDomainMask valid;
};

/// (phi_delta * f)(q) = sum_p w(p) f(p^{-1} * q), with f interpolated.
MollifyResult mollify(const GridField& f, const MollifierSpec& spec);

/// C such that f + C |p|_E^2 has a numerically PSD Euclidean Hessian on the
/// mask: max(0, -min lambda_min) / 2.
double semiconvexity_certificate(const GridField& f, const InnerDomainMask& mask, double h);

/// max over node pairs (x, y) of the spectral norm of the x-Hessian of
/// d(x^{-1}, y^{-1})^{2r!}.
double c_omega_d(const Grid& grid, double h);

/// Inner-domain radius on which u^eps is a supremum of unrestricted left
/// translates: max((2 R_0 + 1) eps, (4 eps R_0)^{1 / 2r!}). The second term
/// bounds d(x^{-1}, y_eps^{-1}) and dominates for small eps R_0.
double vconvexity_shrink(double eps, double sup_norm, int exponent);

InnerDomainMask shrunk_mask_for_vconvexity(const Grid& grid, double eps, double sup_norm);
InnerDomainMask shrunk_mask_for_vconvexity(const BoundaryDistance& distance, double eps,
                                           double sup_norm);

}  // namespace carnot
