#pragma once

#include "carnot/convexity.hpp"
#include "carnot/grid.hpp"
#include "carnot/regularize.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

struct PipelineConfig {
  std::string group = "heisenberg";  // preset name or spec-file path
  std::vector<double> lower;         // empty: [-1, 1]^n
  std::vector<double> upper;
  std::vector<int> resolution = {21};  // one entry broadcasts to every axis
  std::string source;                  // test-function name
  std::string field;                   // or a field dump to load instead
  std::vector<double> eps_schedule = {0.2, 0.1, 0.05};
  std::vector<double> delta_schedule;  // empty: default_delta(eps)
  std::optional<double> stencil_h;     // default: one lattice spacing
  std::vector<double> radii;           // empty: default_midpoint_radii
  int directions = 0;
  std::optional<double> tol_vconvex;
  std::optional<double> tol_hconvex;
  int mollifier_samples = 0;
  std::optional<double> inner_margin;  // Corollary B subdomain shrink
  std::string output_dir = "carnot-out";
  std::uint64_t seed = 0;

  // Throws ConfigError on violated invariants.
  void validate() const;
};

PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& config);

// Everything the config determines once the group is resolved.
struct PipelineSetup {
  GroupPtr group;
  Grid grid;
  std::vector<double> eps;
  std::vector<double> delta;
  double stencil_h;
  std::vector<double> radii;
  // Unset means the per-field default below.
  std::optional<double> tol_vconvex;
  std::optional<double> tol_hconvex;
};

PipelineSetup resolve_setup(const PipelineConfig& config);
// Loads config.field, or samples config.source on the lattice.
GridField load_input(const PipelineConfig& config, const PipelineSetup& setup);

std::vector<double> default_midpoint_radii(const Grid& grid);
// eps / 4 plus a floor of two lattice spacings: a smaller support leaves the
// lattice field unsmoothed at stencil scale.
double default_delta(double eps, const Grid& grid);
// 10 * (interpolation + h^2 estimates) * max(curvature scale of f on the mask, sup |f|).
double default_vconvex_tolerance(const Evaluable& f, const GridField& field, const InnerDomainMask& mask,
                                 double h);
// Midpoint gaps carry only interpolation error at the two offsets: twice its
// bound, floored at sup |f| times the unit-curvature estimate.
double default_hconvex_tolerance(const GridField& field, const InnerDomainMask& mask);

struct StageRecord {
  double eps = 0.0;
  double delta = 0.0;
  double shrink = 0.0;  // vconvexity_shrink(eps, R_0) + delta
  std::size_t mask_size = 0;
  Verdict status = Verdict::inconclusive;
  std::optional<VerificationReport> vconvex;
  std::optional<VerificationReport> hconvex;
  double sup_distance_mask = 0.0;     // max |u^eps - u| over the stage mask
  double sup_distance_lattice = 0.0;  // max |u^eps - u| over every node
  double semiconvexity = 0.0;
  double semiconvexity_bound = 0.0;   // C(Omega, d) / (2 eps)
  std::size_t candidates_examined = 0;
  std::size_t candidates_skipped = 0;
};

struct PipelineReport {
  std::string group;
  std::string source;
  double sup_norm = 0.0;
  double c_omega_d = 0.0;
  std::vector<StageRecord> stages;
  Verdict verdict = Verdict::inconclusive;
  std::string reason;
  std::vector<GridField> supconv_fields;
  std::vector<GridField> mollified_fields;
};

std::string to_json(const PipelineReport& report, const PipelineConfig& config);

/// Sup-convolve, mollify and test each (eps, delta) stage.
///
/// A stage's status is its h-convexity verdict; the v-convexity check is
/// reported alongside. Verdict: fail if any stage fails; inconclusive if some
/// stage had nothing to test; otherwise pass iff the lattice sup distance
/// |u^eps - u| is nonincreasing along the eps schedule.
PipelineReport theorem_a_pipeline(const GridField& u, const PipelineConfig& config);

struct ApproximantRecord {
  double eps = 0.0;
  double delta = 0.0;
  double sup_error = 0.0;          // max over the subdomain of |u_k - u|
  double supconv_error = 0.0;      // same for u^eps before mollification
  double rate_bound = 0.0;         // 2 L (4 eps R_0)^{1/2r!}
  VerificationReport vconvex;
  VerificationReport hconvex;
};

struct CorollaryBResult {
  std::string group;
  std::string source;
  double sup_norm = 0.0;
  double lipschitz = 0.0;
  double margin = 0.0;
  std::size_t subdomain_size = 0;
  std::vector<ApproximantRecord> rows;
  std::vector<GridField> approximants;
  bool errors_nonincreasing = false;
  Verdict verdict = Verdict::inconclusive;
  std::string reason;
};

std::string to_json(const CorollaryBResult& result, const PipelineConfig& config);

/// Smooth approximants u_k = phi_{delta_k} * u^{eps_k} on a fixed inner
/// subdomain, each tested for v- and h-convexity, with sup errors against u.
CorollaryBResult corollary_b_approximants(const GridField& u, const PipelineConfig& config);

/// max |u(x) - u(y)| / d(x^{-1}, y^{-1}) over node pairs.
double gauge_lipschitz_constant(const GridField& u);

}  // namespace carnot
