#include "cli.hpp"

#include "carnot/convexity.hpp"
#include "carnot/error.hpp"
#include "carnot/io.hpp"
#include "carnot/pipeline.hpp"
#include "carnot/regularize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace carnot::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Flags shared by every field-producing subcommand. Each one overrides the
// matching config key when given.
struct CommonFlags {
  std::string config;
  std::string group;
  std::string source;
  std::string field;
  std::vector<int> resolution;
  std::vector<double> eps;
  std::vector<double> delta;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App& app, CommonFlags& f, bool config_required) {
  auto* c = app.add_option("config", f.config, "pipeline config (JSON)");
  if (config_required) c->required();
  app.add_option("--group", f.group, "group preset name or spec-file path");
  app.add_option("--source", f.source, "bundled test function, e.g. convex/t_squared");
  app.add_option("--field", f.field, "field dump to use as input instead of a source");
  app.add_option("--resolution", f.resolution, "nodes per axis (one value broadcasts)");
  app.add_option("--eps", f.eps, "eps schedule, strictly decreasing");
  app.add_option("--delta", f.delta, "mollifier radius schedule, one per eps");
  app.add_option("--tol", f.tol, "tolerance for both convexity checks");
  app.add_option("--seed", f.seed, "seed for direction sets");
  app.add_option("--out", f.out, "output directory");
}

PipelineConfig build_config(const CommonFlags& f) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : load_config(f.config);
  if (!f.group.empty()) c.group = f.group;
  if (!f.source.empty()) {
    c.source = f.source;
    c.field.clear();
  }
  if (!f.field.empty()) c.field = f.field;
  if (!f.resolution.empty()) c.resolution = f.resolution;
  if (!f.eps.empty()) c.eps_schedule = f.eps;
  if (!f.delta.empty()) c.delta_schedule = f.delta;
  if (f.tol) c.tol_vconvex = c.tol_hconvex = *f.tol;
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.output_dir = f.out;
  c.validate();
  return c;
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return kExitPass;
    case Verdict::fail:
      return kExitFail;
    case Verdict::inconclusive:
      return kExitInconclusive;
  }
  return kExitUsage;
}

fs::path prepare_output(const PipelineConfig& c) {
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  return dir;
}

struct Input {
  PipelineConfig config;
  PipelineSetup setup;
  GridField u;
};

// A field dump carries its own lattice, which replaces the config's so that
// lattice-based defaults (delta, stencil, radii) follow the field. The group
// stays the config's unless it differs from the dump's in name.
Input load(const CommonFlags& f) {
  PipelineConfig c = build_config(f);
  if (!c.field.empty()) {
    GridField u = read_field_dump(c.field);
    const Grid& grid = u.grid();
    c.resolution = grid.resolution();
    c.lower.assign(grid.domain().lower().begin(), grid.domain().lower().end());
    c.upper.assign(grid.domain().upper().begin(), grid.domain().upper().end());
    if (resolve_group(c.group)->spec().name != u.group().name()) c.group = u.group().name();
    PipelineSetup s = resolve_setup(c);
    return {std::move(c), std::move(s), std::move(u)};
  }
  PipelineSetup s = resolve_setup(c);
  GridField u = load_input(c, s);
  return {std::move(c), std::move(s), std::move(u)};
}

// --- group-check -----------------------------------------------------------

int group_check(const std::string& spec, const std::string& out_dir, std::ostream& out) {
  json report;
  report["kind"] = "group_check";
  report["spec"] = spec;
  GroupPtr g;
  try {
    g = resolve_group(spec);
  } catch (const SpecError& e) {
    report["valid"] = false;
    report["error"] = e.what();
    out << "invalid: " << e.what() << "\n";
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_text_file(fs::path(out_dir) / "group_check.json", report.dump(2) + "\n");
    }
    return kExitFail;
  }
  // Spot-check the group law on random triples; construction already
  // validated the structure constants.
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  auto random_point = [&] {
    GroupPoint p = GroupPoint::identity(g->dim());
    for (int k = 0; k < g->dim(); ++k) p[k] = U(rng);
    return p;
  };
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GroupPoint a = random_point();
    const GroupPoint b = random_point();
    const GroupPoint c = random_point();
    const Coords lhs = g->multiply(g->multiply(a, b), c).coords;
    const Coords rhs = g->multiply(a, g->multiply(b, c)).coords;
    const double scale = std::max({1.0, lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff()});
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
    worst = std::max(worst, g->multiply(a, g->inverse(a)).coords.cwiseAbs().maxCoeff());
  }
  const bool ok = worst <= 1e-9;
  report["valid"] = ok;
  report["name"] = g->name();
  report["step"] = g->step();
  report["dim"] = g->dim();
  report["homogeneous_dim"] = g->homogeneous_dim();
  report["gauge_exponent"] = g->gauge_exponent();
  report["layer_dims"] = g->spec().layer_dims;
  report["associativity_worst_relative_error"] = worst;
  out << g->name() << ": step " << g->step() << ", dim " << g->dim() << ", Q " << g->homogeneous_dim()
      << ", associativity error " << worst << "\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text_file(fs::path(out_dir) / "group_check.json", report.dump(2) + "\n");
  }
  return ok ? kExitPass : kExitFail;
}

// --- single-operation subcommands -------------------------------------------

int supconv(const CommonFlags& f, std::ostream& out) {
  const Input in = load(f);
  const double eps = in.setup.eps.front();
  const SupConvResult r = sup_convolution(in.u, SupConvParams::make(eps, in.u));
  const fs::path dir = prepare_output(in.config);
  write_field_dump(r.field, dir, "supconv");
  json report;
  report["kind"] = "supconv";
  report["config"] = json::parse(config_to_json(in.config));
  report["eps"] = eps;
  report["input_sup_norm"] = in.u.sup_norm();
  report["pruning_radius"] = SupConvParams::make(eps, in.u).pruning_radius;
  report["candidates_examined"] = r.candidates_examined;
  report["candidates_skipped"] = r.candidates_skipped;
  double dist = 0.0;
  for (std::size_t i = 0; i < in.u.grid().size(); ++i) dist = std::max(dist, r.field.value(i) - in.u.value(i));
  report["sup_distance"] = dist;
  write_text_file(dir / "supconv_report.json", report.dump(2) + "\n");
  out << "sup-convolution at eps " << eps << ": |u^eps - u| = " << dist << ", wrote " << (dir / "supconv.csv").string()
      << "\n";
  return kExitPass;
}

int mollify_cmd(const CommonFlags& f, std::ostream& out) {
  const Input in = load(f);
  const double delta = in.setup.delta.front();
  const MollifierSpec spec = MollifierSpec::make(in.u.group(), delta, in.config.mollifier_samples);
  const MollifyResult r = mollify(in.u, spec);
  const fs::path dir = prepare_output(in.config);
  write_field_dump(r.field, dir, "mollified");
  json report;
  report["kind"] = "mollify";
  report["config"] = json::parse(config_to_json(in.config));
  report["delta"] = delta;
  report["kernel_points"] = spec.offsets.size();
  report["discrete_mass"] = spec.discrete_mass;
  report["valid_nodes"] = r.valid.count();
  write_text_file(dir / "mollify_report.json", report.dump(2) + "\n");
  out << "mollified at delta " << delta << ": " << r.valid.count() << " of " << in.u.grid().size()
      << " nodes have their full support in the box, wrote " << (dir / "mollified.csv").string() << "\n";
  return kExitPass;
}

int convexity_cmd(const CommonFlags& f, bool horizontal, std::ostream& out) {
  const Input in = load(f);
  const InnerDomainMask mask = inner_domain(in.u.grid(), 0.0);
  const Evaluable e = Evaluable::from_field(in.u);
  VerificationReport r;
  if (horizontal) {
    const double tol = in.setup.tol_hconvex ? *in.setup.tol_hconvex : default_hconvex_tolerance(in.u, mask);
    r = h_convex_midpoint_test(e, mask, {in.setup.radii, in.config.directions, in.config.seed, tol});
  } else {
    const double h = in.setup.stencil_h;
    const double tol =
        in.setup.tol_vconvex ? *in.setup.tol_vconvex : default_vconvex_tolerance(e, in.u, mask, h);
    r = v_convex_pointwise_test(e, mask, h, tol);
  }
  const std::string stem = horizontal ? "test_hconvex" : "test_vconvex";
  const fs::path dir = prepare_output(in.config);
  json report = json::parse(to_json(r));
  report["config"] = json::parse(config_to_json(in.config));
  write_text_file(dir / (stem + ".json"), report.dump(2) + "\n");
  out << r.test << ": " << to_string(r.verdict) << " (worst " << r.worst_violation << ", tolerance " << r.tolerance
      << ", " << r.nodes_tested << " nodes)\n";
  return exit_code(r.verdict);
}

// --- pipelines --------------------------------------------------------------

int theorem_a_cmd(const CommonFlags& f, std::ostream& out) {
  const Input in = load(f);
  const PipelineReport r = theorem_a_pipeline(in.u, in.config);
  const fs::path dir = prepare_output(in.config);
  write_text_file(dir / "theorem_a.json", to_json(r, in.config));
  for (std::size_t k = 0; k < r.stages.size(); ++k) {
    write_field_dump(r.supconv_fields[k], dir, "supconv_" + std::to_string(k));
    write_field_dump(r.mollified_fields[k], dir, "mollified_" + std::to_string(k));
  }
  for (std::size_t k = 0; k < r.stages.size(); ++k) {
    const StageRecord& s = r.stages[k];
    out << "stage " << k << " eps " << s.eps << " delta " << s.delta << ": " << to_string(s.status) << ", mask "
        << s.mask_size << ", |u^eps - u| " << s.sup_distance_lattice << "\n";
  }
  out << "verdict: " << to_string(r.verdict) << " (" << r.reason << ")\n";
  return exit_code(r.verdict);
}

int corollary_b_cmd(const CommonFlags& f, std::ostream& out) {
  const Input in = load(f);
  const CorollaryBResult r = corollary_b_approximants(in.u, in.config);
  const fs::path dir = prepare_output(in.config);
  write_text_file(dir / "corollary_b.json", to_json(r, in.config));
  for (std::size_t k = 0; k < r.approximants.size(); ++k) {
    write_field_dump(r.approximants[k], dir, "approximant_" + std::to_string(k));
  }
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const ApproximantRecord& row = r.rows[k];
    out << "eps " << row.eps << " delta " << row.delta << ": error " << row.sup_error << ", v-test "
        << to_string(row.vconvex.verdict) << ", h-test " << to_string(row.hconvex.verdict) << "\n";
  }
  out << "verdict: " << to_string(r.verdict) << " (" << r.reason << ")\n";
  return exit_code(r.verdict);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Carnot-group regularization and convexity verification"};
  app.require_subcommand(1);

  std::string spec;
  std::string check_out;
  auto* check = app.add_subcommand("group-check", "validate a group spec and spot-check its group law");
  check->add_option("spec", spec, "preset name or spec-file path")->required();
  check->add_option("--out", check_out, "output directory for group_check.json");

  CommonFlags flags;
  auto* sc = app.add_subcommand("supconv", "one sup-convolution at the first eps; dumps the field");
  auto* mo = app.add_subcommand("mollify", "one group mollification at the first delta; dumps the field");
  auto* th = app.add_subcommand("test-hconvex", "midpoint h-convexity test of the input field");
  auto* tv = app.add_subcommand("test-vconvex", "pointwise horizontal-Hessian test of the input field");
  auto* ta = app.add_subcommand("verify-theorem-a", "regularize and test along the eps schedule");
  auto* cb = app.add_subcommand("approx-corollary-b", "smooth approximants with errors on an inner subdomain");
  for (auto* s : {sc, mo, th, tv}) add_common(*s, flags, false);
  for (auto* s : {ta, cb}) add_common(*s, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; anything else is a usage error.
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (check->parsed()) return group_check(spec, check_out, out);
    if (sc->parsed()) return supconv(flags, out);
    if (mo->parsed()) return mollify_cmd(flags, out);
    if (th->parsed()) return convexity_cmd(flags, true, out);
    if (tv->parsed()) return convexity_cmd(flags, false, out);
    if (ta->parsed()) return theorem_a_cmd(flags, out);
    if (cb->parsed()) return corollary_b_cmd(flags, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace carnot::cli
