#include "carnot/pipeline.hpp"

#include "carnot/error.hpp"
#include "carnot/format.hpp"
#include "carnot/io.hpp"
#include "carnot/testfn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace carnot {

namespace {

using json = nlohmann::ordered_json;

template <typename T>
std::vector<T> read_list(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

json report_json(const VerificationReport& r) { return json::parse(to_json(r)); }

bool strictly_decreasing_positive(const std::vector<double>& xs) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !std::isfinite(xs[i])) return false;
    if (i > 0 && !(xs[i] < xs[i - 1])) return false;
  }
  return true;
}

double max_abs_difference(const GridField& a, const GridField& b, const InnerDomainMask* mask) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    d = std::max(d, std::abs(a.value(i) - b.value(i)));
  }
  return d;
}

// Offsets whose interpolation stencil leaves the mask are out of domain.
Evaluable restricted_to_mask(const GridField& field, const InnerDomainMask& mask) {
  auto shared = std::make_shared<const GridField>(field);
  return Evaluable::from_field(shared).restricted(
      [shared, inside = mask.inside](const GroupPoint& p) { return shared->supported_by(inside, p); },
      shared->metadata().count("source") ? shared->metadata().at("source") : "field");
}

Grid coarse_grid(const Grid& grid, int per_axis) {
  std::vector<int> res = grid.resolution();
  for (int& r : res) r = std::min(r, per_axis);
  return Grid(grid.domain(), res);
}

}  // namespace

void PipelineConfig::validate() const {
  if (group.empty()) throw ConfigError("config: 'group' is empty");
  if (source.empty() && field.empty()) throw ConfigError("config: need 'source' or 'field'");
  if (resolution.empty()) throw ConfigError("config: 'resolution' is empty");
  for (int r : resolution) {
    if (r < 5) throw ConfigError("config: resolution must be >= 5 per axis, got " + std::to_string(r));
  }
  if (eps_schedule.empty() || !strictly_decreasing_positive(eps_schedule)) {
    throw ConfigError("config: 'eps_schedule' must be nonempty, positive and strictly decreasing");
  }
  if (!delta_schedule.empty()) {
    if (delta_schedule.size() != eps_schedule.size()) {
      throw ConfigError("config: 'delta_schedule' must match 'eps_schedule' in length");
    }
    if (!strictly_decreasing_positive(delta_schedule)) {
      throw ConfigError("config: 'delta_schedule' must be positive and strictly decreasing");
    }
  }
  if (stencil_h && !(*stencil_h > 0.0)) throw ConfigError("config: 'stencil_h' must be positive");
  for (double r : radii) {
    if (!(r > 0.0)) throw ConfigError("config: 'radii' must be positive");
  }
  if (tol_vconvex && !(*tol_vconvex >= 0.0)) throw ConfigError("config: tolerances must be >= 0");
  if (tol_hconvex && !(*tol_hconvex >= 0.0)) throw ConfigError("config: tolerances must be >= 0");
  if (inner_margin && !(*inner_margin >= 0.0)) throw ConfigError("config: 'inner_margin' must be >= 0");
  if (lower.size() != upper.size()) throw ConfigError("config: domain lower/upper differ in length");
}

PipelineConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "group",      "domain",    "resolution", "source",     "field",   "eps_schedule",
      "delta_schedule", "stencil_h", "radii",   "directions", "tolerance", "mollifier_samples",
      "inner_margin", "output_dir", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  PipelineConfig c;
  try {
    if (j.contains("group")) c.group = j["group"].get<std::string>();
    if (j.contains("domain")) {
      const json& d = j["domain"];
      if (d.contains("half_width")) {
        c.lower = {-d["half_width"].get<double>()};
        c.upper = {d["half_width"].get<double>()};
      } else {
        c.lower = d.at("lower").get<std::vector<double>>();
        c.upper = d.at("upper").get<std::vector<double>>();
      }
    }
    if (j.contains("resolution")) c.resolution = read_list<int>(j, "resolution");
    if (j.contains("source")) c.source = j["source"].get<std::string>();
    if (j.contains("field")) c.field = j["field"].get<std::string>();
    if (j.contains("eps_schedule")) c.eps_schedule = read_list<double>(j, "eps_schedule");
    if (j.contains("delta_schedule")) c.delta_schedule = read_list<double>(j, "delta_schedule");
    if (j.contains("stencil_h")) c.stencil_h = j["stencil_h"].get<double>();
    if (j.contains("radii")) c.radii = read_list<double>(j, "radii");
    if (j.contains("directions")) c.directions = j["directions"].get<int>();
    if (j.contains("tolerance")) {
      const json& t = j["tolerance"];
      if (t.is_number()) {
        c.tol_vconvex = c.tol_hconvex = t.get<double>();
      } else {
        if (t.contains("vconvex")) c.tol_vconvex = t["vconvex"].get<double>();
        if (t.contains("hconvex")) c.tol_hconvex = t["hconvex"].get<double>();
      }
    }
    if (j.contains("mollifier_samples")) c.mollifier_samples = j["mollifier_samples"].get<int>();
    if (j.contains("inner_margin")) c.inner_margin = j["inner_margin"].get<double>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["group"] = c.group;
  if (!c.lower.empty()) j["domain"] = {{"lower", c.lower}, {"upper", c.upper}};
  j["resolution"] = c.resolution;
  if (!c.source.empty()) j["source"] = c.source;
  if (!c.field.empty()) j["field"] = c.field;
  j["eps_schedule"] = c.eps_schedule;
  if (!c.delta_schedule.empty()) j["delta_schedule"] = c.delta_schedule;
  if (c.stencil_h) j["stencil_h"] = *c.stencil_h;
  if (!c.radii.empty()) j["radii"] = c.radii;
  j["directions"] = c.directions;
  json tol = json::object();
  if (c.tol_vconvex) tol["vconvex"] = *c.tol_vconvex;
  if (c.tol_hconvex) tol["hconvex"] = *c.tol_hconvex;
  if (!tol.empty()) j["tolerance"] = tol;
  j["mollifier_samples"] = c.mollifier_samples;
  if (c.inner_margin) j["inner_margin"] = *c.inner_margin;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j.dump(2);
}

std::vector<double> default_midpoint_radii(const Grid& grid) {
  const double h = grid.max_spacing();
  return {h, 2.0 * h, 3.0 * h};
}

double default_delta(double eps, const Grid& grid) { return eps / 4.0 + 2.0 * grid.max_spacing(); }

double default_vconvex_tolerance(const Evaluable& f, const GridField& field, const InnerDomainMask& mask,
                                 double h) {
  const double scale = std::max(horizontal_curvature_scale(f, mask, h), field.sup_norm());
  return default_tolerance(field.grid(), h, scale);
}

double default_hconvex_tolerance(const GridField& field, const InnerDomainMask& mask) {
  return 2.0 * std::max(interpolation_error_bound(field, mask),
                        field.sup_norm() * interpolation_error_estimate(field.grid()));
}

PipelineSetup resolve_setup(const PipelineConfig& config) {
  config.validate();
  GroupPtr group;
  try {
    group = resolve_group(config.group);
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const int n = group->dim();
  Coords lower(n);
  Coords upper(n);
  if (config.lower.empty()) {
    lower.setConstant(-1.0);
    upper.setConstant(1.0);
  } else if (config.lower.size() == 1) {
    lower.setConstant(config.lower[0]);
    upper.setConstant(config.upper[0]);
  } else if (static_cast<int>(config.lower.size()) == n) {
    for (int a = 0; a < n; ++a) {
      lower[a] = config.lower[static_cast<std::size_t>(a)];
      upper[a] = config.upper[static_cast<std::size_t>(a)];
    }
  } else {
    throw ConfigError("config: domain bounds need 1 or " + std::to_string(n) + " entries");
  }
  std::vector<int> res = config.resolution;
  if (res.size() == 1) res.assign(static_cast<std::size_t>(n), res[0]);
  if (static_cast<int>(res.size()) != n) {
    throw ConfigError("config: resolution needs 1 or " + std::to_string(n) + " entries");
  }
  Grid grid(BoxDomain(group, lower, upper), res);

  PipelineSetup s{group, grid, config.eps_schedule, config.delta_schedule, 0.0, config.radii,
                  config.tol_vconvex, config.tol_hconvex};
  if (s.delta.empty()) {
    for (double e : s.eps) s.delta.push_back(default_delta(e, grid));
  }
  s.stencil_h = config.stencil_h ? *config.stencil_h : grid.max_spacing();
  if (s.radii.empty()) s.radii = default_midpoint_radii(grid);
  return s;
}

GridField load_input(const PipelineConfig& config, const PipelineSetup& setup) {
  if (!config.field.empty()) return read_field_dump(config.field);
  try {
    return sample(lookup_testfn(*setup.group, config.source), setup.grid);
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(e.what());
  }
}

double gauge_lipschitz_constant(const GridField& u) {
  const Grid& grid = u.grid();
  const CarnotGroup& g = grid.group();
  const int e = g.gauge_exponent();
  std::vector<GroupPoint> inverses;
  inverses.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) inverses.push_back(g.inverse(grid.node(i)));
  // max |du|^{2r!} / d^{2r!}; one root at the end.
  double best = 0.0;
  for (std::size_t xi = 0; xi < grid.size(); ++xi) {
    const GroupPoint x = grid.node(xi);
    for (std::size_t yi = xi + 1; yi < grid.size(); ++yi) {
      const double du = std::abs(u.value(xi) - u.value(yi));
      if (du == 0.0) continue;
      double num = 1.0;
      for (int k = 0; k < e; ++k) num *= du;
      const double den = g.gauge_power(g.multiply(x, inverses[yi]));
      best = std::max(best, num / den);
    }
  }
  return best == 0.0 ? 0.0 : std::pow(best, 1.0 / e);
}

namespace {

struct StageFields {
  GridField supconv;
  MollifyResult mollified;
  std::size_t examined;
  std::size_t skipped;
};

StageFields run_stage_fields(const GridField& u, double eps, double delta, int mollifier_samples) {
  SupConvResult sc = sup_convolution(u, SupConvParams::make(eps, u));
  MollifyResult mo{sc.field, InnerDomainMask{u.grid(), std::vector<std::uint8_t>(u.grid().size(), 0), 0.0}};
  try {
    mo = mollify(sc.field, MollifierSpec::make(u.group(), delta, mollifier_samples));
  } catch (const DegenerateInputError&) {
    // Support wider than the box: no node is testable at this stage.
  }
  return {std::move(sc.field), std::move(mo), sc.candidates_examined, sc.candidates_skipped};
}

}  // namespace

PipelineReport theorem_a_pipeline(const GridField& u, const PipelineConfig& config) {
  const PipelineSetup setup = resolve_setup(config);
  const Grid& grid = u.grid();
  PipelineReport report;
  report.group = grid.group().name();
  report.source = u.metadata().count("source") ? u.metadata().at("source") : "field";
  report.sup_norm = u.sup_norm();
  const double R0 = u.sup_norm();

  const BoundaryDistance distance(grid);
  const InnerDomainMask interior = distance.mask(0.0);
  report.c_omega_d = c_omega_d(coarse_grid(grid, 7), 1e-2 * grid.min_spacing());

  bool any_fail = false;
  bool any_inconclusive = false;
  for (std::size_t k = 0; k < setup.eps.size(); ++k) {
    StageRecord st;
    st.eps = setup.eps[k];
    st.delta = setup.delta[k];
    st.shrink = vconvexity_shrink(st.eps, R0, u.group().gauge_exponent()) + st.delta;
    StageFields sf = run_stage_fields(u, st.eps, st.delta, config.mollifier_samples);
    st.candidates_examined = sf.examined;
    st.candidates_skipped = sf.skipped;

    const InnerDomainMask vmask = shrunk_mask_for_vconvexity(distance, st.eps, R0);
    st.sup_distance_lattice = max_abs_difference(sf.supconv, u, nullptr);
    st.sup_distance_mask = vmask.empty() ? 0.0 : max_abs_difference(sf.supconv, u, &vmask);
    st.semiconvexity = semiconvexity_certificate(sf.supconv, interior, grid.min_spacing());
    st.semiconvexity_bound = report.c_omega_d / (2.0 * st.eps);

    const InnerDomainMask tmask = distance.mask(st.shrink).intersect(sf.mollified.valid);
    st.mask_size = tmask.count();
    if (tmask.empty()) {
      st.status = Verdict::inconclusive;
      any_inconclusive = true;
    } else {
      const Evaluable f = restricted_to_mask(sf.mollified.field, tmask);
      const double tol_v = setup.tol_vconvex
                               ? *setup.tol_vconvex
                               : default_vconvex_tolerance(f, sf.mollified.field, tmask, setup.stencil_h);
      const double tol_h =
          setup.tol_hconvex ? *setup.tol_hconvex : default_hconvex_tolerance(sf.mollified.field, tmask);
      try {
        st.vconvex = v_convex_pointwise_test(f, tmask, setup.stencil_h, tol_v);
        st.hconvex = h_convex_midpoint_test(
            f, tmask, {setup.radii, config.directions, config.seed, tol_h});
        st.status = st.hconvex->verdict;
      } catch (const DegenerateInputError&) {
        st.status = Verdict::inconclusive;
      }
      if (st.status == Verdict::inconclusive) any_inconclusive = true;
      if (st.status == Verdict::fail && !any_fail) {
        any_fail = true;
        report.reason = "h-convexity check failed at stage " + std::to_string(k) +
                        " (eps=" + format_double(st.eps) + ")";
      }
    }
    report.supconv_fields.push_back(std::move(sf.supconv));
    report.mollified_fields.push_back(std::move(sf.mollified.field));
    report.stages.push_back(std::move(st));
  }

  bool decays = true;
  for (std::size_t k = 1; k < report.stages.size(); ++k) {
    if (report.stages[k].sup_distance_lattice > report.stages[k - 1].sup_distance_lattice) decays = false;
  }
  if (any_fail) {
    report.verdict = Verdict::fail;
  } else if (any_inconclusive) {
    report.verdict = Verdict::inconclusive;
    report.reason = "a stage had no testable node or sample at this resolution";
  } else if (!decays) {
    report.verdict = Verdict::fail;
    report.reason = "sup distance |u^eps - u| did not decay along the eps schedule";
  } else {
    report.verdict = Verdict::pass;
    report.reason = "every stage passed the h-convexity check and |u^eps - u| decayed";
  }
  return report;
}

std::string to_json(const PipelineReport& r, const PipelineConfig& config) {
  json j;
  j["kind"] = "theorem_a_pipeline";
  j["config"] = json::parse(config_to_json(config));
  j["group"] = r.group;
  j["source"] = r.source;
  j["sup_norm"] = r.sup_norm;
  j["c_omega_d"] = r.c_omega_d;
  json stages = json::array();
  for (const StageRecord& s : r.stages) {
    json st;
    st["eps"] = s.eps;
    st["delta"] = s.delta;
    st["shrink"] = s.shrink;
    st["mask_size"] = s.mask_size;
    st["status"] = to_string(s.status);
    st["sup_distance_mask"] = s.sup_distance_mask;
    st["sup_distance_lattice"] = s.sup_distance_lattice;
    st["semiconvexity"] = s.semiconvexity;
    st["semiconvexity_bound"] = s.semiconvexity_bound;
    st["candidates_examined"] = s.candidates_examined;
    st["candidates_skipped"] = s.candidates_skipped;
    st["vconvex"] = s.vconvex ? report_json(*s.vconvex) : json(nullptr);
    st["hconvex"] = s.hconvex ? report_json(*s.hconvex) : json(nullptr);
    stages.push_back(st);
  }
  j["stages"] = stages;
  j["verdict"] = to_string(r.verdict);
  j["reason"] = r.reason;
  return j.dump(2) + "\n";
}

CorollaryBResult corollary_b_approximants(const GridField& u, const PipelineConfig& config) {
  const PipelineSetup setup = resolve_setup(config);
  const Grid& grid = u.grid();
  const double R0 = u.sup_norm();
  CorollaryBResult result;
  result.group = grid.group().name();
  result.source = u.metadata().count("source") ? u.metadata().at("source") : "field";
  result.sup_norm = R0;
  result.lipschitz = gauge_lipschitz_constant(u);
  result.margin = config.inner_margin ? *config.inner_margin
                                      : vconvexity_shrink(setup.eps.front(), R0, grid.group().gauge_exponent()) +
                                            setup.delta.front();

  const BoundaryDistance distance(grid);
  const InnerDomainMask sub = distance.mask(result.margin);
  result.subdomain_size = sub.count();
  if (sub.empty()) {
    result.verdict = Verdict::inconclusive;
    result.reason = "inner subdomain is empty at this resolution";
    return result;
  }
  const int e = grid.group().gauge_exponent();
  bool all_pass = true;
  for (std::size_t k = 0; k < setup.eps.size(); ++k) {
    StageFields sf = run_stage_fields(u, setup.eps[k], setup.delta[k], config.mollifier_samples);
    const InnerDomainMask mask = sub.intersect(sf.mollified.valid);
    if (mask.empty()) {
      result.verdict = Verdict::inconclusive;
      result.reason = "no testable node at stage " + std::to_string(k) + " at this resolution";
      return result;
    }
    const Evaluable f = restricted_to_mask(sf.mollified.field, mask);
    const double tol_v = setup.tol_vconvex
                             ? *setup.tol_vconvex
                             : default_vconvex_tolerance(f, sf.mollified.field, mask, setup.stencil_h);
    const double tol_h =
        setup.tol_hconvex ? *setup.tol_hconvex : default_hconvex_tolerance(sf.mollified.field, mask);
    ApproximantRecord row;
    row.eps = setup.eps[k];
    row.delta = setup.delta[k];
    row.sup_error = max_abs_difference(sf.mollified.field, u, &sub);
    row.supconv_error = max_abs_difference(sf.supconv, u, &sub);
    row.rate_bound = 2.0 * result.lipschitz * std::pow(4.0 * row.eps * R0, 1.0 / e);
    row.vconvex = v_convex_pointwise_test(f, mask, setup.stencil_h, tol_v);
    row.hconvex = h_convex_midpoint_test(f, mask, {setup.radii, config.directions, config.seed, tol_h});
    if (row.vconvex.verdict != Verdict::pass || row.hconvex.verdict != Verdict::pass) all_pass = false;
    result.rows.push_back(std::move(row));
    result.approximants.push_back(sf.mollified.field.with_metadata("corollary_b.stage", std::to_string(k)));
  }
  result.errors_nonincreasing = true;
  for (std::size_t k = 1; k < result.rows.size(); ++k) {
    if (result.rows[k].sup_error > result.rows[k - 1].sup_error + 1e-12) result.errors_nonincreasing = false;
  }
  if (!all_pass) {
    result.verdict = Verdict::fail;
    result.reason = "an approximant failed the v- or h-convexity check";
  } else if (!result.errors_nonincreasing) {
    result.verdict = Verdict::fail;
    result.reason = "approximation errors did not decrease along the schedule";
  } else {
    result.verdict = Verdict::pass;
    result.reason = "approximants are v- and h-convex and converge";
  }
  return result;
}

std::string to_json(const CorollaryBResult& r, const PipelineConfig& config) {
  json j;
  j["kind"] = "corollary_b_approximants";
  j["config"] = json::parse(config_to_json(config));
  j["group"] = r.group;
  j["source"] = r.source;
  j["sup_norm"] = r.sup_norm;
  j["lipschitz"] = r.lipschitz;
  j["margin"] = r.margin;
  j["subdomain_size"] = r.subdomain_size;
  json rows = json::array();
  for (const ApproximantRecord& a : r.rows) {
    json row;
    row["eps"] = a.eps;
    row["delta"] = a.delta;
    row["sup_error"] = a.sup_error;
    row["supconv_error"] = a.supconv_error;
    row["rate_bound"] = a.rate_bound;
    row["vconvex"] = report_json(a.vconvex);
    row["hconvex"] = report_json(a.hconvex);
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["errors_nonincreasing"] = r.errors_nonincreasing;
  j["verdict"] = to_string(r.verdict);
  j["reason"] = r.reason;
  return j.dump(2) + "\n";
}

}  // namespace carnot
