// Copyright 2026 The plastiq Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "plastiq/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "plastiq/analytic.hpp"
#include "plastiq/characteristics.hpp"
#include "plastiq/classify.hpp"
#include "plastiq/energy.hpp"
#include "plastiq/io.hpp"

namespace plastiq {

using nlohmann::json;

const std::vector<std::string> kAnalyses{"classify", "trace",   "fans",     "levels",
                                         "audit",    "compare", "uniqueness-probe", "safe-load"};

bool RunConfig::wants(const std::string& analysis) const {
  return std::find(analyses.begin(), analyses.end(), analysis) != analyses.end();
}

double SegmentTable::at(double s) const {
  if (points.size() == 1) return points.front().second;
  if (s <= points.front().first) return points.front().second;
  if (s >= points.back().first) return points.back().second;
  auto hi = std::upper_bound(points.begin(), points.end(), s, [](double v, const auto& p) { return v < p.first; });
  auto lo = hi - 1;
  const double t = (s - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

namespace {

json leaf(const char* type, json def, const char* doc) { return {{"type", type}, {"default", def}, {"doc", doc}}; }

}  // namespace

json config_schema() {
  const SolverConfig sc;
  const RunConfig rc;
  const DomainSpec ds;
  return {
      {"domain",
       {{"kind", leaf("string", "rectangle", "rectangle | disk | annulus | half_disk | fan_sector | triangle")},
        {"width", leaf("number", ds.width, "rectangle width")},
        {"height", leaf("number", ds.height, "rectangle height")},
        {"radius", leaf("number", ds.radius, "disk, half_disk and fan_sector radius")},
        {"inner", leaf("number", ds.inner, "annulus inner radius")},
        {"outer", leaf("number", ds.outer, "annulus outer radius")},
        {"angle", leaf("number", ds.angle, "fan_sector opening from the +x axis")},
        {"corners", leaf("array", json::array({{0, 0}, {1, 0}, {0, 1}}), "triangle corners [[x,y],[x,y],[x,y]]")},
        {"radial_breaks", leaf("array", json::array(), "radii kept as mesh rings")},
        {"edge_length", leaf("number", ds.edge_length, "target edge length h")}}},
      {"oracle",
       {{"name", leaf("string", "", "macclintock | annulus | monotone_fan | triangle_sigma; empty for none")},
        {"params", leaf("array", json::array(), "oracle parameters; empty for the worked-example defaults")}}},
      {"boundary",
       {{"source", leaf("string", "segments", "segments | oracle")},
        {"segments",
         leaf("array", json::array(),
              "[{segment, kind: dirichlet|neumann, w, g}]; w and g are numbers or [[s, value], ...] tables "
              "in arc length along the segment; g defaults to 0")}}},
      {"fields", leaf("string", rc.fields, "solve | oracle (sample the oracle instead of solving)")},
      {"solver",
       {{"max_iter", leaf("integer", sc.max_iter, "iteration cap")},
        {"tol", leaf("number", sc.tol, "stopping tolerance")},
        {"theta", leaf("number", sc.theta, "primal extrapolation in [0, 1]")},
        {"step_ratio", leaf("number", sc.step_ratio, "tau_dual / tau_primal = step_ratio^2")},
        {"trace_step_scale", leaf("number", sc.trace_step_scale, "multiplier step scale; 0 picks 4 / mesh size")},
        {"init", leaf("string", "zeros", "zeros | random")},
        {"seed", leaf("integer", sc.seed, "random initialisation seed")},
        {"window", leaf("integer", sc.window, "energy-change window in iterations")},
        {"check_every", leaf("integer", sc.check_every, "residual check period")},
        {"workers", leaf("integer", sc.workers, "worker threads")}}},
      {"classify",
       {{"eps_sat", leaf("number", rc.eps_sat, "plastic iff |sigma| >= 1 - eps_sat")},
        {"char_eps", leaf("number", rc.char_eps, "characteristic boundary tolerance")},
        {"convex_threshold", leaf("number", rc.convex_threshold, "hull deficit bound for convexity")}}},
      {"trace",
       {{"seeds", leaf("string", rc.seeds, "grid | interface")},
        {"grid", leaf("integer", rc.seed_grid, "seeds per side of the bounding box")},
        {"step_h", leaf("number", rc.step_h, "RK4 step in units of h")},
        {"max_length", leaf("number", rc.max_length, "arc length cap; 0 picks 4 bounding-box diagonals")},
        {"on_tol_h", leaf("number", rc.on_tol_h, "on-interface band for crossings, units of h")},
        {"exclude_h", leaf("number", rc.exclude_h, "constancy exclusion radius around singular points, units of h")},
        {"constancy_tol_h", leaf("number", rc.constancy_tol_h, "constancy and level-angle bound, units of h")}}},
      {"levels", {{"count", leaf("integer", rc.levels, "number of u levels for level-set alignment")}}},
      {"uniqueness",
       {{"seeds", leaf("array", rc.probe_seeds, "random-start seeds, one run each")},
        {"step_ratios", leaf("array", rc.probe_step_ratios, "step_ratio per run")},
        {"tol_factor", leaf("number", rc.probe_tol_factor, "distances must stay below tol_factor * tol")}}},
      {"analyses", leaf("array", json::array(), "subset of classify, trace, fans, levels, audit, compare, "
                                                "uniqueness-probe, safe-load")},
      {"assertions",
       {{"u_rel_l2", leaf("number", nullptr, "bound on the u error against the oracle")},
        {"sigma_rel_l2", leaf("number", nullptr, "bound on the sigma error against the oracle")},
        {"kkt_max", leaf("number", nullptr, "bound on every kkt residual of the final fields")},
        {"char_components_max", leaf("integer", nullptr, "bound on characteristic boundary components")},
        {"fans", leaf("integer", nullptr, "exact number of detected fans")},
        {"no_loops", leaf("boolean", false, "no loops among plastic-touching characteristics")},
        {"uniqueness", leaf("boolean", false, "uniqueness probe distances within bounds")},
        {"constancy", leaf("boolean", false, "constancy along plastic sub-arcs within bounds")}}},
      {"output", {{"dir", leaf("string", rc.out, "artifact directory (created if needed)")}}}};
}

namespace {

// Key check against the schema, so typos fail loudly.
void check_keys(const json& j, const json& schema, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError(p + ": unknown field");
    const json& s = schema.at(it.key());
    if (!s.contains("type")) check_keys(it.value(), s, p);
  }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& path, T def) {
  if (!j.contains(key) || j.at(key).is_null()) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

double positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field + ": must be positive");
  return v;
}

SegmentTable parse_table(const json& j, const std::string& path) {
  SegmentTable t;
  if (j.is_number()) {
    t.points.push_back({0.0, j.get<double>()});
    return t;
  }
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a number or [[s, value], ...]");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& r = j[i];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
      throw ConfigError(path + "[" + std::to_string(i) + "]: expected [s, value]");
    t.points.push_back({r[0].get<double>(), r[1].get<double>()});
    if (i > 0 && !(t.points[i].first > t.points[i - 1].first))
      throw ConfigError(path + "[" + std::to_string(i) + "]: arc lengths must increase");
  }
  return t;
}

DomainSpec parse_domain(const json& d) {
  const std::string kind = get<std::string>(d, "kind", "domain", "rectangle");
  const double h = positive(get<double>(d, "edge_length", "domain", DomainSpec{}.edge_length), "domain.edge_length");
  DomainSpec s;
  if (kind == "rectangle") {
    s = DomainSpec::rectangle(get<double>(d, "width", "domain", 1.0), get<double>(d, "height", "domain", 1.0), h);
  } else if (kind == "disk") {
    s = DomainSpec::disk(get<double>(d, "radius", "domain", 1.0), h);
  } else if (kind == "annulus") {
    s = DomainSpec::annulus(get<double>(d, "inner", "domain", 1.0), get<double>(d, "outer", "domain", 2.0), h);
  } else if (kind == "half_disk") {
    s = DomainSpec::half_disk(get<double>(d, "radius", "domain", 1.0), h);
  } else if (kind == "fan_sector") {
    s = DomainSpec::fan_sector(get<double>(d, "radius", "domain", 1.0),
                               get<double>(d, "angle", "domain", std::numbers::pi / 2), h);
  } else if (kind == "triangle") {
    const auto c = get<std::vector<std::vector<double>>>(d, "corners", "domain", {{0, 0}, {1, 0}, {0, 1}});
    if (c.size() != 3 || std::any_of(c.begin(), c.end(), [](const auto& p) { return p.size() != 2; }))
      throw ConfigError("domain.corners: expected three [x, y] pairs");
    s = DomainSpec::triangle({c[0][0], c[0][1]}, {c[1][0], c[1][1]}, {c[2][0], c[2][1]}, h);
  } else {
    throw ConfigError("domain.kind: unknown domain '" + kind + "'");
  }
  s.radial_breaks = get<std::vector<double>>(d, "radial_breaks", "domain", s.radial_breaks);
  return s;
}

}  // namespace

RunConfig parse_config(const json& j) {
  const json schema = config_schema();
  check_keys(j, schema, "");
  RunConfig c;
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& { return j.contains(name) ? j.at(name) : empty; };

  if (j.contains("domain")) {
    c.domain = parse_domain(j.at("domain"));
    c.domain_given = j.at("domain").contains("kind");
  }
  const json& o = section("oracle");
  c.oracle = get<std::string>(o, "name", "oracle", "");
  c.oracle_params = get<std::vector<double>>(o, "params", "oracle", {});
  if (!c.oracle.empty()) {
    const auto names = oracle_names();
    if (std::find(names.begin(), names.end(), c.oracle) == names.end())
      throw ConfigError("oracle.name: unknown oracle '" + c.oracle + "'");
    try {
      make_oracle(c.oracle, c.oracle_params);
    } catch (const Error& e) {
      throw ConfigError(std::string("oracle.params: ") + e.what());
    }
  }

  const json& b = section("boundary");
  const std::string source = get<std::string>(b, "source", "boundary", "segments");
  if (source != "segments" && source != "oracle") throw ConfigError("boundary.source: expected segments or oracle");
  c.boundary_from_oracle = source == "oracle";
  if (c.boundary_from_oracle && c.oracle.empty()) throw ConfigError("boundary.source: oracle requested but oracle.name is empty");
  if (b.contains("segments")) {
    const json& segs = b.at("segments");
    if (!segs.is_array()) throw ConfigError("boundary.segments: expected an array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string p = "boundary.segments[" + std::to_string(i) + "]";
      const json& s = segs[i];
      if (!s.is_object() || !s.contains("segment")) throw ConfigError(p + ": needs a segment id");
      for (auto it = s.begin(); it != s.end(); ++it)
        if (it.key() != "segment" && it.key() != "kind" && it.key() != "w" && it.key() != "g")
          throw ConfigError(p + "." + it.key() + ": unknown field");
      SegmentConfig sc;
      sc.segment = get<int>(s, "segment", p, 0);
      try {
        sc.kind = boundary_kind_from_string(get<std::string>(s, "kind", p, "dirichlet"));
      } catch (const Error&) {
        throw ConfigError(p + ".kind: expected dirichlet or neumann");
      }
      if (s.contains("w")) sc.w = parse_table(s.at("w"), p + ".w");
      if (s.contains("g")) sc.g = parse_table(s.at("g"), p + ".g");
      if (sc.kind == BoundaryKind::Dirichlet && !sc.w)
        throw ConfigError(p + ": missing w on Dirichlet segment " + std::to_string(sc.segment));
      if (sc.kind == BoundaryKind::Dirichlet && sc.g)
        throw ConfigError(p + ": g given on Dirichlet segment " + std::to_string(sc.segment));
      if (sc.kind == BoundaryKind::Neumann && sc.w)
        throw ConfigError(p + ": w given on Neumann segment " + std::to_string(sc.segment));
      for (const auto& prev : c.segments)
        if (prev.segment == sc.segment) throw ConfigError(p + ": segment " + std::to_string(sc.segment) + " listed twice");
      c.segments.push_back(std::move(sc));
    }
  }
  if (!c.boundary_from_oracle && !c.domain_given && c.oracle.empty())
    throw ConfigError("domain.kind: a domain is required unless the oracle supplies it");

  c.fields = get<std::string>(j, "fields", "", c.fields);
  if (c.fields != "solve" && c.fields != "oracle") throw ConfigError("fields: expected solve or oracle");
  if (c.fields == "oracle" && c.oracle.empty()) throw ConfigError("fields: oracle sampling needs oracle.name");

  const json& s = section("solver");
  c.solver.max_iter = get<int>(s, "max_iter", "solver", c.solver.max_iter);
  c.solver.tol = get<double>(s, "tol", "solver", c.solver.tol);
  c.solver.theta = get<double>(s, "theta", "solver", c.solver.theta);
  c.solver.step_ratio = get<double>(s, "step_ratio", "solver", c.solver.step_ratio);
  c.solver.trace_step_scale = get<double>(s, "trace_step_scale", "solver", c.solver.trace_step_scale);
  const std::string init = get<std::string>(s, "init", "solver", "zeros");
  if (init != "zeros" && init != "random") throw ConfigError("solver.init: expected zeros or random");
  c.solver.init = init == "random" ? SolverConfig::Init::Random : SolverConfig::Init::Zeros;
  c.solver.seed = get<std::uint64_t>(s, "seed", "solver", c.solver.seed);
  c.solver.window = get<int>(s, "window", "solver", c.solver.window);
  c.solver.check_every = get<int>(s, "check_every", "solver", c.solver.check_every);
  c.solver.workers = get<int>(s, "workers", "solver", c.solver.workers);
  try {
    c.solver.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }

  const json& cl = section("classify");
  c.eps_sat = get<double>(cl, "eps_sat", "classify", c.eps_sat);
  if (!(c.eps_sat > 0.0 && c.eps_sat < 0.5)) throw ConfigError("classify.eps_sat: must lie in (0, 0.5)");
  c.char_eps = positive(get<double>(cl, "char_eps", "classify", c.char_eps), "classify.char_eps");
  c.convex_threshold = positive(get<double>(cl, "convex_threshold", "classify", c.convex_threshold),
                                "classify.convex_threshold");

  const json& t = section("trace");
  c.seeds = get<std::string>(t, "seeds", "trace", c.seeds);
  if (c.seeds != "grid" && c.seeds != "interface") throw ConfigError("trace.seeds: expected grid or interface");
  c.seed_grid = get<int>(t, "grid", "trace", c.seed_grid);
  if (c.seed_grid < 1) throw ConfigError("trace.grid: must be at least 1");
  c.step_h = positive(get<double>(t, "step_h", "trace", c.step_h), "trace.step_h");
  if (c.step_h > 0.5) throw ConfigError("trace.step_h: must not exceed 0.5");
  c.max_length = get<double>(t, "max_length", "trace", c.max_length);
  if (c.max_length < 0.0) throw ConfigError("trace.max_length: must not be negative");
  c.on_tol_h = positive(get<double>(t, "on_tol_h", "trace", c.on_tol_h), "trace.on_tol_h");
  c.exclude_h = get<double>(t, "exclude_h", "trace", c.exclude_h);
  c.constancy_tol_h = positive(get<double>(t, "constancy_tol_h", "trace", c.constancy_tol_h), "trace.constancy_tol_h");
  c.levels = get<int>(section("levels"), "count", "levels", c.levels);
  if (c.levels < 1) throw ConfigError("levels.count: must be at least 1");

  const json& u = section("uniqueness");
  c.probe_seeds = get<std::vector<std::uint64_t>>(u, "seeds", "uniqueness", c.probe_seeds);
  c.probe_step_ratios = get<std::vector<double>>(u, "step_ratios", "uniqueness", c.probe_step_ratios);
  c.probe_tol_factor = positive(get<double>(u, "tol_factor", "uniqueness", c.probe_tol_factor), "uniqueness.tol_factor");
  if (c.probe_seeds.size() != c.probe_step_ratios.size() || c.probe_seeds.size() < 2)
    throw ConfigError("uniqueness: seeds and step_ratios need the same length, at least 2");

  c.analyses = get<std::vector<std::string>>(j, "analyses", "", {});
  for (const auto& a : c.analyses)
    if (std::find(kAnalyses.begin(), kAnalyses.end(), a) == kAnalyses.end())
      throw ConfigError("analyses: unknown analysis '" + a + "'");
  if (c.wants("compare") && c.oracle.empty()) throw ConfigError("analyses: compare needs oracle.name");

  const json& as = section("assertions");
  c.assert_u_rel_l2 = get<double>(as, "u_rel_l2", "assertions", -1.0);
  c.assert_sigma_rel_l2 = get<double>(as, "sigma_rel_l2", "assertions", -1.0);
  c.assert_kkt_max = get<double>(as, "kkt_max", "assertions", -1.0);
  c.assert_char_components_max = get<int>(as, "char_components_max", "assertions", -1);
  c.assert_fans = get<int>(as, "fans", "assertions", -1);
  c.assert_no_loops = get<bool>(as, "no_loops", "assertions", false);
  c.assert_uniqueness = get<bool>(as, "uniqueness", "assertions", false);
  c.assert_constancy = get<bool>(as, "constancy", "assertions", false);
  if ((c.assert_u_rel_l2 >= 0 || c.assert_sigma_rel_l2 >= 0) && !c.wants("compare"))
    throw ConfigError("assertions: error bounds need the compare analysis");
  if (c.assert_uniqueness && !c.wants("uniqueness-probe"))
    throw ConfigError("assertions.uniqueness: needs the uniqueness-probe analysis");

  c.out = get<std::string>(section("output"), "dir", "output", c.out);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

namespace {

struct Problem {
  TriMesh mesh;
  BoundaryData bdata;
};

Problem build_problem(const RunConfig& c, const AnalyticSolution* oracle) {
  if (c.boundary_from_oracle) {
    const double h = c.domain.edge_length;
    TriMesh mesh = oracle->mesh(h);
    if (c.domain_given && c.domain.name() != oracle->domain_spec.name())
      throw ConfigError("domain.kind: '" + c.domain.name() + "' does not match the oracle domain '" +
                        oracle->domain_spec.name() + "'");
    BoundaryData bd = oracle->has_u() || oracle->w ? oracle->boundary_data(mesh) : BoundaryData::zeros(mesh);
    return {std::move(mesh), std::move(bd)};
  }
  const DomainSpec spec = c.domain_given ? c.domain : oracle->domain_spec;
  DomainSpec sized = spec;
  sized.edge_length = c.domain.edge_length;
  const TriMesh raw = build_domain(sized);
  auto find = [&](int seg) -> const SegmentConfig* {
    for (const auto& s : c.segments)
      if (s.segment == seg) return &s;
    return nullptr;
  };
  for (int seg : raw.segment_ids())
    if (!find(seg)) throw ConfigError("boundary.segments: missing w on Dirichlet segment " + std::to_string(seg));
  std::set<int> ids;
  for (int seg : raw.segment_ids()) ids.insert(seg);
  for (const auto& s : c.segments)
    if (!ids.count(s.segment))
      throw ConfigError("boundary.segments: segment " + std::to_string(s.segment) + " does not exist on " + spec.name());
  TriMesh mesh = raw.with_boundary_kinds([&](int e) { return find(raw.boundary_edge(e).segment)->kind; });
  BoundaryData bd = BoundaryData::zeros(mesh);
  for (int e = 0; e < mesh.num_boundary_edges(); ++e) {
    const SegmentConfig& s = *find(mesh.boundary_edge(e).segment);
    const auto ab = mesh.boundary_arclength(e);
    const double mid = 0.5 * (ab[0] + ab[1]);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (s.kind == BoundaryKind::Dirichlet) {
      bd.w[e] = s.w->at(mid);
      bd.g[e] = nan;
    } else {
      bd.w[e] = nan;
      bd.g[e] = s.g ? s.g->at(mid) : 0.0;
    }
  }
  bd.validate(mesh);
  return {std::move(mesh), std::move(bd)};
}

json mesh_json(const TriMesh& m) {
  return {{"vertices", m.num_vertices()},
          {"triangles", m.num_triangles()},
          {"boundary_edges", m.num_boundary_edges()},
          {"mesh_size", m.mesh_size()},
          {"max_edge", m.max_edge_length()}};
}

struct Assertions {
  json list = json::array();
  std::vector<std::string> failures;

  void add(const std::string& name, double value, double limit, bool ok) {
    list.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"passed", ok}});
    if (!ok) failures.push_back(name);
  }
};

std::vector<Vec2> interface_seeds(const RegionMap& map, double spacing) {
  std::vector<Vec2> out;
  for (const auto& poly : map.sigma_interface) {
    double carry = 0.5 * spacing;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
      const double len = distance(poly[i], poly[i + 1]);
      double s = carry;
      for (; s < len; s += spacing) out.push_back(poly[i] + (s / len) * (poly[i + 1] - poly[i]));
      carry = s - len;
    }
  }
  return out;
}

}  // namespace

RunResult run_pipeline(const RunConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<AnalyticSolution> oracle;
  if (!c.oracle.empty()) oracle = make_oracle(c.oracle, c.oracle_params);
  if (!c.domain_given && !oracle) throw ConfigError("domain.kind: a domain is required");
  const Problem pb = build_problem(c, oracle ? &*oracle : nullptr);
  const TriMesh& mesh = pb.mesh;
  const BoundaryData& bd = pb.bdata;
  std::filesystem::create_directories(c.out);

  RunResult res;
  json& rep = res.report;
  Assertions as;
  rep["mesh"] = mesh_json(mesh);
  rep["fields"] = c.fields;
  rep["oracle"] = c.oracle;

  std::vector<double> u;
  std::vector<Vec2> sigma;
  PlasticStrain p;
  std::vector<double> lambda;
  bool converged = true;
  if (c.fields == "solve") {
    SolverConfig sc = c.solver;
    Solution sol = solve(mesh, bd, sc);
    converged = sol.report.converged;
    rep["solve"] = to_json(sol.report);
    res.wall_seconds = sol.report.wall_seconds;
    u = std::move(sol.u);
    sigma = std::move(sol.sigma);
    p = std::move(sol.p);
    lambda = std::move(sol.lambda);
  } else {
    sigma = oracle->sample_sigma(mesh);
    if (oracle->has_u()) {
      u = oracle->sample_u(mesh);
      p = extract_plastic_strain(u, sigma, mesh, bd);
    }
    rep["solve"] = nullptr;
  }
  if (!u.empty()) {
    const ResidualRecord kkt = kkt_residuals(u, sigma, p, mesh, bd);
    rep["kkt"] = to_json(kkt);
    if (c.assert_kkt_max >= 0) as.add("kkt_max", kkt.max(), c.assert_kkt_max, kkt.max() <= c.assert_kkt_max);
  }

  write_vertices_csv(std::filesystem::path(c.out) / "vertices.csv", mesh, u);
  write_boundary_csv(std::filesystem::path(c.out) / "boundary.csv", mesh, bd, lambda, p.boundary);

  const bool need_map = c.wants("classify") || c.wants("trace") || c.wants("fans") || c.wants("levels") ||
                        c.wants("audit") || c.assert_char_components_max >= 0;
  std::optional<RegionMap> map;
  if (need_map) {
    map = analyze_regions(sigma, mesh, c.eps_sat, c.char_eps, c.convex_threshold);
    rep["regions"] = to_json(*map, mesh);
    write_interface_csv(std::filesystem::path(c.out) / "interface.csv", *map);
    write_char_boundary_csv(std::filesystem::path(c.out) / "char_boundary.csv", *map);
    if (!u.empty()) {
      const ElasticDiagnostics d = elastic_diagnostics(u, sigma, *map, mesh);
      rep["elastic"] = {{"max_sigma_minus_grad", d.max_sigma_minus_grad},
                        {"max_laplacian", d.max_laplacian},
                        {"max_grad", d.max_grad},
                        {"bound", d.bound},
                        {"elastic_cells", d.elastic_cells},
                        {"passes", d.passes}};
    }
    if (c.assert_char_components_max >= 0)
      as.add("char_components_max", map->char_boundary.components, c.assert_char_components_max,
             map->char_boundary.components <= c.assert_char_components_max);
  }
  const std::span<const Region> labels = map ? std::span<const Region>(map->label) : std::span<const Region>{};
  write_cells_csv(std::filesystem::path(c.out) / "cells.csv", mesh, sigma, p.interior, labels);
  write_vtk(std::filesystem::path(c.out) / "fields.vtk", mesh, u, sigma, labels);

  const double h = mesh.mesh_size();
  if (c.wants("trace") || c.wants("audit")) {
    const std::vector<Vec2> marks = oracle ? oracle->singular_points : std::vector<Vec2>{};
    const SigmaInterpolant interp(mesh, sigma, marks);
    const TraceField field = make_field(interp, u);
    const RegionQuery query = make_query(*map, interp.locator());
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi = -lo;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      lo = {std::min(lo.x, mesh.vertex(v).x), std::min(lo.y, mesh.vertex(v).y)};
      hi = {std::max(hi.x, mesh.vertex(v).x), std::max(hi.y, mesh.vertex(v).y)};
    }
    const double step = c.step_h * h;
    const double max_length = c.max_length > 0.0 ? c.max_length : 4.0 * distance(lo, hi);
    std::vector<Vec2> seeds = c.seeds == "grid" ? seed_grid(field, lo, hi, c.seed_grid, 2.0 * step)
                                                : interface_seeds(*map, 4.0 * h);
    std::vector<Characteristic> traces;
    const LoopAudit audit = no_loop_audit(field, seeds, query, step, max_length, &traces);
    write_characteristics_csv(std::filesystem::path(c.out) / "characteristics.csv", traces);
    double straight = 0.0, sconst = 0.0, uconst = 0.0;
    int arcs = 0;
    std::array<int, 4> crossings{};
    for (const auto& tr : traces) {
      const ConstancyRecord r = straightness_and_constancy(tr, query, marks, c.exclude_h * h);
      arcs += static_cast<int>(r.arcs.size());
      straight = std::max(straight, r.max_straightness);
      sconst = std::max(sconst, r.max_sigma_constancy);
      uconst = std::max(uconst, r.max_u_constancy);
      for (const auto& e : crossing_analysis(tr, query, c.on_tol_h * h)) ++crossings[static_cast<int>(e.kind)];
    }
    json cr;
    for (int k = 0; k < 4; ++k) cr[to_string(static_cast<CrossingKind>(k))] = crossings[k];
    const double tol = c.constancy_tol_h * h;
    rep["trace"] = {{"seeds", seeds.size()},
                    {"traces", traces.size()},
                    {"step", step},
                    {"plastic_arcs", arcs},
                    {"max_straightness", straight},
                    {"max_sigma_constancy", sconst},
                    {"max_u_constancy", uconst},
                    {"tolerance", tol},
                    {"crossings", cr}};
    rep["audit"] = to_json(audit);
    if (c.assert_no_loops)
      as.add("no_loops", audit.plastic_touching_loops, 0, audit.passes());
    if (c.assert_constancy) {
      const double worst = std::max({straight, sconst, uconst});
      as.add("constancy", worst, tol, worst <= tol);
    }
  }
  if (c.wants("fans")) {
    const FanReport fr = map->plastic_count() > 0 ? detect_fans(*map, sigma, mesh) : FanReport{{}, 0, h};
    rep["fans"] = to_json(fr);
    if (c.assert_fans >= 0)
      as.add("fans", static_cast<double>(fr.fans.size()), c.assert_fans,
             static_cast<int>(fr.fans.size()) == c.assert_fans);
  }
  if (c.wants("levels")) {
    json levels = json::array();
    if (!u.empty()) {
      double umin = std::numeric_limits<double>::infinity(), umax = -umin;
      for (int t = 0; t < mesh.num_triangles(); ++t)
        if (map->label[t] == Region::Plastic)
          for (int v : mesh.triangle(t)) {
            umin = std::min(umin, u[v]);
            umax = std::max(umax, u[v]);
          }
      for (int k = 1; k <= c.levels && umin < umax; ++k) {
        const double level = umin + (umax - umin) * k / (c.levels + 1.0);
        const LevelSetRecord r = level_set_alignment(u, level, *map, sigma, mesh);
        if (!r.in_range) {
          levels.push_back({{"level", level}, {"outcome", "level out of range"}});
          continue;
        }
        levels.push_back({{"level", level},
                          {"outcome", "ok"},
                          {"points", r.points},
                          {"rms", r.rms},
                          {"angle", r.angle},
                          {"midpoint", {r.midpoint.x, r.midpoint.y}}});
      }
    }
    rep["levels"] = levels;
  }
  if (c.wants("compare")) {
    const CompareResult cr = compare(*oracle, u.empty() ? std::vector<double>(mesh.num_vertices(), 0.0) : u, sigma,
                                     mesh, labels);
    rep["compare"] = to_json(cr);
    if (c.assert_u_rel_l2 >= 0) as.add("u_rel_l2", cr.u_rel_l2, c.assert_u_rel_l2, cr.u_rel_l2 <= c.assert_u_rel_l2);
    if (c.assert_sigma_rel_l2 >= 0)
      as.add("sigma_rel_l2", cr.sigma_rel_l2, c.assert_sigma_rel_l2, cr.sigma_rel_l2 <= c.assert_sigma_rel_l2);
  }
  if (c.wants("uniqueness-probe")) {
    std::vector<SolverConfig> cfgs;
    for (std::size_t i = 0; i < c.probe_seeds.size(); ++i) {
      SolverConfig sc = c.solver;
      sc.init = SolverConfig::Init::Random;
      sc.seed = c.probe_seeds[i];
      sc.step_ratio = c.probe_step_ratios[i];
      cfgs.push_back(sc);
    }
    const UniquenessReport ur = uniqueness_probe(mesh, bd, cfgs);
    rep["uniqueness"] = to_json(ur);
    const double tol = c.probe_tol_factor * c.solver.tol;
    double area = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) area += mesh.area(t);
    rep["uniqueness"]["sigma_bound"] = tol;
    rep["uniqueness"]["u_bound"] = tol * area;
    if (c.assert_uniqueness) {
      as.add("uniqueness_sigma_l2", ur.max_sigma_l2, tol, ur.max_sigma_l2 <= tol);
      if (ur.pure_dirichlet) as.add("uniqueness_u_l1", ur.max_u_l1, tol * area, ur.max_u_l1 <= tol * area);
    }
  }
  if (c.wants("safe-load")) {
    bool has_neumann = false;
    for (const auto& be : mesh.boundary_edges()) has_neumann = has_neumann || be.kind == BoundaryKind::Neumann;
    json sl;
    if (!has_neumann) {
      sl = {{"status", "not-needed"}};
    } else if (bd.max_abs_g() == 0.0) {
      sl = {{"status", "trivial"}};
    } else {
      // the computed stress is the only certificate at hand; it proves the
      // condition when it stays strictly inside the ball
      double alpha = 0.0;
      for (const Vec2& s : sigma) alpha = std::max(alpha, norm(s));
      const SafeLoadReport r = verify_safe_load(sigma, bd, std::min(alpha, 1.0), mesh, 10.0 * c.solver.tol);
      sl = {{"status", r.passes && alpha < 1.0 ? "verified" : "unverified"},
            {"alpha", alpha},
            {"max_div_residual", r.max_div_residual},
            {"max_trace_residual", r.max_trace_residual}};
    }
    rep["safe_load"] = sl;
  }

  rep["assertions"] = as.list;
  rep["passed"] = as.failures.empty();
  rep["converged"] = converged;
  res.failures = as.failures;
  res.exit_code = !converged ? 2 : (as.failures.empty() ? 0 : 3);
  write_json(std::filesystem::path(c.out) / "report.json", rep);
  if (res.wall_seconds == 0.0)
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace plastiq
