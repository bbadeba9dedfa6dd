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

#include "plastiq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plastiq/classify.hpp"

namespace plastiq {

ResidualRecord oracle_residuals(const AnalyticSolution& oracle, const TriMesh& mesh) {
  const std::vector<Vec2> sigma = oracle.sample_sigma(mesh);
  if (oracle.has_u()) {
    const BoundaryData bd = oracle.boundary_data(mesh);
    const std::vector<double> u = oracle.sample_u(mesh);
    return kkt_residuals(u, sigma, extract_plastic_strain(u, sigma, mesh, bd), mesh, bd);
  }
  // stress-only field: the zero displacement stands in, the flow rule is moot
  const BoundaryData bd = BoundaryData::zeros(mesh);
  const std::vector<double> u(mesh.num_vertices(), 0.0);
  const PlasticStrain p{std::vector<Vec2>(mesh.num_triangles()), std::vector<double>(mesh.num_boundary_edges(), 0.0)};
  ResidualRecord r = kkt_residuals(u, sigma, p, mesh, bd);
  r.flow_rule = r.dirichlet_flow_rule = std::numeric_limits<double>::quiet_NaN();
  return r;
}

double residual_by_index(const ResidualRecord& r, int k) {
  switch (k) {
    case 0: return r.div_interior;
    case 1: return r.neumann_trace;
    case 2: return r.ball_violation;
    case 3: return r.flow_rule;
    case 4: return r.dirichlet_flow_rule;
  }
  throw Error("residual_by_index: bad index");
}

bool RateStudy::all_pass() const {
  return std::all_of(passes.begin(), passes.end(), [](bool b) { return b; });
}

RateStudy kkt_rate_study(const AnalyticSolution& oracle, const std::vector<double>& hs, double min_ratio,
                         double floor) {
  if (hs.size() < 2) throw Error("kkt_rate_study: need at least two mesh sizes");
  RateStudy s;
  s.oracle = oracle.name;
  s.h = hs;
  for (double h : hs) s.records.push_back(oracle_residuals(oracle, oracle.mesh(h)));
  for (int k = 0; k < 5; ++k) {
    s.applicable[k] = !std::isnan(residual_by_index(s.records[0], k));
    bool ok = true;
    for (std::size_t i = 1; i < hs.size(); ++i) {
      const double a = residual_by_index(s.records[i - 1], k), b = residual_by_index(s.records[i], k);
      const double ratio = b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
      s.ratios[k].push_back(ratio);
      if (!s.applicable[k]) continue;
      ok = ok && (b <= floor || ratio >= min_ratio);
    }
    s.passes[k] = ok;
  }
  return s;
}

bool StructureReport::constancy_passes() const {
  return max_straightness <= tol && max_sigma_constancy <= tol && max_u_constancy <= tol;
}

bool StructureReport::levels_pass() const {
  if (level_records.empty()) return false;
  for (const auto& r : level_records)
    if (!r.in_range) return false;
  return max_level_angle <= tol;
}

StructureReport structure_suite(const AnalyticSolution& oracle, double h, const StructureOptions& opt) {
  const TriMesh mesh = oracle.mesh(h);
  const std::vector<Vec2> sigma = oracle.sample_sigma(mesh);
  const std::vector<double> u = oracle.has_u() ? oracle.sample_u(mesh) : std::vector<double>{};
  const RegionMap map = analyze_regions(sigma, mesh, opt.eps_sat);
  const double hh = mesh.mesh_size();
  StructureReport rep;
  rep.oracle = oracle.name;
  rep.h = hh;
  rep.tol = opt.tol_h * hh;

  const SigmaInterpolant interp(mesh, sigma, oracle.singular_points);
  const TraceField field = opt.exact ? make_field(oracle) : make_field(interp, u);
  const RegionQuery query = opt.exact ? make_query(oracle) : make_query(map, interp.locator());
  const double on_tol = opt.exact ? 1e-9 : opt.on_tol_h * hh;

  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = -lo;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2 p = mesh.vertex(v);
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double step = opt.step_h * hh;
  const double max_length = 4.0 * distance(lo, hi);
  const auto seeds = seed_grid(field, lo, hi, opt.seeds_per_side, 2.0 * step);
  std::vector<Characteristic> traces;
  rep.audit = no_loop_audit(field, seeds, query, step, max_length, &traces);

  for (const Characteristic& c : traces) {
    const ConstancyRecord r = straightness_and_constancy(c, query, field.discontinuities, opt.exclude_h * hh);
    rep.arcs += static_cast<int>(r.arcs.size());
    rep.max_straightness = std::max(rep.max_straightness, r.max_straightness);
    rep.max_sigma_constancy = std::max(rep.max_sigma_constancy, r.max_sigma_constancy);
    rep.max_u_constancy = std::max(rep.max_u_constancy, r.max_u_constancy);
    for (const CrossingEvent& e : crossing_analysis(c, query, on_tol)) ++rep.crossings[static_cast<int>(e.kind)];
  }

  if (!u.empty()) {
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    for (int t = 0; t < mesh.num_triangles(); ++t)
      if (map.label[t] == Region::Plastic)
        for (int v : mesh.triangle(t)) {
          umin = std::min(umin, u[v]);
          umax = std::max(umax, u[v]);
        }
    for (int k = 1; k <= opt.levels && umin < umax; ++k) {
      const double level = umin + (umax - umin) * k / (opt.levels + 1.0);
      rep.levels.push_back(level);
      rep.level_records.push_back(level_set_alignment(u, level, map, sigma, mesh));
      rep.max_level_angle = std::max(rep.max_level_angle, rep.level_records.back().angle);
    }
  }
  return rep;
}

}  // namespace plastiq
