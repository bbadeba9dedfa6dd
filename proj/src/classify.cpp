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

#include "plastiq/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace plastiq {

double RegionMap::plastic_area(const TriMesh& mesh) const {
  double a = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (label[t] == Region::Plastic) a += mesh.area(t);
  return a;
}

int RegionMap::plastic_count() const {
  return static_cast<int>(std::count(label.begin(), label.end(), Region::Plastic));
}

namespace {

bool plastic(const RegionMap& m, int t) { return t >= 0 && m.label[t] == Region::Plastic; }

// Outward unit normal of local edge k of triangle t.
Vec2 edge_normal(const TriMesh& mesh, int t, int k) { return -normalized(mesh.shape_gradients(t)[k]); }

void finish_map(RegionMap& m, const TriMesh& mesh) {
  const int nt = mesh.num_triangles();
  for (int t = 0; t < nt; ++t) {
    if (m.label[t] != Region::Plastic) continue;
    bool lonely = true;
    for (int n : mesh.neighbors(t)) lonely = lonely && !plastic(m, n);
    if (lonely) {
      m.label[t] = Region::Elastic;
      ++m.relabeled_isolated;
    }
  }
  m.empty_interior = true;
  for (int v = 0; v < mesh.num_vertices() && m.empty_interior; ++v) {
    if (mesh.is_boundary_vertex(v)) continue;
    bool all = true;
    for (int t : mesh.vertex_triangles(v)) all = all && m.label[t] == Region::Plastic;
    if (all) m.empty_interior = false;
  }
  const auto& edges = mesh.edges();
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    if (edges[e].on_boundary()) continue;
    if (m.label[edges[e].tri[0]] != m.label[edges[e].tri[1]]) m.interface_edges.push_back(e);
  }
  for (const auto& chain : chain_edges(m.interface_edges, mesh)) {
    std::vector<Vec2> poly;
    poly.reserve(chain.size());
    for (int v : chain) poly.push_back(mesh.vertex(v));
    m.sigma_interface.push_back(std::move(poly));
  }
}

// Straight walk from x in cell t along d through plastic cells. Returns the
// mesh edge where the walk leaves the plastic set and the exit cell/local edge.
struct Exit {
  int edge = -1;
  int cell = -1;
  int k = -1;
};

Exit walk(const RegionMap& m, const TriMesh& mesh, int t, Vec2 x, Vec2 d) {
  int entry = -1;
  for (int step = 0; step < mesh.num_triangles(); ++step) {
    const auto& tri = mesh.triangle(t);
    const auto& gr = mesh.shape_gradients(t);
    double best = std::numeric_limits<double>::infinity();
    int kbest = -1;
    for (int k = 0; k < 3; ++k) {
      if (mesh.triangle_edges(t)[k] == entry) continue;
      const double rate = dot(gr[k], d);
      if (rate >= 0.0) continue;
      const double lam = 1.0 + dot(gr[k], x - mesh.vertex(tri[k]));
      const double s = std::max(0.0, -lam / rate);
      if (s < best) {
        best = s;
        kbest = k;
      }
    }
    if (kbest < 0) return {};
    x += best * d;
    const int e = mesh.triangle_edges(t)[kbest];
    const int n = mesh.neighbors(t)[kbest];
    if (!plastic(m, n)) return {e, t, kbest};
    entry = e;
    t = n;
  }
  return {};
}

}  // namespace

RegionMap classify_regions(std::span<const Vec2> sigma, const TriMesh& mesh, double eps_sat) {
  if (sigma.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("classify_regions: sigma has wrong size");
  if (!(eps_sat > 0.0 && eps_sat < 0.5)) throw Error("classify_regions: eps_sat must lie in (0, 0.5)");
  std::vector<Region> labels(sigma.size());
  for (std::size_t t = 0; t < sigma.size(); ++t) {
    const double s = norm(sigma[t]);
    if (!(s <= 1.0 + 1e-6)) {
      std::ostringstream os;
      os << "classify_regions: |sigma| = " << s << " > 1 on triangle " << t;
      throw Error(os.str());
    }
    labels[t] = s >= 1.0 - eps_sat ? Region::Plastic : Region::Elastic;
  }
  return region_map_from_labels(std::move(labels), mesh, eps_sat);
}

RegionMap region_map_from_labels(std::vector<Region> labels, const TriMesh& mesh, double eps_sat) {
  if (labels.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("region_map_from_labels: labels have wrong size");
  RegionMap m;
  m.eps_sat = eps_sat;
  m.label = std::move(labels);
  for (Region& r : m.label)
    if (r == Region::Outside) throw Error("region_map_from_labels: cells must be Elastic or Plastic");
  finish_map(m, mesh);
  return m;
}

// The hull is taken over plastic centroids and the deficit is the elastic
// share of the cells whose centroid falls inside it. A vertex hull would
// charge the staircase along any discrete boundary, an O(h) bias.
ConvexityReport convexity_check(const RegionMap& map, const TriMesh& mesh, double threshold) {
  ConvexityReport r;
  r.threshold = threshold;
  std::vector<Vec2> pts;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (map.label[t] != Region::Plastic) continue;
    r.plastic_area += mesh.area(t);
    pts.push_back(mesh.centroid(t));
  }
  if (pts.empty()) return r;
  r.empty = false;
  const auto hull = convex_hull(std::move(pts));
  if (hull.size() < 3) {
    r.is_convex = true;
    return r;
  }
  const double scale = 1e-12 * (1.0 + std::abs(polygon_area(hull)));
  auto inside = [&](const Vec2& p) {
    for (std::size_t i = 0; i < hull.size(); ++i)
      if (orient(hull[i], hull[(i + 1) % hull.size()], p) < -scale) return false;
    return true;
  };
  double covered = 0.0, elastic = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!inside(mesh.centroid(t))) continue;
    covered += mesh.area(t);
    if (map.label[t] != Region::Plastic) elastic += mesh.area(t);
  }
  r.hull_area = covered;
  r.hull_area_deficit = covered > 0.0 ? elastic / covered : 0.0;
  r.is_convex = r.hull_area_deficit <= threshold;
  return r;
}

std::vector<std::vector<int>> chain_edges(std::span<const int> edge_ids, const TriMesh& mesh) {
  std::map<int, std::vector<int>> adj;  // vertex -> positions in edge_ids
  for (int i = 0; i < static_cast<int>(edge_ids.size()); ++i)
    for (int v : mesh.edges()[edge_ids[i]].v) adj[v].push_back(i);
  std::vector<char> used(edge_ids.size(), 0);
  std::vector<std::vector<int>> chains;
  auto follow = [&](int start, int first) {
    std::vector<int> chain{start};
    int v = start;
    int i = first;
    while (i >= 0 && !used[i]) {
      used[i] = 1;
      const auto& ev = mesh.edges()[edge_ids[i]].v;
      v = ev[0] == v ? ev[1] : ev[0];
      chain.push_back(v);
      const auto& inc = adj[v];
      i = -1;
      if (inc.size() == 2)
        for (int j : inc)
          if (!used[j]) i = j;
    }
    chains.push_back(std::move(chain));
  };
  for (const auto& [v, inc] : adj)
    if (inc.size() != 2)
      for (int i : inc)
        if (!used[i]) follow(v, i);
  for (int i = 0; i < static_cast<int>(edge_ids.size()); ++i)
    if (!used[i]) follow(mesh.edges()[edge_ids[i]].v[0], i);
  return chains;
}

std::vector<std::pair<int, int>> split_straight(std::span<const Vec2> pts, double rel_tol, double abs_tol) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(pts.size());
  int i = 0;
  while (i + 1 < n) {
    int j = i + 1;
    while (j + 1 < n) {
      const int c = j + 1;
      const double tol = rel_tol * distance(pts[i], pts[c]) + abs_tol;
      bool ok = true;
      for (int q = i + 1; q < c && ok; ++q) ok = segment_distance(pts[q], pts[i], pts[c]) <= tol;
      if (!ok) break;
      j = c;
    }
    out.emplace_back(i, j);
    i = j;
  }
  return out;
}

CharBoundaryReport characteristic_boundary(const RegionMap& map, std::span<const Vec2> sigma, const TriMesh& mesh,
                                           double eps) {
  CharBoundaryReport rep;
  rep.eps = eps;
  if (sigma.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("characteristic_boundary: sigma has wrong size");
  if (map.empty_interior) return rep;
  const auto& edges = mesh.edges();
  std::vector<char> candidate(edges.size(), 0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!plastic(map, t)) continue;
    for (int k = 0; k < 3; ++k) {
      if (plastic(map, mesh.neighbors(t)[k])) continue;
      if (std::abs(dot(sigma[t], edge_normal(mesh, t, k))) >= 1.0 - eps) candidate[mesh.triangle_edges(t)[k]] = 1;
    }
  }
  rep.candidate_edges = static_cast<int>(std::count(candidate.begin(), candidate.end(), 1));
  // Exits whose direction is within this sine of the edge are grazing and
  // carry no information at mesh resolution.
  constexpr double kMinExitSine = 0.02;
  std::vector<char> hit(edges.size(), 0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!plastic(map, t) || norm(sigma[t]) == 0.0) continue;
    const Vec2 d = normalized(perp(sigma[t]));
    for (double sgn : {1.0, -1.0}) {
      const Exit ex = walk(map, mesh, t, mesh.centroid(t), sgn * d);
      if (ex.edge < 0 || !candidate[ex.edge]) continue;
      if (std::abs(dot(sgn * d, edge_normal(mesh, ex.cell, ex.k))) >= kMinExitSine) hit[ex.edge] = 1;
    }
  }
  std::vector<int> kept;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    if (!candidate[e]) continue;
    if (hit[e])
      ++rep.hit_edges;
    else
      kept.push_back(e);
  }
  const double abs_tol = 0.5 * mesh.max_edge_length();
  for (const auto& chain : chain_edges(kept, mesh)) {
    std::vector<Vec2> pts;
    double len = 0.0;
    for (int v : chain) {
      if (!pts.empty()) len += distance(pts.back(), mesh.vertex(v));
      pts.push_back(mesh.vertex(v));
    }
    // Below two mesh edges a chain cannot be told apart from label noise.
    if (len < 2.0 * mesh.max_edge_length()) {
      ++rep.fragments;
      continue;
    }
    for (auto [i, j] : split_straight(pts, eps, abs_tol)) {
      CharSegment seg{pts[i], pts[j], {}};
      for (int q = i; q < j; ++q) {
        // recover the edge id between consecutive chain vertices
        for (int e : kept) {
          const auto& ev = edges[e].v;
          if ((ev[0] == chain[q] && ev[1] == chain[q + 1]) || (ev[1] == chain[q] && ev[0] == chain[q + 1]))
            seg.edges.push_back(e);
        }
      }
      rep.segments.push_back(std::move(seg));
    }
  }
  rep.components = static_cast<int>(rep.segments.size());
  rep.theorem_consistent = rep.components <= 2;
  return rep;
}

RegionMap analyze_regions(std::span<const Vec2> sigma, const TriMesh& mesh, double eps_sat, double char_eps,
                          double convex_threshold) {
  RegionMap m = classify_regions(sigma, mesh, eps_sat);
  m.char_boundary = characteristic_boundary(m, sigma, mesh, char_eps);
  m.convexity = convexity_check(m, mesh, convex_threshold);
  return m;
}

ElasticDiagnostics elastic_diagnostics(std::span<const double> u, std::span<const Vec2> sigma, const RegionMap& map,
                                       const TriMesh& mesh) {
  if (u.size() != static_cast<std::size_t>(mesh.num_vertices()) ||
      sigma.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("elastic_diagnostics: field has wrong size");
  ElasticDiagnostics d;
  d.bound = 1.0 - 0.5 * map.eps_sat;
  const std::vector<Vec2> grad = gradient(u, mesh);
  std::vector<char> near_plastic(mesh.num_vertices(), 0);
  std::vector<char> all_elastic(mesh.num_vertices(), 1);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int v : mesh.triangle(t)) {
      if (map.label[t] == Region::Plastic) {
        near_plastic[v] = 1;
        all_elastic[v] = 0;
      }
    }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (map.label[t] != Region::Elastic) continue;
    ++d.elastic_cells;
    d.max_sigma_minus_grad = std::max(d.max_sigma_minus_grad, norm(sigma[t] - grad[t]));
    const double g = norm(grad[t]);
    d.max_grad_all = std::max(d.max_grad_all, g);
    bool band = false;
    for (int v : mesh.triangle(t)) band = band || near_plastic[v];
    if (!band) d.max_grad = std::max(d.max_grad, g);
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v) || !all_elastic[v]) continue;
    double acc = 0.0;
    for (int t : mesh.vertex_triangles(v)) {
      const auto& tri = mesh.triangle(t);
      const int k = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
      acc += mesh.area(t) * dot(grad[t], mesh.shape_gradients(t)[k]);
    }
    d.max_laplacian = std::max(d.max_laplacian, std::abs(acc));
  }
  d.passes = d.max_grad <= d.bound;
  return d;
}

}  // namespace plastiq
