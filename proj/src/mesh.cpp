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

#include "plastiq/mesh.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace plastiq {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::string str(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(BoundaryKind kind) {
  return kind == BoundaryKind::Dirichlet ? "dirichlet" : "neumann";
}

BoundaryKind boundary_kind_from_string(const std::string& s) {
  if (s == "dirichlet" || s == "D") return BoundaryKind::Dirichlet;
  if (s == "neumann" || s == "N") return BoundaryKind::Neumann;
  throw Error("unknown boundary kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// TriMesh

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                 std::vector<BoundaryEdge> boundary)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_(std::move(boundary)) {
  const int nv = num_vertices();
  const int nt = num_triangles();
  if (nv < 3 || nt < 1) throw Error("mesh needs at least one triangle");

  double scale = 0.0;
  for (const Vec2& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error("non-finite vertex coordinate");
    scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  }
  const double area_floor = 1e-14 * std::max(scale * scale, 1e-300);

  areas_.resize(nt);
  grads_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv) throw Error("triangle " + std::to_string(t) + " has an invalid vertex index");
    }
    const Vec2& p0 = vertices_[tri[0]];
    const Vec2& p1 = vertices_[tri[1]];
    const Vec2& p2 = vertices_[tri[2]];
    const double twice = orient(p0, p1, p2);
    if (!(0.5 * twice > area_floor)) {
      throw Error("triangle " + std::to_string(t) + " has non-positive area (" + str(0.5 * twice) + ")");
    }
    areas_[t] = 0.5 * twice;
    grads_[t] = {perp(p2 - p1) / twice, perp(p0 - p2) / twice, perp(p1 - p0) / twice};
    total_area_ += areas_[t];
  }

  // Edges and adjacency.
  std::unordered_map<std::uint64_t, int> edge_index;
  edge_index.reserve(static_cast<std::size_t>(nt) * 2);
  neighbors_.assign(nt, {-1, -1, -1});
  std::vector<std::array<int, 3>> local_edge(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      auto [it, inserted] = edge_index.try_emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back(Edge{{a, b}, {t, -1}});
      } else {
        Edge& e = edges_[it->second];
        if (e.tri[1] >= 0) throw Error("non-conforming mesh: edge shared by more than two triangles");
        if (e.v[0] != b || e.v[1] != a) throw Error("inconsistent triangle orientation across an edge");
        e.tri[1] = t;
      }
      local_edge[t][k] = it->second;
    }
  }
  tri_edges_ = local_edge;
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const Edge& e = edges_[local_edge[t][k]];
      neighbors_[t][k] = e.tri[0] == t ? e.tri[1] : e.tri[0];
    }
  }

  // Boundary edges: exactly the edges with one incident triangle, each once.
  std::vector<int> marked(edges_.size(), 0);
  boundary_len_.resize(boundary_.size());
  boundary_normal_.resize(boundary_.size());
  boundary_tri_.resize(boundary_.size());
  edge_boundary_.assign(edges_.size(), -1);
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    BoundaryEdge& be = boundary_[i];
    auto it = edge_index.find(edge_key(be.v[0], be.v[1]));
    if (it == edge_index.end()) throw Error("boundary edge " + std::to_string(i) + " is not a mesh edge");
    const Edge& e = edges_[it->second];
    if (!e.on_boundary()) throw Error("boundary edge " + std::to_string(i) + " is an interior edge");
    if (marked[it->second]++) throw Error("boundary edge " + std::to_string(i) + " carries more than one marker");
    be.v = e.v;  // orientation of the owning triangle: domain on the left
    edge_boundary_[it->second] = static_cast<int>(i);
    boundary_tri_[i] = e.tri[0];
    const Vec2 d = vertices_[be.v[1]] - vertices_[be.v[0]];
    boundary_len_[i] = norm(d);
    boundary_normal_[i] = -perp(d) / boundary_len_[i];
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i].on_boundary() && !marked[i]) {
      throw Error("boundary edge (" + std::to_string(edges_[i].v[0]) + "," + std::to_string(edges_[i].v[1]) +
                  ") has no marker");
    }
  }

  // Closed loops: every boundary vertex has one outgoing and one incoming edge.
  std::vector<int> out_deg(nv, 0), in_deg(nv, 0);
  for (const auto& be : boundary_) {
    ++out_deg[be.v[0]];
    ++in_deg[be.v[1]];
  }
  boundary_vertex_.assign(nv, 0);
  for (int v = 0; v < nv; ++v) {
    if (out_deg[v] != in_deg[v] || out_deg[v] > 1) {
      throw Error("boundary is not a union of simple closed loops at vertex " + std::to_string(v));
    }
    boundary_vertex_[v] = out_deg[v] > 0;
  }

  // Vertex -> triangles (CSR).
  vt_offsets_.assign(nv + 1, 0);
  for (const auto& tri : triangles_)
    for (int k : tri) ++vt_offsets_[k + 1];
  std::partial_sum(vt_offsets_.begin(), vt_offsets_.end(), vt_offsets_.begin());
  vt_list_.resize(vt_offsets_.back());
  std::vector<int> fill(vt_offsets_.begin(), vt_offsets_.end() - 1);
  for (int t = 0; t < nt; ++t)
    for (int k : triangles_[t]) vt_list_[fill[k]++] = t;
  for (int v = 0; v < nv; ++v) {
    if (vt_offsets_[v] == vt_offsets_[v + 1]) throw Error("vertex " + std::to_string(v) + " belongs to no triangle");
  }

  lumped_mass_.assign(nv, 0.0);
  for (int t = 0; t < nt; ++t)
    for (int k : triangles_[t]) lumped_mass_[k] += areas_[t] / 3.0;
  boundary_weight_.assign(nv, 0.0);
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    boundary_weight_[boundary_[i].v[0]] += 0.5 * boundary_len_[i];
    boundary_weight_[boundary_[i].v[1]] += 0.5 * boundary_len_[i];
  }

  double sum = 0.0;
  for (const Edge& e : edges_) {
    const double l = distance(vertices_[e.v[0]], vertices_[e.v[1]]);
    sum += l;
    max_edge_ = std::max(max_edge_, l);
  }
  mesh_size_ = sum / static_cast<double>(edges_.size());

  // Arc length along each segment: follow the chain of the segment's edges,
  // starting at a vertex with no incoming segment edge (open chain) or at the
  // rightmost-lowest vertex (closed chain).
  boundary_s_.assign(boundary_.size(), {0.0, 0.0});
  int max_seg = -1;
  for (const auto& be : boundary_) {
    if (be.segment < 0) throw Error("negative boundary segment id");
    max_seg = std::max(max_seg, be.segment);
  }
  segment_len_.assign(max_seg + 1, 0.0);
  std::map<int, std::vector<int>> by_segment;
  for (std::size_t i = 0; i < boundary_.size(); ++i) by_segment[boundary_[i].segment].push_back(static_cast<int>(i));
  for (auto& [seg, ids] : by_segment) {
    std::unordered_map<int, int> next_edge;  // start vertex -> edge
    std::unordered_map<int, int> has_incoming;
    for (int i : ids) {
      next_edge[boundary_[i].v[0]] = i;
      has_incoming[boundary_[i].v[1]] = 1;
    }
    std::vector<char> done(boundary_.size(), 0);
    std::size_t remaining = ids.size();
    double s = 0.0;
    while (remaining > 0) {
      int start = -1;
      for (int i : ids) {
        if (!done[i] && !has_incoming.count(boundary_[i].v[0])) {
          start = i;
          break;
        }
      }
      if (start < 0) {
        for (int i : ids) {
          if (done[i]) continue;
          if (start < 0) {
            start = i;
            continue;
          }
          const Vec2& a = vertices_[boundary_[i].v[0]];
          const Vec2& b = vertices_[boundary_[start].v[0]];
          if (a.x > b.x || (a.x == b.x && a.y < b.y)) start = i;
        }
      }
      int cur = start;
      while (cur >= 0 && !done[cur]) {
        done[cur] = 1;
        --remaining;
        boundary_s_[cur] = {s, s + boundary_len_[cur]};
        s += boundary_len_[cur];
        auto it = next_edge.find(boundary_[cur].v[1]);
        cur = it == next_edge.end() ? -1 : it->second;
      }
    }
    segment_len_[seg] = s;
  }
}

Vec2 TriMesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

std::span<const int> TriMesh::vertex_triangles(int v) const {
  return {vt_list_.data() + vt_offsets_[v], static_cast<std::size_t>(vt_offsets_[v + 1] - vt_offsets_[v])};
}

Vec2 TriMesh::boundary_midpoint(int e) const {
  return 0.5 * (vertices_[boundary_[e].v[0]] + vertices_[boundary_[e].v[1]]);
}

double TriMesh::segment_length(int segment) const {
  return segment >= 0 && segment < static_cast<int>(segment_len_.size()) ? segment_len_[segment] : 0.0;
}

std::vector<int> TriMesh::segment_ids() const {
  std::vector<int> ids;
  for (const auto& be : boundary_) ids.push_back(be.segment);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

TriMesh TriMesh::with_boundary_kinds(const std::function<BoundaryKind(int)>& rule) const {
  std::vector<BoundaryEdge> b = boundary_;
  for (int e = 0; e < num_boundary_edges(); ++e) b[e].kind = rule(e);
  return TriMesh(vertices_, triangles_, std::move(b));
}

// ---------------------------------------------------------------------------
// BoundaryData

BoundaryData BoundaryData::zeros(const TriMesh& mesh) {
  return sample(mesh, [](Vec2) { return 0.0; }, [](Vec2) { return 0.0; });
}

BoundaryData BoundaryData::sample(const TriMesh& mesh, const std::function<double(Vec2)>& w,
                                  const std::function<double(Vec2)>& g) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  BoundaryData d;
  d.w.assign(mesh.num_boundary_edges(), nan);
  d.g.assign(mesh.num_boundary_edges(), nan);
  for (int e = 0; e < mesh.num_boundary_edges(); ++e) {
    const Vec2 m = mesh.boundary_midpoint(e);
    if (mesh.boundary_edge(e).kind == BoundaryKind::Dirichlet)
      d.w[e] = w(m);
    else
      d.g[e] = g(m);
  }
  return d;
}

void BoundaryData::validate(const TriMesh& mesh) const {
  const auto n = static_cast<std::size_t>(mesh.num_boundary_edges());
  if (w.size() != n || g.size() != n) throw Error("boundary data size does not match the mesh boundary");
  for (std::size_t e = 0; e < n; ++e) {
    const bool dir = mesh.boundary_edge(static_cast<int>(e)).kind == BoundaryKind::Dirichlet;
    const int seg = mesh.boundary_edge(static_cast<int>(e)).segment;
    if (dir && !std::isfinite(w[e]))
      throw Error("missing or non-finite Dirichlet data on segment " + std::to_string(seg));
    if (!dir && !std::isfinite(g[e]))
      throw Error("missing or non-finite Neumann data on segment " + std::to_string(seg));
    if (dir && !std::isnan(g[e])) throw Error("Neumann data given on a Dirichlet edge of segment " + std::to_string(seg));
    if (!dir && !std::isnan(w[e])) throw Error("Dirichlet data given on a Neumann edge of segment " + std::to_string(seg));
  }
}

double BoundaryData::max_abs_g() const {
  double m = 0.0;
  for (double v : g)
    if (std::isfinite(v)) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// Domain builders

DomainSpec DomainSpec::rectangle(double w, double h, double edge) {
  DomainSpec s;
  s.kind = Kind::Rectangle;
  s.width = w;
  s.height = h;
  s.edge_length = edge;
  return s;
}

DomainSpec DomainSpec::disk(double r, double edge) {
  DomainSpec s;
  s.kind = Kind::Disk;
  s.radius = r;
  s.edge_length = edge;
  return s;
}

DomainSpec DomainSpec::annulus(double a, double b, double edge) {
  DomainSpec s;
  s.kind = Kind::Annulus;
  s.inner = a;
  s.outer = b;
  s.edge_length = edge;
  return s;
}

DomainSpec DomainSpec::half_disk(double b, double edge, std::vector<double> breaks) {
  DomainSpec s;
  s.kind = Kind::HalfDisk;
  s.radius = b;
  s.edge_length = edge;
  s.radial_breaks = std::move(breaks);
  return s;
}

DomainSpec DomainSpec::fan_sector(double r, double angle, double edge) {
  DomainSpec s;
  s.kind = Kind::FanSector;
  s.radius = r;
  s.angle = angle;
  s.edge_length = edge;
  return s;
}

DomainSpec DomainSpec::triangle(Vec2 p0, Vec2 p1, Vec2 p2, double edge) {
  DomainSpec s;
  s.kind = Kind::Triangle;
  s.corners = {p0, p1, p2};
  s.edge_length = edge;
  return s;
}

std::string DomainSpec::name() const {
  switch (kind) {
    case Kind::Rectangle: return "rectangle";
    case Kind::Disk: return "disk";
    case Kind::Annulus: return "annulus";
    case Kind::HalfDisk: return "half_disk";
    case Kind::FanSector: return "fan_sector";
    case Kind::Triangle: return "triangle";
  }
  return "unknown";
}

namespace {

struct MeshBuilder {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;

  int add_vertex(Vec2 p) {
    vertices.push_back(p);
    return static_cast<int>(vertices.size()) - 1;
  }
  void add_triangle(int a, int b, int c) {
    if (orient(vertices[a], vertices[b], vertices[c]) < 0.0) std::swap(b, c);
    triangles.push_back({a, b, c});
  }
  void add_boundary(int a, int b, int segment) { boundary.push_back({{a, b}, BoundaryKind::Dirichlet, segment}); }
  TriMesh finish() { return TriMesh(std::move(vertices), std::move(triangles), std::move(boundary)); }
};

TriMesh build_rectangle(const DomainSpec& s) {
  if (!(s.width > 0.0) || !(s.height > 0.0)) throw Error("rectangle needs positive width and height");
  const int nx = std::max(1, static_cast<int>(std::ceil(s.width / s.edge_length - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(s.height / s.edge_length - 1e-9)));
  MeshBuilder b;
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) b.add_vertex({s.width * i / nx, s.height * j / ny});
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      b.add_triangle(id(i, j), id(i + 1, j), id(i + 1, j + 1));
      b.add_triangle(id(i, j), id(i + 1, j + 1), id(i, j + 1));
    }
  }
  for (int i = 0; i < nx; ++i) b.add_boundary(id(i, 0), id(i + 1, 0), 0);
  for (int j = 0; j < ny; ++j) b.add_boundary(id(nx, j), id(nx, j + 1), 1);
  for (int i = nx; i > 0; --i) b.add_boundary(id(i, ny), id(i - 1, ny), 2);
  for (int j = ny; j > 0; --j) b.add_boundary(id(0, j), id(0, j - 1), 3);
  return b.finish();
}

/// Ring radii between r0 and r1, spaced at most `edge` apart, including every
/// break strictly inside (r0, r1).
std::vector<double> ring_radii(double r0, double r1, double edge, std::vector<double> breaks) {
  std::vector<double> knots{r0};
  std::sort(breaks.begin(), breaks.end());
  for (double r : breaks)
    if (r > r0 + 1e-12 && r < r1 - 1e-12) knots.push_back(r);
  knots.push_back(r1);
  std::vector<double> radii{r0};
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const int n = std::max(1, static_cast<int>(std::ceil((knots[k + 1] - knots[k]) / edge - 1e-9)));
    for (int i = 1; i <= n; ++i) radii.push_back(knots[k] + (knots[k + 1] - knots[k]) * i / n);
  }
  return radii;
}

/// Joins two polylines (inner, outer) by merging their normalized parameters.
/// Closed polylines wrap around.
void stitch(MeshBuilder& b, const std::vector<int>& inner, const std::vector<int>& outer, bool closed) {
  const int m = static_cast<int>(inner.size()) - (closed ? 0 : 1);
  const int n = static_cast<int>(outer.size()) - (closed ? 0 : 1);
  auto in = [&](int i) { return inner[closed ? i % inner.size() : i]; };
  auto out = [&](int j) { return outer[closed ? j % outer.size() : j]; };
  int i = 0, j = 0;
  while (i < m || j < n) {
    const bool advance_outer =
        i == m || (j < n && static_cast<double>(j + 1) / n <= static_cast<double>(i + 1) / m);
    if (advance_outer) {
      b.add_triangle(in(i), out(j), out(j + 1));
      ++j;
    } else {
      b.add_triangle(in(i), out(j), in(i + 1));
      ++i;
    }
  }
}

/// Concentric-ring mesh of the sector theta in [0, span] (full circle when
/// `closed`), radii from r0 (0 means a center vertex) to r1.
struct RingMesh {
  std::vector<std::vector<int>> rings;  // vertex ids per ring, increasing angle
  int center = -1;
};

RingMesh build_rings(MeshBuilder& b, double r0, double r1, double span, bool closed, double edge,
                     const std::vector<double>& breaks) {
  RingMesh rm;
  const std::vector<double> radii = ring_radii(r0, r1, edge, breaks);
  const int min_pts = closed ? 6 : std::max(2, static_cast<int>(std::ceil(span / (std::numbers::pi / 3))));
  std::size_t first = 0;
  if (r0 == 0.0) {
    rm.center = b.add_vertex({0.0, 0.0});
    rm.rings.push_back({rm.center});
    first = 1;
  }
  for (std::size_t k = first; k < radii.size(); ++k) {
    const double r = radii[k];
    const int n = std::max(min_pts, static_cast<int>(std::ceil(r * span / edge - 1e-9)));
    std::vector<int> ring;
    const int count = closed ? n : n + 1;
    for (int i = 0; i < count; ++i) {
      double theta = span * i / n;
      Vec2 p = polar(r, theta);
      // snap exact axis points so straight boundary edges stay collinear
      if (!closed && i == n && std::abs(span - std::numbers::pi) < 1e-15) p = {-r, 0.0};
      if (i == 0) p = {r, 0.0};
      ring.push_back(b.add_vertex(p));
    }
    rm.rings.push_back(std::move(ring));
  }
  for (std::size_t k = 0; k + 1 < rm.rings.size(); ++k) {
    const auto& inner = rm.rings[k];
    const auto& outer = rm.rings[k + 1];
    if (inner.size() == 1) {
      const int c = inner[0];
      const int n = static_cast<int>(outer.size());
      const int last = closed ? n : n - 1;
      for (int j = 0; j < last; ++j) b.add_triangle(c, outer[j], outer[(j + 1) % n]);
    } else {
      stitch(b, inner, outer, closed);
    }
  }
  return rm;
}

TriMesh build_disk(const DomainSpec& s) {
  if (!(s.radius > 0.0)) throw Error("disk needs R > 0");
  MeshBuilder b;
  RingMesh rm = build_rings(b, 0.0, s.radius, 2 * std::numbers::pi, true, s.edge_length, s.radial_breaks);
  const auto& outer = rm.rings.back();
  for (std::size_t j = 0; j < outer.size(); ++j) b.add_boundary(outer[j], outer[(j + 1) % outer.size()], 0);
  return b.finish();
}

TriMesh build_annulus(const DomainSpec& s) {
  if (!(s.inner > 0.0) || !(s.outer > s.inner))
    throw Error("annulus needs 0 < a < b (got a=" + str(s.inner) + ", b=" + str(s.outer) + ")");
  MeshBuilder b;
  RingMesh rm = build_rings(b, s.inner, s.outer, 2 * std::numbers::pi, true, s.edge_length, s.radial_breaks);
  const auto& in = rm.rings.front();
  const auto& out = rm.rings.back();
  for (std::size_t j = 0; j < in.size(); ++j) b.add_boundary(in[(j + 1) % in.size()], in[j], 0);
  for (std::size_t j = 0; j < out.size(); ++j) b.add_boundary(out[j], out[(j + 1) % out.size()], 1);
  return b.finish();
}

/// Sector {0 <= theta <= span, r <= R}. Segments: 0 = ray theta=0, 1 = arc,
/// 2 = ray theta=span. A half disk joins rays 0 and 2 into one diameter.
TriMesh build_sector(double radius, double span, double edge, const std::vector<double>& breaks, bool half_disk) {
  MeshBuilder b;
  RingMesh rm = build_rings(b, 0.0, radius, span, false, edge, breaks);
  const auto& outer = rm.rings.back();
  for (std::size_t j = 0; j + 1 < outer.size(); ++j) b.add_boundary(outer[j], outer[j + 1], half_disk ? 0 : 1);
  const int ray0 = half_disk ? 1 : 0;
  const int ray1 = half_disk ? 1 : 2;
  for (std::size_t k = 0; k + 1 < rm.rings.size(); ++k) {
    b.add_boundary(rm.rings[k].front(), rm.rings[k + 1].front(), ray0);
    b.add_boundary(rm.rings[k + 1].back(), rm.rings[k].back(), ray1);
  }
  return b.finish();
}

TriMesh build_triangle(const DomainSpec& s) {
  Vec2 p0 = s.corners[0], p1 = s.corners[1], p2 = s.corners[2];
  const double scale = std::max({distance(p0, p1), distance(p1, p2), distance(p2, p0)});
  if (!(std::abs(orient(p0, p1, p2)) > 1e-12 * scale * scale)) throw Error("triangle corners are collinear");
  if (orient(p0, p1, p2) < 0.0) std::swap(p1, p2);
  const int n = std::max(1, static_cast<int>(std::ceil(scale / s.edge_length - 1e-9)));
  MeshBuilder b;
  // vertex (i, j) = p0 + i/n (p1 - p0) + j/n (p2 - p0), i + j <= n
  std::vector<std::vector<int>> id(n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      id[i].push_back(b.add_vertex(p0 + (static_cast<double>(i) / n) * (p1 - p0) + (static_cast<double>(j) / n) * (p2 - p0)));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; i + j < n; ++j) {
      b.add_triangle(id[i][j], id[i + 1][j], id[i][j + 1]);
      if (i + j + 1 < n) b.add_triangle(id[i + 1][j], id[i + 1][j + 1], id[i][j + 1]);
    }
  }
  for (int i = 0; i < n; ++i) b.add_boundary(id[i][0], id[i + 1][0], 0);
  for (int i = n; i > 0; --i) b.add_boundary(id[i][n - i], id[i - 1][n - i + 1], 1);
  for (int j = n; j > 0; --j) b.add_boundary(id[0][j], id[0][j - 1], 2);
  return b.finish();
}

}  // namespace

TriMesh build_domain(const DomainSpec& spec) {
  if (!(spec.edge_length > 0.0) || !std::isfinite(spec.edge_length))
    throw Error("target edge length must be positive");
  switch (spec.kind) {
    case DomainSpec::Kind::Rectangle: return build_rectangle(spec);
    case DomainSpec::Kind::Disk: return build_disk(spec);
    case DomainSpec::Kind::Annulus: return build_annulus(spec);
    case DomainSpec::Kind::HalfDisk:
      if (!(spec.radius > 0.0)) throw Error("half disk needs b > 0");
      return build_sector(spec.radius, std::numbers::pi, spec.edge_length, spec.radial_breaks, true);
    case DomainSpec::Kind::FanSector:
      if (!(spec.radius > 0.0)) throw Error("fan sector needs R > 0");
      if (!(spec.angle > 0.0 && spec.angle < std::numbers::pi))
        throw Error("fan sector angle must lie in (0, pi), got " + str(spec.angle));
      return build_sector(spec.radius, spec.angle, spec.edge_length, spec.radial_breaks, false);
    case DomainSpec::Kind::Triangle: return build_triangle(spec);
  }
  throw Error("unknown domain kind");
}

// ---------------------------------------------------------------------------
// Discrete calculus

std::vector<Vec2> gradient(std::span<const double> u, const TriMesh& mesh) {
  if (u.size() != static_cast<std::size_t>(mesh.num_vertices()))
    throw Error("gradient: expected " + std::to_string(mesh.num_vertices()) + " nodal values, got " +
                std::to_string(u.size()));
  std::vector<Vec2> g(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const auto& gr = mesh.shape_gradients(t);
    g[t] = u[tri[0]] * gr[0] + u[tri[1]] * gr[1] + u[tri[2]] * gr[2];
  }
  return g;
}

std::vector<double> divergence_adjoint(std::span<const Vec2> sigma, const TriMesh& mesh) {
  if (sigma.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("divergence_adjoint: expected " + std::to_string(mesh.num_triangles()) + " cell values, got " +
                std::to_string(sigma.size()));
  // Gather per vertex so the summation order is fixed.
  std::vector<double> d(mesh.num_vertices(), 0.0);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    double acc = 0.0;
    for (int t : mesh.vertex_triangles(v)) {
      const auto& tri = mesh.triangle(t);
      const int k = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
      acc += mesh.area(t) * dot(sigma[t], mesh.shape_gradients(t)[k]);
    }
    d[v] = -acc;
  }
  return d;
}

std::vector<double> boundary_trace(std::span<const double> u, const TriMesh& mesh) {
  if (u.size() != static_cast<std::size_t>(mesh.num_vertices())) throw Error("boundary_trace: size mismatch");
  std::vector<double> tr(mesh.num_boundary_edges());
  for (int e = 0; e < mesh.num_boundary_edges(); ++e) {
    const auto& be = mesh.boundary_edge(e);
    tr[e] = 0.5 * (u[be.v[0]] + u[be.v[1]]);
  }
  return tr;
}

double power_iteration(std::size_t n, const std::function<void(std::span<const double>, std::span<double>)>& apply,
                       const std::function<double(std::span<const double>, std::span<const double>)>& inner,
                       double rel_tol, int max_iter) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n), y(n);
  for (double& v : x) v = dist(rng);
  double nx = std::sqrt(inner(x, x));
  for (double& v : x) v /= nx;
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    apply(x, y);
    const double rq = inner(x, y);
    const double ny = std::sqrt(inner(y, y));
    if (ny == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
    if (it > 10 && std::abs(rq - lambda) <= rel_tol * rq) {
      lambda = rq;
      break;
    }
    lambda = rq;
  }
  return lambda;
}

double operator_norm(const TriMesh& mesh) {
  const auto n = static_cast<std::size_t>(mesh.num_vertices());
  auto apply = [&mesh](std::span<const double> x, std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangle(t);
      const auto& gr = mesh.shape_gradients(t);
      const Vec2 g = x[tri[0]] * gr[0] + x[tri[1]] * gr[1] + x[tri[2]] * gr[2];
      for (int k = 0; k < 3; ++k) y[tri[k]] += dot(g, gr[k]);
    }
  };
  auto inner = [](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  return std::sqrt(power_iteration(n, apply, inner, 1e-10, 20000));
}

// ---------------------------------------------------------------------------
// Mesh file format

void save_mesh(const TriMesh& mesh, std::ostream& out) {
  out << "plastiq-mesh 1\n";
  out.precision(17);
  out << mesh.num_vertices() << "\n";
  for (const Vec2& p : mesh.vertices()) out << p.x << " " << p.y << "\n";
  out << mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles()) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << mesh.num_boundary_edges() << "\n";
  for (const auto& be : mesh.boundary_edges())
    out << be.v[0] << " " << be.v[1] << " " << (be.kind == BoundaryKind::Dirichlet ? "D" : "N") << " "
        << be.segment << "\n";
}

TriMesh load_mesh(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "plastiq-mesh" || version != 1)
    throw Error("not a plastiq-mesh version 1 file");
  auto fail = [](const std::string& what) { return Error("malformed mesh file: " + what); };
  long nv = 0;
  if (!(in >> nv) || nv < 0) throw fail("vertex count");
  std::vector<Vec2> vertices(nv);
  for (auto& p : vertices)
    if (!(in >> p.x >> p.y)) throw fail("vertex coordinates");
  long nt = 0;
  if (!(in >> nt) || nt < 0) throw fail("triangle count");
  std::vector<std::array<int, 3>> tris(nt);
  for (auto& t : tris)
    if (!(in >> t[0] >> t[1] >> t[2])) throw fail("triangle indices");
  long nb = 0;
  if (!(in >> nb) || nb < 0) throw fail("boundary edge count");
  std::vector<BoundaryEdge> boundary(nb);
  for (auto& be : boundary) {
    std::string kind;
    if (!(in >> be.v[0] >> be.v[1] >> kind >> be.segment)) throw fail("boundary edge record");
    be.kind = boundary_kind_from_string(kind);
  }
  return TriMesh(std::move(vertices), std::move(tris), std::move(boundary));
}

// ---------------------------------------------------------------------------
// TriLocator

TriLocator::TriLocator(const TriMesh& mesh) : mesh_(&mesh) {
  lo_ = hi_ = mesh.vertex(0);
  for (const Vec2& p : mesh.vertices()) {
    lo_.x = std::min(lo_.x, p.x);
    lo_.y = std::min(lo_.y, p.y);
    hi_.x = std::max(hi_.x, p.x);
    hi_.y = std::max(hi_.y, p.y);
  }
  const double w = std::max(hi_.x - lo_.x, 1e-12);
  const double h = std::max(hi_.y - lo_.y, 1e-12);
  const double cell = std::max(1.5 * mesh.mesh_size(), std::sqrt(w * h / std::max(1, mesh.num_triangles())));
  nx_ = std::clamp(static_cast<int>(w / cell) + 1, 1, 4096);
  ny_ = std::clamp(static_cast<int>(h / cell) + 1, 1, 4096);
  dx_ = w / nx_;
  dy_ = h / ny_;
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  boundary_buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  auto range = [&](Vec2 a, Vec2 b, auto&& fn) {
    const int i0 = std::clamp(static_cast<int>((a.x - lo_.x) / dx_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((b.x - lo_.x) / dx_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((a.y - lo_.y) / dy_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((b.y - lo_.y) / dy_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) fn(static_cast<std::size_t>(j) * nx_ + i);
  };
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    Vec2 a = mesh.vertex(tri[0]), b = a;
    for (int k = 1; k < 3; ++k) {
      const Vec2& p = mesh.vertex(tri[k]);
      a = {std::min(a.x, p.x), std::min(a.y, p.y)};
      b = {std::max(b.x, p.x), std::max(b.y, p.y)};
    }
    range(a, b, [&](std::size_t k) { buckets_[k].push_back(t); });
  }
  for (int e = 0; e < mesh.num_boundary_edges(); ++e) {
    const Vec2& p = mesh.vertex(mesh.boundary_edge(e).v[0]);
    const Vec2& q = mesh.vertex(mesh.boundary_edge(e).v[1]);
    range({std::min(p.x, q.x), std::min(p.y, q.y)}, {std::max(p.x, q.x), std::max(p.y, q.y)},
          [&](std::size_t k) { boundary_buckets_[k].push_back(e); });
  }
}

std::array<double, 3> TriLocator::barycentric(int t, const Vec2& p) const {
  const auto& tri = mesh_->triangle(t);
  const Vec2& a = mesh_->vertex(tri[0]);
  const Vec2& b = mesh_->vertex(tri[1]);
  const Vec2& c = mesh_->vertex(tri[2]);
  const double twice = 2.0 * mesh_->area(t);
  const double l0 = orient(p, b, c) / twice;
  const double l1 = orient(a, p, c) / twice;
  return {l0, l1, 1.0 - l0 - l1};
}

int TriLocator::locate(const Vec2& p) const {
  if (p.x < lo_.x - dx_ || p.x > hi_.x + dx_ || p.y < lo_.y - dy_ || p.y > hi_.y + dy_) return -1;
  const int i = std::clamp(static_cast<int>((p.x - lo_.x) / dx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((p.y - lo_.y) / dy_), 0, ny_ - 1);
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
    const auto l = barycentric(t, p);
    const double m = std::min({l[0], l[1], l[2]});
    if (m >= 0.0) return t;
    if (m > best_min) {
      best_min = m;
      best = t;
    }
  }
  return best_min >= -1e-10 ? best : -1;
}

double TriLocator::boundary_distance(const Vec2& p) const {
  const int ci = std::clamp(static_cast<int>((p.x - lo_.x) / dx_), 0, nx_ - 1);
  const int cj = std::clamp(static_cast<int>((p.y - lo_.y) / dy_), 0, ny_ - 1);
  // outside-the-box offset makes the ring lower bound conservative
  const double ox = std::max({lo_.x - p.x, p.x - hi_.x, 0.0});
  const double oy = std::max({lo_.y - p.y, p.y - hi_.y, 0.0});
  double best = std::numeric_limits<double>::infinity();
  const int max_ring = std::max(nx_, ny_);
  for (int r = 0; r <= max_ring; ++r) {
    for (int j = cj - r; j <= cj + r; ++j) {
      if (j < 0 || j >= ny_) continue;
      for (int i = ci - r; i <= ci + r; ++i) {
        if (i < 0 || i >= nx_) continue;
        if (std::max(std::abs(i - ci), std::abs(j - cj)) != r) continue;
        for (int e : boundary_buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
          const auto& be = mesh_->boundary_edge(e);
          best = std::min(best, segment_distance(p, mesh_->vertex(be.v[0]), mesh_->vertex(be.v[1])));
        }
      }
    }
    const double reach = r * std::min(dx_, dy_) + std::hypot(ox, oy);
    if (best <= reach) break;
  }
  return best;
}

std::optional<double> TriLocator::interpolate(std::span<const double> nodal, const Vec2& p) const {
  const int t = locate(p);
  if (t < 0) return std::nullopt;
  const auto l = barycentric(t, p);
  const auto& tri = mesh_->triangle(t);
  return l[0] * nodal[tri[0]] + l[1] * nodal[tri[1]] + l[2] * nodal[tri[2]];
}

}  // namespace plastiq
