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

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plastiq/geometry.hpp"

namespace plastiq {

enum class BoundaryKind : std::uint8_t { Dirichlet, Neumann };

std::string to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& s);

/// A boundary edge, oriented so that the domain lies on its left.
struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryKind kind = BoundaryKind::Dirichlet;
  int segment = 0;
};

/// An undirected mesh edge with its one or two incident triangles.
struct Edge {
  std::array<int, 2> v{};
  std::array<int, 2> tri{-1, -1};  // tri[1] == -1 on the boundary
  bool on_boundary() const { return tri[1] < 0; }
};

/// Named domain plus discretization parameters.
struct DomainSpec {
  enum class Kind { Rectangle, Disk, Annulus, HalfDisk, FanSector, Triangle };

  Kind kind = Kind::Rectangle;
  double width = 1.0;   // rectangle
  double height = 1.0;  // rectangle
  double radius = 1.0;  // disk, half disk, fan sector
  double inner = 1.0;   // annulus
  double outer = 2.0;   // annulus
  double angle = std::numbers::pi / 2;  // fan sector opening, measured from the +x axis
  std::array<Vec2, 3> corners{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}};  // triangle
  /// Radii that must appear as mesh rings (curved domains only).
  std::vector<double> radial_breaks;
  double edge_length = 0.1;

  static DomainSpec rectangle(double w, double h, double edge);
  static DomainSpec disk(double r, double edge);
  static DomainSpec annulus(double a, double b, double edge);
  static DomainSpec half_disk(double b, double edge, std::vector<double> breaks = {});
  static DomainSpec fan_sector(double r, double angle, double edge);
  static DomainSpec triangle(Vec2 p0, Vec2 p1, Vec2 p2, double edge);

  std::string name() const;
};

/// Conforming triangulation of a polygonal domain with marked boundary edges.
///
/// Immutable after construction. The constructor checks every structural
/// invariant (positive areas, conformity, closed boundary loops, exactly one
/// marker per boundary edge) and throws `Error` on violation. Boundary edges
/// are re-oriented so the domain lies on their left.
class TriMesh {
 public:
  TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
          std::vector<BoundaryEdge> boundary);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_boundary_edges() const { return static_cast<int>(boundary_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const Vec2& vertex(int i) const { return vertices_[i]; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  double area(int t) const { return areas_[t]; }
  const std::vector<double>& areas() const { return areas_; }
  Vec2 centroid(int t) const;
  double total_area() const { return total_area_; }

  /// Gradients of the three P1 hat functions on triangle t.
  const std::array<Vec2, 3>& shape_gradients(int t) const { return grads_[t]; }
  /// Neighbor across the edge opposite local vertex k, or -1.
  const std::array<int, 3>& neighbors(int t) const { return neighbors_[t]; }

  std::span<const int> vertex_triangles(int v) const;
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  /// Lumped P1 mass: one third of the area of each incident triangle.
  double lumped_mass(int v) const { return lumped_mass_[v]; }
  /// Half the length of each incident boundary edge (0 for interior vertices).
  double boundary_weight(int v) const { return boundary_weight_[v]; }

  const std::vector<Edge>& edges() const { return edges_; }
  /// Edge ids of triangle t; entry k is the edge opposite local vertex k.
  const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[t]; }
  /// Boundary edge index of a mesh edge, -1 for interior edges.
  int edge_boundary_index(int edge) const { return edge_boundary_[edge]; }

  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  const BoundaryEdge& boundary_edge(int e) const { return boundary_[e]; }
  double boundary_length(int e) const { return boundary_len_[e]; }
  Vec2 boundary_midpoint(int e) const;
  /// Outward unit normal of boundary edge e.
  Vec2 boundary_normal(int e) const { return boundary_normal_[e]; }
  /// Triangle owning boundary edge e.
  int boundary_triangle(int e) const { return boundary_tri_[e]; }
  /// Arc-length coordinates of the edge endpoints along its segment.
  std::array<double, 2> boundary_arclength(int e) const { return boundary_s_[e]; }
  /// Total length of each segment, indexed by segment id (0 if unused).
  double segment_length(int segment) const;
  std::vector<int> segment_ids() const;

  /// Mean edge length, the nominal mesh size.
  double mesh_size() const { return mesh_size_; }
  double max_edge_length() const { return max_edge_; }

  /// Copy with boundary kinds reassigned by `rule(edge index)`.
  TriMesh with_boundary_kinds(const std::function<BoundaryKind(int)>& rule) const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_;

  std::vector<double> areas_;
  std::vector<std::array<Vec2, 3>> grads_;
  std::vector<std::array<int, 3>> neighbors_;
  std::vector<int> vt_offsets_;
  std::vector<int> vt_list_;
  std::vector<std::uint8_t> boundary_vertex_;
  std::vector<double> lumped_mass_;
  std::vector<double> boundary_weight_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<int> edge_boundary_;
  std::vector<double> boundary_len_;
  std::vector<Vec2> boundary_normal_;
  std::vector<int> boundary_tri_;
  std::vector<std::array<double, 2>> boundary_s_;
  std::vector<double> segment_len_;
  double total_area_ = 0.0;
  double mesh_size_ = 0.0;
  double max_edge_ = 0.0;
};

/// Per-boundary-edge data. `w` is finite exactly on Dirichlet edges and `g`
/// exactly on Neumann edges; the other entries are NaN.
struct BoundaryData {
  std::vector<double> w;
  std::vector<double> g;

  static BoundaryData zeros(const TriMesh& mesh);
  /// Samples w and g at edge midpoints.
  static BoundaryData sample(const TriMesh& mesh, const std::function<double(Vec2)>& w,
                             const std::function<double(Vec2)>& g);
  /// Throws `Error` unless the data matches the mesh markers and is finite.
  void validate(const TriMesh& mesh) const;
  double max_abs_g() const;
};

TriMesh build_domain(const DomainSpec& spec);

/// Exact gradient of the piecewise-affine interpolant, one vector per triangle.
std::vector<Vec2> gradient(std::span<const double> u, const TriMesh& mesh);

/// Negative transpose of `gradient` with area weights:
///   result_i = -sum_T area(T) * sigma_T . grad(phi_i)|_T.
std::vector<double> divergence_adjoint(std::span<const Vec2> sigma, const TriMesh& mesh);

/// Midpoint trace of the affine interpolant on every boundary edge.
std::vector<double> boundary_trace(std::span<const double> u, const TriMesh& mesh);

/// Spectral norm of the (unweighted) gradient matrix, by power iteration.
double operator_norm(const TriMesh& mesh);

/// Power iteration for the largest eigenvalue of a self-adjoint positive
/// semidefinite operator. `inner` defines the inner product the operator is
/// self-adjoint in.
double power_iteration(std::size_t n,
                       const std::function<void(std::span<const double>, std::span<double>)>& apply,
                       const std::function<double(std::span<const double>, std::span<const double>)>& inner,
                       double rel_tol = 1e-9, int max_iter = 5000);

void save_mesh(const TriMesh& mesh, std::ostream& out);
TriMesh load_mesh(std::istream& in);

/// Uniform-grid point location over the triangles of a mesh.
class TriLocator {
 public:
  explicit TriLocator(const TriMesh& mesh);

  /// Triangle containing p (with a small tolerance), or -1 if p is outside.
  int locate(const Vec2& p) const;
  /// Barycentric coordinates of p with respect to triangle t.
  std::array<double, 3> barycentric(int t, const Vec2& p) const;
  bool inside(const Vec2& p) const { return locate(p) >= 0; }
  /// Euclidean distance from p to the polygonal boundary.
  double boundary_distance(const Vec2& p) const;
  /// Affine interpolation of nodal values at p; nullopt outside the mesh.
  std::optional<double> interpolate(std::span<const double> nodal, const Vec2& p) const;

  const TriMesh& mesh() const { return *mesh_; }

 private:
  std::vector<int> cells_near(const Vec2& p) const;

  const TriMesh* mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  double dx_ = 1.0, dy_ = 1.0;
  std::vector<std::vector<int>> buckets_;
  std::vector<std::vector<int>> boundary_buckets_;
};

}  // namespace plastiq
