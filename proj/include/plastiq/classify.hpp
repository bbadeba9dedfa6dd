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

#include <span>
#include <vector>

#include "plastiq/geometry.hpp"
#include "plastiq/mesh.hpp"
#include "plastiq/region.hpp"

namespace plastiq {

struct ConvexityReport {
  bool empty = true;  // no plastic cells: the test does not apply
  bool is_convex = false;
  double hull_area_deficit = 0.0;
  double hull_area = 0.0;  // area of the cells whose centroid lies in the hull
  double plastic_area = 0.0;
  double threshold = 0.02;
};

/// A straight piece of the characteristic boundary.
struct CharSegment {
  Vec2 a;
  Vec2 b;
  std::vector<int> edges;  // mesh edge ids
  double length() const { return distance(a, b); }
};

struct CharBoundaryReport {
  std::vector<CharSegment> segments;
  int components = 0;
  bool theorem_consistent = true;  // at most two segments
  double eps = 0.02;
  int candidate_edges = 0;  // |sigma.nu| test passed
  int hit_edges = 0;        // of those, removed because an interior line exits there
  int fragments = 0;        // chains shorter than two mesh edges, dropped
};

struct RegionMap {
  std::vector<Region> label;  // Elastic or Plastic per triangle
  double eps_sat = 0.02;
  int relabeled_isolated = 0;
  /// No plastic cell touches an interior vertex surrounded by plastic cells:
  /// the saturation set has empty interior at this resolution.
  bool empty_interior = true;
  std::vector<int> interface_edges;                 // mesh edge ids
  std::vector<std::vector<Vec2>> sigma_interface;   // polylines
  CharBoundaryReport char_boundary;
  ConvexityReport convexity;

  double plastic_area(const TriMesh& mesh) const;
  int plastic_count() const;
};

/// Labels cells Plastic iff |sigma| >= 1 - eps_sat, then drops plastic cells
/// without plastic neighbours. Fills the interface; characteristic boundary
/// and convexity are left for the dedicated calls (see analyze_regions).
RegionMap classify_regions(std::span<const Vec2> sigma, const TriMesh& mesh, double eps_sat = 0.02);

/// Map from given labels (synthetic tests, oracle regions); same post-processing.
RegionMap region_map_from_labels(std::vector<Region> labels, const TriMesh& mesh, double eps_sat = 0.02);

ConvexityReport convexity_check(const RegionMap& map, const TriMesh& mesh, double threshold = 0.02);

/// Edges of the plastic set's boundary where |sigma . nu| >= 1 - eps and no
/// straight characteristic from a plastic cell exits, merged into straight
/// segments. Empty when the plastic set has no interior.
CharBoundaryReport characteristic_boundary(const RegionMap& map, std::span<const Vec2> sigma, const TriMesh& mesh,
                                           double eps = 0.02);

/// classify_regions + characteristic_boundary + convexity_check.
RegionMap analyze_regions(std::span<const Vec2> sigma, const TriMesh& mesh, double eps_sat = 0.02,
                          double char_eps = 0.02, double convex_threshold = 0.02);

struct ElasticDiagnostics {
  double max_sigma_minus_grad = 0.0;  // elastic cells
  double max_laplacian = 0.0;         // |sum_T A grad u . grad phi_i| at nodes inside the elastic set
  double max_grad = 0.0;              // elastic cells off the interface band
  double max_grad_all = 0.0;          // every elastic cell
  double bound = 0.0;                 // 1 - eps_sat / 2
  int elastic_cells = 0;
  bool passes = true;
};

ElasticDiagnostics elastic_diagnostics(std::span<const double> u, std::span<const Vec2> sigma, const RegionMap& map,
                                       const TriMesh& mesh);

/// Sequences of vertices, one per maximal chain of the given edges. Chains
/// stop at vertices of degree other than 2; closed loops repeat the first
/// vertex at the end.
std::vector<std::vector<int>> chain_edges(std::span<const int> edge_ids, const TriMesh& mesh);

/// Greedy split of a polyline into straight pieces: a piece is kept while every
/// point lies within tol(length) of its chord. Returns index ranges [i, j].
std::vector<std::pair<int, int>> split_straight(std::span<const Vec2> pts, double rel_tol, double abs_tol);

}  // namespace plastiq
