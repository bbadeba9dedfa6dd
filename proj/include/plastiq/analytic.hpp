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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plastiq/geometry.hpp"
#include "plastiq/mesh.hpp"
#include "plastiq/region.hpp"
#include "plastiq/solver.hpp"

namespace plastiq {

/// Concentrated plastic strain on a curve, with constant density.
struct PlasticJump {
  std::string curve;
  double density = 0.0;
};

/// Closed-form solution, point-evaluable in Cartesian coordinates.
struct AnalyticSolution {
  std::string name;
  /// Empty for stress-only oracles.
  std::function<double(Vec2)> u;
  std::function<Vec2(Vec2)> sigma;
  std::function<Region(Vec2)> region;
  std::optional<PlasticJump> plastic_boundary_jump;
  DomainSpec domain_spec;
  /// Boundary kind of a boundary edge from its segment id and midpoint.
  /// Empty means pure Dirichlet.
  std::function<BoundaryKind(int segment, Vec2 midpoint)> marker;
  std::function<double(Vec2)> w;
  std::function<double(Vec2)> g;
  /// Distance to the elastic/plastic interface inside the domain; empty when
  /// there is none.
  std::function<double(Vec2)> interface_distance;
  /// Fan apexes and other points where sigma is discontinuous.
  std::vector<Vec2> singular_points;

  bool has_u() const { return static_cast<bool>(u); }
  /// Mesh of the domain at target edge length h, with markers applied.
  TriMesh mesh(double h) const;
  BoundaryData boundary_data(const TriMesh& mesh) const;
  std::vector<double> sample_u(const TriMesh& mesh) const;      // at vertices
  std::vector<Vec2> sample_sigma(const TriMesh& mesh) const;    // at centroids
  std::vector<Region> sample_region(const TriMesh& mesh) const; // at centroids
};

/// Half-disk of radius b with a boundary fan of radius a centred at (-a, 0).
/// Elastic branch: u = 2 sqrt(a r) sin(theta/2), sigma = grad u. The pair
/// sqrt(a/r)(sin(theta/2), cos(theta/2)) of the source is read in the polar
/// frame (e_r, e_theta); the Cartesian form is sqrt(a/r)(-sin(theta/2), cos(theta/2)),
/// fixed by continuity with the fan at r = a.
AnalyticSolution macclintock(double a, double b);

/// Annulus a < r < b, u = alpha at r = a, u = beta at r = b, with
/// |beta - alpha| > a ln(b/a). Purely elastic with a jump at r = a.
AnalyticSolution annulus(double a, double b, double alpha, double beta);

/// Sector fan with apex at the origin: u(r, theta) = h(theta), sigma = e_theta.
/// h is given by samples (theta_i, h_i), theta_0 = 0, linearly interpolated.
/// A repeated theta encodes an upward step. Radius R <= 1.
AnalyticSolution monotone_fan(std::vector<double> theta, std::vector<double> h, double R);

/// Nested-fan stress field on the triangle (0,0), (0,1), (1/2,1/2).
AnalyticSolution triangle_sigma();

/// Discrete Dirichlet energy of the P1 interpolant of triangle_sigma() over
/// the cells with centroid above y = 2^-m, on a mesh of size h.
double triangle_sigma_h1(int m, double h);

struct CompareResult {
  double u_rel_l2 = 0.0;      // NaN when the oracle has no u
  double sigma_rel_l2 = 0.0;
  /// Area with analytic label i and discrete label j (0 Elastic, 1 Plastic).
  double confusion[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double analytic_plastic_area = 0.0;
  double discrete_plastic_area = 0.0;
};

/// Relative L2 errors (u up to an additive constant, lumped-mass weighted;
/// sigma at centroids, area weighted). Labels are optional; when empty the
/// confusion matrix stays zero. Throws if the mesh leaves the analytic domain.
CompareResult compare(const AnalyticSolution& a, std::span<const double> u, std::span<const Vec2> sigma,
                      const TriMesh& mesh, std::span<const Region> labels = {});

/// Names accepted by make_oracle: macclintock, annulus, monotone_fan, triangle_sigma.
/// Uses the default parameters of the worked examples unless overridden.
AnalyticSolution make_oracle(const std::string& name, const std::vector<double>& params = {});
std::vector<std::string> oracle_names();

}  // namespace plastiq
