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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "plastiq/analytic.hpp"
#include "plastiq/classify.hpp"

using namespace plastiq;

namespace {

std::vector<Vec2> field(const TriMesh& m, const std::function<Vec2(Vec2)>& f) {
  std::vector<Vec2> s(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) s[t] = f(m.centroid(t));
  return s;
}

}  // namespace

TEST_CASE("saturated half of a square") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.1));
  const auto sigma = field(m, [](Vec2 p) { return p.x < 0.5 ? Vec2{1, 0} : Vec2{0.3, 0}; });
  const RegionMap r = analyze_regions(sigma, m);
  CHECK(r.plastic_area(m) == doctest::Approx(0.5));
  CHECK_FALSE(r.empty_interior);
  CHECK(r.convexity.is_convex);
  CHECK(r.convexity.hull_area_deficit < 0.02);
  REQUIRE(r.sigma_interface.size() == 1);
  for (const Vec2& p : r.sigma_interface[0]) CHECK(p.x == doctest::Approx(0.5));

  // the stress is normal to x = 0 and to the interface, both are characteristic
  const CharBoundaryReport& cb = r.char_boundary;
  CHECK(cb.components >= 1);
  CHECK(cb.components <= 2);
  CHECK(cb.theorem_consistent);
  bool left = false;
  for (const CharSegment& s : cb.segments)
    if (std::abs(s.a.x) < 1e-12 && std::abs(s.b.x) < 1e-12) left = std::abs(s.length() - 1) < 1e-9;
  CHECK(left);
}

TEST_CASE("threshold and isolated cells") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.1));
  std::vector<Vec2> sigma(m.num_triangles(), Vec2{0.5, 0});
  sigma[17] = {0.99, 0};
  RegionMap r = classify_regions(sigma, m, 0.02);
  CHECK(r.plastic_count() == 0);
  CHECK(r.relabeled_isolated == 1);
  CHECK(r.empty_interior);
  sigma[17] = {0.97, 0};
  CHECK(classify_regions(sigma, m, 0.02).relabeled_isolated == 0);
  CHECK(classify_regions(std::vector<Vec2>(m.num_triangles()), m).plastic_count() == 0);
}

TEST_CASE("all elastic") {
  const TriMesh m = build_domain(DomainSpec::disk(1, 0.1));
  const RegionMap r = analyze_regions(std::vector<Vec2>(m.num_triangles(), Vec2{0.1, 0.2}), m);
  CHECK(r.convexity.empty);
  CHECK(r.char_boundary.components == 0);
  CHECK(r.interface_edges.empty());
}

TEST_CASE("an L-shaped plastic set is not convex") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.05));
  std::vector<Region> lab(m.num_triangles(), Region::Elastic);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const Vec2 c = m.centroid(t);
    if (c.x < 0.5 || c.y < 0.5) lab[t] = Region::Plastic;
  }
  const RegionMap r = region_map_from_labels(lab, m);
  const ConvexityReport cv = convexity_check(r, m);
  CHECK_FALSE(cv.empty);
  CHECK_FALSE(cv.is_convex);
  // hull of the L adds the triangle above the diagonal, half of 1/4
  CHECK(cv.hull_area_deficit == doctest::Approx((0.875 - 0.75) / 0.75).epsilon(0.1));
}

TEST_CASE("MacClintock oracle regions") {
  const AnalyticSolution a = macclintock(1, 2);
  const TriMesh m = a.mesh(0.05);
  const RegionMap r = analyze_regions(a.sample_sigma(m), m, 0.005);
  CHECK(r.plastic_area(m) == doctest::Approx(std::numbers::pi / 2).epsilon(0.05));
  CHECK(r.convexity.is_convex);
  CHECK(r.char_boundary.components <= 2);
}

TEST_CASE("elastic diagnostics on an affine field") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.1));
  std::vector<double> u(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) u[v] = 0.3 * m.vertex(v).x - 0.2 * m.vertex(v).y;
  const std::vector<Vec2> sigma(m.num_triangles(), Vec2{0.3, -0.2});
  const RegionMap r = classify_regions(sigma, m);
  const ElasticDiagnostics d = elastic_diagnostics(u, sigma, r, m);
  CHECK(d.passes);
  CHECK(d.elastic_cells == m.num_triangles());
  CHECK(d.max_sigma_minus_grad < 1e-12);
  CHECK(d.max_laplacian < 1e-12);
  CHECK(d.max_grad == doctest::Approx(std::sqrt(0.13)));

  // gradient above the ball in an elastic cell
  std::vector<double> steep(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) steep[v] = 1.2 * m.vertex(v).x;
  const ElasticDiagnostics bad = elastic_diagnostics(steep, sigma, r, m);
  CHECK_FALSE(bad.passes);
  CHECK(bad.max_sigma_minus_grad > 0.5);
}

TEST_CASE("edge chains") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.25));
  std::vector<int> boundary;
  for (int e = 0; e < static_cast<int>(m.edges().size()); ++e)
    if (m.edges()[e].on_boundary()) boundary.push_back(e);
  const auto chains = chain_edges(boundary, m);
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].size() == boundary.size() + 1);
  CHECK(chains[0].front() == chains[0].back());

  const std::vector<int> one{boundary[0]};
  const auto c1 = chain_edges(one, m);
  REQUIRE(c1.size() == 1);
  CHECK(c1[0].size() == 2);
}

TEST_CASE("straight pieces of a polyline") {
  const std::vector<Vec2> l{{0, 0}, {0.5, 0}, {1, 0}, {1, 0.5}, {1, 1}};
  const auto pieces = split_straight(l, 1e-3, 1e-9);
  REQUIRE(pieces.size() == 2);
  CHECK(pieces[0] == std::pair<int, int>{0, 2});
  CHECK(pieces[1] == std::pair<int, int>{2, 4});
  const std::vector<Vec2> line{{0, 0}, {1, 1e-6}, {2, 0}};
  CHECK(split_straight(line, 1e-3, 1e-9).size() == 1);
}

TEST_CASE("three plastic bands are flagged inconsistent") {
  // sigma = e_y: characteristics are horizontal, so band edges are never hit
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.05));
  const auto sigma = field(m, [](Vec2 p) {
    const bool band = (p.y > 0.1 && p.y < 0.25) || (p.y > 0.4 && p.y < 0.55) || (p.y > 0.7 && p.y < 0.85);
    return band ? Vec2{0, 1} : Vec2{0, 0.2};
  });
  const RegionMap r = analyze_regions(sigma, m);
  CHECK(r.char_boundary.components > 2);
  CHECK_FALSE(r.char_boundary.theorem_consistent);
}

TEST_CASE("fan sector edges are characteristic") {
  const AnalyticSolution fan = make_oracle("monotone_fan");
  const TriMesh m = fan.mesh(0.05);
  const RegionMap r = analyze_regions(fan.sample_sigma(m), m);
  REQUIRE(r.char_boundary.components == 2);
  for (const CharSegment& s : r.char_boundary.segments) {
    // radial: both ends on a line through the apex
    CHECK(std::abs(cross(s.a, s.b)) < 1e-9);
    CHECK(s.length() > 0.9);
  }
}
