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
#include <limits>
#include <numbers>

#include "doctest.h"
#include "plastiq/analytic.hpp"
#include "plastiq/classify.hpp"
#include "plastiq/energy.hpp"
#include "plastiq/solver.hpp"

using namespace plastiq;

namespace {

BoundaryData affine_data(const TriMesh& m, double a) {
  return BoundaryData::sample(m, [a](Vec2 p) { return a * p.x; }, [](Vec2) { return 0.0; });
}

}  // namespace

TEST_CASE("config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.theta = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.step_ratio = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.max_iter = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.tol = -1;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("elastic affine data is reproduced") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.1));
  const BoundaryData bd = affine_data(m, 0.4);
  SolverConfig c;
  c.tol = 1e-6;
  const Solution s = solve(m, bd, c);
  CHECK(s.report.converged);
  double eu = 0, es = 0;
  for (int v = 0; v < m.num_vertices(); ++v) eu = std::max(eu, std::abs(s.u[v] - 0.4 * m.vertex(v).x));
  for (const Vec2& x : s.sigma) es = std::max(es, norm(x - Vec2{0.4, 0}));
  CHECK(eu < 1e-3);
  CHECK(es < 1e-3);
  CHECK(s.report.final_energy == doctest::Approx(0.08).epsilon(1e-3));
  for (double l : s.lambda) CHECK(std::abs(l) <= 1 + 1e-12);
  CHECK(analyze_regions(s.sigma, m).char_boundary.components <= 2);
}

TEST_CASE("steep affine data saturates the stress") {
  // w = 3x: u = 3x is a minimiser with sigma = (1, 0) everywhere
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.1));
  const BoundaryData bd = affine_data(m, 3);
  SolverConfig c;
  c.tol = 1e-5;
  const Solution s = solve(m, bd, c);
  // W(3) = 2.5 per unit area
  CHECK(s.report.final_energy == doctest::Approx(2.5).epsilon(1e-3));
  double area_sat = 0;
  for (int t = 0; t < m.num_triangles(); ++t)
    if (s.sigma[t].x > 0.99) area_sat += m.area(t);
  CHECK(area_sat > 0.95);
  CHECK(s.report.converged);
  CHECK(analyze_regions(s.sigma, m).char_boundary.components <= 2);
}

TEST_CASE("annulus jump appears on the inner circle") {
  const AnalyticSolution a = annulus(1, 2, 0, 2);
  const TriMesh m = a.mesh(0.1);
  const Solution s = solve(m, a.boundary_data(m), SolverConfig{});
  const CompareResult cr = compare(a, s.u, s.sigma, m);
  CHECK(cr.u_rel_l2 < 0.05);
  CHECK(cr.sigma_rel_l2 < 0.05);
  CHECK(s.report.converged);
  CHECK(analyze_regions(s.sigma, m).char_boundary.components <= 2);
  double jump = 0, len = 0;
  for (int e = 0; e < m.num_boundary_edges(); ++e) {
    if (norm(m.boundary_midpoint(e)) > 1.5) continue;
    jump += s.p.boundary[e] * m.boundary_length(e);
    len += m.boundary_length(e);
  }
  CHECK(std::abs(jump / len) == doctest::Approx(2 - std::log(2.0)).epsilon(0.05));
}

TEST_CASE("iteration cap returns an unconverged best iterate") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.2));
  SolverConfig c;
  c.max_iter = 5;
  const Solution s = solve(m, affine_data(m, 3), c);
  CHECK_FALSE(s.report.converged);
  CHECK(s.report.iterations == 5);
  CHECK(s.u.size() == static_cast<std::size_t>(m.num_vertices()));
  for (double x : s.u) CHECK(std::isfinite(x));
}

TEST_CASE("non-finite boundary data is rejected") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.2));
  BoundaryData bd = affine_data(m, 1);
  bd.w[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve(m, bd, SolverConfig{}), Error);
}

TEST_CASE("kkt residuals vanish on an exact discrete solution") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.1));
  const BoundaryData bd = affine_data(m, 0.5);
  std::vector<double> u(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) u[v] = 0.5 * m.vertex(v).x;
  const std::vector<Vec2> sigma(m.num_triangles(), Vec2{0.5, 0});
  const PlasticStrain p = extract_plastic_strain(u, sigma, m, bd);
  const ResidualRecord r = kkt_residuals(u, sigma, p, m, bd);
  CHECK(r.max() < 1e-12);

  // a stress outside the ball
  std::vector<Vec2> bad = sigma;
  bad[0] = {1.5, 0};
  CHECK(kkt_residuals(u, bad, p, m, bd).ball_violation == doctest::Approx(0.5));
  CHECK_THROWS_AS(kkt_residuals(std::vector<double>(2), sigma, p, m, bd), Error);
}

TEST_CASE("plastic strain split") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.2));
  const BoundaryData bd = BoundaryData::sample(m, [](Vec2 p) { return 3 * p.x + 1; }, [](Vec2) { return 0.0; });
  std::vector<double> u(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) u[v] = 3 * m.vertex(v).x;
  const std::vector<Vec2> sigma(m.num_triangles(), Vec2{1, 0});
  const PlasticStrain p = extract_plastic_strain(u, sigma, m, bd);
  for (const Vec2& q : p.interior) CHECK(norm(q - Vec2{2, 0}) < 1e-12);
  for (double j : p.boundary) CHECK(j == doctest::Approx(1.0));
}

TEST_CASE("field distances") {
  const TriMesh m = build_domain(DomainSpec::rectangle(2, 1, 0.2));
  const std::vector<double> a(m.num_vertices(), 1.0), b(m.num_vertices(), 1.5);
  CHECK(l1_distance(a, b, m) == doctest::Approx(1.0));
  const std::vector<Vec2> s(m.num_triangles(), Vec2{0, 0}), t(m.num_triangles(), Vec2{3, 4});
  CHECK(l2_distance(s, t, m) == doctest::Approx(5 * std::sqrt(2.0)));
  CHECK_THROWS_AS(l1_distance(a, std::vector<double>(1), m), Error);
}

TEST_CASE("uniqueness probe on pure Dirichlet data") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.1));
  std::vector<SolverConfig> cs;
  for (std::uint64_t seed : {1, 2})
    for (double r : {0.5, 2.0}) {
      SolverConfig c;
      c.init = SolverConfig::Init::Random;
      c.seed = seed;
      c.step_ratio = r;
      c.tol = 1e-4;
      cs.push_back(c);
    }
  const UniquenessReport rep = uniqueness_probe(m, affine_data(m, 3), cs);
  CHECK(rep.runs == 4);
  CHECK(rep.pure_dirichlet);
  CHECK(rep.max_sigma_l2 <= 10 * 1e-4 * 10);  // loose at this resolution
  CHECK(rep.u_l1.size() == 4);
  CHECK_THROWS_AS(uniqueness_probe(m, affine_data(m, 3), {SolverConfig{}}), Error);
}
