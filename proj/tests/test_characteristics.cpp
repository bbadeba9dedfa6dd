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
#include "plastiq/characteristics.hpp"

using namespace plastiq;

namespace {

bool in_box(Vec2 p) { return p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1; }

TraceField constant_field(Vec2 s) {
  TraceField f;
  f.sigma = [s](Vec2 p) -> std::optional<Vec2> {
    if (!in_box(p)) return std::nullopt;
    return s;
  };
  return f;
}

// sigma = e_r on 0.5 < r < 2: characteristics are circles
TraceField radial_field() {
  TraceField f;
  f.sigma = [](Vec2 p) -> std::optional<Vec2> {
    const double r = norm(p);
    if (r < 0.5 || r > 2) return std::nullopt;
    return Vec2{p.x / r, p.y / r};
  };
  return f;
}

RegionQuery uniform(Region r) {
  return {[r](Vec2) { return r; }, {}};
}

double max_chord_distance(const Characteristic& c) {
  const Vec2 a = c.points.front(), b = c.points.back();
  const Vec2 d = (b - a) / norm(b - a);
  double m = 0;
  for (const Vec2& p : c.points) m = std::max(m, std::abs(cross(d, p - a)));
  return m;
}

}  // namespace

TEST_CASE("constant field gives a vertical segment") {
  const Characteristic c = trace(constant_field({1, 0}), {0.5, 0.5}, 1, 0.01, 10);
  CHECK(c.termination == Termination::Boundary);
  CHECK(c.points.back().y == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(c.s.back() == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(max_chord_distance(c) < 1e-12);
  const Characteristic d = trace(constant_field({1, 0}), {0.5, 0.5}, -1, 0.01, 10);
  CHECK(d.points.back().y == doctest::Approx(0.0).epsilon(1e-4));
  CHECK_THROWS_AS(trace(constant_field({1, 0}), {2, 2}, 1, 0.01, 10), Error);
}

TEST_CASE("other terminations") {
  CHECK(trace(constant_field({0.05, 0}), {0.5, 0.5}, 1, 0.01, 10).termination == Termination::ZeroSigma);
  const Characteristic c = trace(constant_field({0, 1}), {0.5, 0.5}, 1, 0.01, 0.2);
  CHECK(c.termination == Termination::MaxLength);
  CHECK(c.s.back() == doctest::Approx(0.2).epsilon(0.06));
  CHECK(to_string(Termination::LoopDetected) != to_string(Termination::Boundary));
}

TEST_CASE("radial field closes a circle") {
  const Characteristic c = trace(radial_field(), {1, 0}, 1, 0.02, 100);
  CHECK(c.termination == Termination::LoopDetected);
  CHECK(c.s.back() == doctest::Approx(2 * std::numbers::pi).epsilon(0.05));
  for (const Vec2& p : c.points) CHECK(norm(p) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fan rays run straight to the apex") {
  const AnalyticSolution fan = make_oracle("monotone_fan");
  const TraceField f = make_field(fan);
  const double phi = 0.6;
  const Vec2 x0{0.5 * std::cos(phi), 0.5 * std::sin(phi)};
  for (int dir : {1, -1}) {
    const Characteristic c = trace(f, x0, dir, 0.01, 10);
    CHECK(max_chord_distance(c) < 1e-9);
    const Vec2 end = c.points.back();
    const bool inward = norm(end) < 0.5;
    if (inward) {
      CHECK(c.termination == Termination::DiscontinuityPoint);
      CHECK(norm(end) < 0.03);
    } else {
      CHECK(c.termination == Termination::Boundary);
      CHECK(norm(end) == doctest::Approx(1.0).epsilon(1e-3));
    }
    // u is constant along the ray
    for (double u : c.u) CHECK(u == doctest::Approx(2 * phi));
  }
}

TEST_CASE("constancy on a plastic trace") {
  const Characteristic c = trace(constant_field({0.6, 0.8}), {0.5, 0.5}, 1, 0.01, 10);
  const ConstancyRecord r = straightness_and_constancy(c, uniform(Region::Plastic));
  REQUIRE(r.arcs.size() == 1);
  CHECK(r.max_straightness < 1e-12);
  CHECK(r.max_sigma_constancy == 0.0);
  CHECK(r.passes(1e-9));
  CHECK(straightness_and_constancy(c, uniform(Region::Elastic)).arcs.empty());

  // the radial field bends: a quarter circle is far from its chord
  const Characteristic q = trace(radial_field(), {1, 0}, 1, 0.01, std::numbers::pi / 2);
  const ConstancyRecord rq = straightness_and_constancy(q, uniform(Region::Plastic));
  CHECK(rq.max_straightness > 0.25);
  CHECK(rq.max_sigma_constancy > 0.5);
}

TEST_CASE("crossing kinds") {
  const TraceField up = constant_field({1, 0});
  const Characteristic c = trace(up, {0.5, 0.05}, 1, 0.01, 10);

  SUBCASE("transversal") {
    const RegionQuery q{[](Vec2 p) { return p.y < 0.5 ? Region::Plastic : Region::Elastic; },
                        [](Vec2 p) { return std::abs(p.y - 0.5); }};
    const auto ev = crossing_analysis(c, q, 1e-9);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].kind == CrossingKind::TransversalPlasticToElastic);
    CHECK(ev[0].where.y == doctest::Approx(0.5).epsilon(0.05));
    const Characteristic down = trace(up, {0.5, 0.95}, -1, 0.01, 10);
    const auto ev2 = crossing_analysis(down, q, 1e-9);
    REQUIRE(ev2.size() == 1);
    CHECK(ev2[0].kind == CrossingKind::TransversalElasticToPlastic);
  }
  SUBCASE("tangential") {
    const RegionQuery q{[](Vec2 p) { return p.x < 0.5 ? Region::Plastic : Region::Elastic; },
                        [](Vec2 p) { return std::abs(p.x - 0.5); }};
    const auto ev = crossing_analysis(c, q, 1e-6);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].kind == CrossingKind::TangentialAlongCharSegment);
  }
  SUBCASE("endpoint touch") {
    // plastic disk tangent to the line x = 0.5 at (0.5, 0.5)
    const Vec2 o{0.6, 0.5};
    const RegionQuery q{[o](Vec2 p) { return distance(p, o) < 0.1 ? Region::Plastic : Region::Elastic; },
                        [o](Vec2 p) { return std::abs(distance(p, o) - 0.1); }};
    const auto ev = crossing_analysis(c, q, 1e-4);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].kind == CrossingKind::EndpointTouch);
  }
  SUBCASE("no interface") {
    CHECK(crossing_analysis(c, uniform(Region::Elastic), 1e-9).empty());
  }
}

TEST_CASE("loop audit") {
  const TraceField f = radial_field();
  const std::vector<Vec2> seeds{{1, 0}, {0, 1.5}};
  LoopAudit a = no_loop_audit(f, seeds, uniform(Region::Elastic), 0.02, 100);
  CHECK(a.traces == 4);
  CHECK(a.loops == 4);
  CHECK(a.passes());
  a = no_loop_audit(f, seeds, uniform(Region::Plastic), 0.02, 100);
  CHECK(a.plastic_touching_loops == 4);
  CHECK_FALSE(a.passes());
}

TEST_CASE("seed grid") {
  const auto seeds = seed_grid(radial_field(), {-2, -2}, {2, 2}, 10, 0.0);
  CHECK_FALSE(seeds.empty());
  for (const Vec2& p : seeds) CHECK((norm(p) >= 0.5 && norm(p) <= 2));
  CHECK(seeds.size() < 100);
}

TEST_CASE("interpolant reproduces a constant field") {
  const TriMesh m = build_domain(DomainSpec::disk(1, 0.1));
  const std::vector<Vec2> sigma(m.num_triangles(), Vec2{0.3, 0.4});
  const SigmaInterpolant s(m, sigma);
  const auto v = s({0.2, -0.1});
  REQUIRE(v);
  CHECK(norm(*v - Vec2{0.3, 0.4}) < 1e-14);
  CHECK_FALSE(s({2, 0}));
  std::vector<Vec2> big(m.num_triangles(), Vec2{3, 4});
  const SigmaInterpolant sb(m, big);
  CHECK(norm(*sb({0, 0})) <= 1 + 1e-15);
}

TEST_CASE("parallel plastic field has no fan") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.05));
  const std::vector<Vec2> sigma(m.num_triangles(), Vec2{0, 1});
  const RegionMap r = analyze_regions(sigma, m);
  const FanReport f = detect_fans(r, sigma, m);
  CHECK(f.fans.empty());
  CHECK(f.components == 1);
  CHECK(r.char_boundary.components <= 2);
}

TEST_CASE("sampled fan is found at its apex") {
  const AnalyticSolution fan = make_oracle("monotone_fan");
  const TriMesh m = fan.mesh(0.025);
  const auto sigma = fan.sample_sigma(m);
  const RegionMap r = region_map_from_labels(fan.sample_region(m), m);
  const FanReport f = detect_fans(r, sigma, m);
  REQUIRE(f.fans.size() == 1);
  CHECK(norm(f.fans[0].apex) <= 2 * m.mesh_size());
  CHECK(f.fans[0].angle_max - f.fans[0].angle_min > 1.2);
}

TEST_CASE("level sets follow characteristics") {
  const TriMesh m = build_domain(DomainSpec::rectangle(1, 1, 0.05));
  const std::vector<Vec2> sigma(m.num_triangles(), Vec2{1, 0});
  std::vector<double> u(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) u[v] = 2 * m.vertex(v).x;
  const RegionMap r = analyze_regions(sigma, m);
  const LevelSetRecord l = level_set_alignment(u, 0.9, r, sigma, m);
  CHECK(l.in_range);
  CHECK(l.angle < 1e-9);
  CHECK(l.midpoint.x == doctest::Approx(0.45));
  CHECK_FALSE(level_set_alignment(u, 5.0, r, sigma, m).in_range);
  // a level line across the stress direction is misaligned
  for (int v = 0; v < m.num_vertices(); ++v) u[v] = m.vertex(v).y;
  CHECK(level_set_alignment(u, 0.5, r, sigma, m).angle == doctest::Approx(std::numbers::pi / 2));
}
