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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plastiq/analytic.hpp"
#include "plastiq/classify.hpp"
#include "plastiq/geometry.hpp"
#include "plastiq/mesh.hpp"
#include "plastiq/region.hpp"

namespace plastiq {

/// Continuous stress: nodal area-weighted averages of the cell values,
/// evaluated by barycentric interpolation and clamped to the unit ball.
class SigmaInterpolant {
 public:
  SigmaInterpolant(const TriMesh& mesh, std::span<const Vec2> sigma, std::vector<Vec2> discontinuities = {});

  /// nullopt outside the mesh.
  std::optional<Vec2> operator()(const Vec2& p) const;
  const Vec2& nodal(int v) const { return nodal_[v]; }
  const std::vector<Vec2>& discontinuities() const { return discontinuities_; }
  const TriLocator& locator() const { return locator_; }
  const TriMesh& mesh() const { return *mesh_; }

 private:
  const TriMesh* mesh_;
  TriLocator locator_;
  std::vector<Vec2> nodal_;
  std::vector<Vec2> discontinuities_;
};

/// What the tracer needs from a stress field. Both the interpolant and the
/// closed-form oracles fit.
struct TraceField {
  std::function<std::optional<Vec2>(Vec2)> sigma;  // nullopt outside the domain
  std::function<std::optional<double>(Vec2)> u;    // may be empty
  std::vector<Vec2> discontinuities;
};

TraceField make_field(const SigmaInterpolant& interp, std::span<const double> u_nodal = {});
TraceField make_field(const AnalyticSolution& oracle);

enum class Termination { Boundary, ZeroSigma, DiscontinuityPoint, MaxLength, LoopDetected };
std::string to_string(Termination t);

struct Characteristic {
  std::vector<Vec2> points;
  std::vector<double> s;      // arc length
  std::vector<Vec2> sigma;    // sampled stress
  std::vector<double> u;      // sampled displacement (NaN without u)
  Termination termination = Termination::MaxLength;
  int direction = 1;
  double step = 0.0;
};

/// Classic RK4 on x' = direction * perp(sigma) / |sigma|, so the curve is
/// parametrized by arc length. Throws if x0 is outside the domain.
Characteristic trace(const TraceField& field, Vec2 x0, int direction, double step, double max_length);

/// Pointwise region query, with an optional distance to the interface.
struct RegionQuery {
  std::function<Region(Vec2)> region;
  std::function<double(Vec2)> interface_distance;  // may be empty
};

RegionQuery make_query(const RegionMap& map, const TriLocator& locator);
RegionQuery make_query(const AnalyticSolution& oracle);

struct SubArc {
  int begin = 0;  // point indices, inclusive
  int end = 0;
  double length = 0.0;
  double straightness = 0.0;     // max distance to the chord
  double sigma_constancy = 0.0;  // max |sigma(s) - sigma(mid)|
  double u_constancy = 0.0;      // max |u(s) - u(mid)|, 0 without u
};

struct ConstancyRecord {
  std::vector<SubArc> arcs;
  int skipped = 0;  // plastic runs with fewer than 3 points
  double max_straightness = 0.0;
  double max_sigma_constancy = 0.0;
  double max_u_constancy = 0.0;

  bool passes(double tol) const {
    return max_straightness <= tol && max_sigma_constancy <= tol && max_u_constancy <= tol;
  }
};

/// Straightness and constancy along the maximal sub-arcs inside the plastic
/// region. Points within exclude_radius of a field discontinuity are left
/// out of the constancy measures.
ConstancyRecord straightness_and_constancy(const Characteristic& c, const RegionQuery& q,
                                           std::span<const Vec2> discontinuities = {},
                                           double exclude_radius = 0.0);

struct Fan {
  Vec2 apex;
  double angle_min = 0.0;  // polar angles of member centroids about the apex
  double angle_max = 0.0;
  double spread = 0.0;     // RMS distance of member apex estimates to the apex
  std::vector<int> members;
};

struct FanOptions {
  double apex_radius_h = 2.0;    // clustering radius and spread bound, in units of h
  double boundary_tol_h = 2.0;   // apex estimates kept within this distance of the boundary
  double line_tol_h = 2.0;       // member lines pass within this distance of the apex
  int min_members = 5;
  double min_sine = 0.02;        // reject nearly parallel line pairs
};

struct FanReport {
  std::vector<Fan> fans;
  int components = 0;  // connected groups of plastic cells outside every fan
  double h = 0.0;
};

FanReport detect_fans(const RegionMap& map, std::span<const Vec2> sigma, const TriMesh& mesh,
                      const FanOptions& opt = {});

struct LevelSetRecord {
  bool in_range = false;  // false: "level out of range"
  int points = 0;
  Vec2 centre;            // fitted line: centre + t * direction
  Vec2 direction;
  Vec2 midpoint;
  double rms = 0.0;
  double angle = 0.0;     // between direction and perp(sigma(midpoint)), in [0, pi/2]
};

/// Boundary of {u > level} inside the plastic cells, fitted by a line.
LevelSetRecord level_set_alignment(std::span<const double> u, double level, const RegionMap& map,
                                   std::span<const Vec2> sigma, const TriMesh& mesh);

enum class CrossingKind { TransversalPlasticToElastic, TransversalElasticToPlastic, TangentialAlongCharSegment,
                          EndpointTouch };
std::string to_string(CrossingKind k);

struct CrossingEvent {
  CrossingKind kind;
  int index = 0;  // first point of the event
  Vec2 where;
};

/// Interface events along a characteristic. Points closer than on_tol to the
/// interface count as on it; transversal crossings need a clean 5-point
/// window on each side.
std::vector<CrossingEvent> crossing_analysis(const Characteristic& c, const RegionQuery& q, double on_tol);

struct LoopAudit {
  int traces = 0;
  int loops = 0;                   // all LoopDetected terminations
  int plastic_touching = 0;        // traces with a point in the plastic region
  int plastic_touching_loops = 0;  // must be 0
  std::array<int, 5> terminations{};
  bool passes() const { return plastic_touching_loops == 0; }
};

LoopAudit no_loop_audit(const TraceField& field, std::span<const Vec2> seeds, const RegionQuery& q, double step,
                        double max_length, std::vector<Characteristic>* keep = nullptr);

/// Grid of seeds inside the field's domain, n per side of the bounding box,
/// at least 2 steps away from every discontinuity.
std::vector<Vec2> seed_grid(const TraceField& field, Vec2 lo, Vec2 hi, int n, double keep_out);

}  // namespace plastiq
