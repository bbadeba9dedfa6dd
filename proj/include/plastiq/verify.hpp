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
#include <string>
#include <vector>

#include "plastiq/analytic.hpp"
#include "plastiq/characteristics.hpp"
#include "plastiq/solver.hpp"

namespace plastiq {

/// kkt_residuals of a sampled oracle. Oracles without u have no plastic
/// strain to test, so their two flow-rule entries are NaN.
ResidualRecord oracle_residuals(const AnalyticSolution& oracle, const TriMesh& mesh);

inline constexpr std::array<const char*, 5> kResidualNames{"div_interior", "neumann_trace", "ball_violation",
                                                           "flow_rule", "dirichlet_flow_rule"};
double residual_by_index(const ResidualRecord& r, int k);

/// Residuals on a refinement sequence. A residual passes when each halving
/// shrinks it by min_ratio, or when it already sits below `floor` (exactly
/// representable fields give round-off only); NaN entries are not applicable.
struct RateStudy {
  std::string oracle;
  std::vector<double> h;
  std::vector<ResidualRecord> records;
  std::array<std::vector<double>, 5> ratios;
  std::array<bool, 5> passes{};
  std::array<bool, 5> applicable{};
  bool all_pass() const;
};

RateStudy kkt_rate_study(const AnalyticSolution& oracle, const std::vector<double>& hs, double min_ratio = 1.5,
                         double floor = 1e-9);

struct StructureOptions {
  double eps_sat = 0.005;
  int seeds_per_side = 12;
  double step_h = 0.5;      // trace step in units of h
  double exclude_h = 10.0;  // constancy ignores points this close to a singular point
  double on_tol_h = 0.05;   // on-interface band for crossing analysis
  double tol_h = 5.0;       // pass threshold
  int levels = 5;
  /// Trace the closed-form field and use the exact regions instead of the
  /// reconstruction of the sampled field.
  bool exact = false;
};

/// Characteristic checks on one oracle at one mesh size: constancy along
/// plastic sub-arcs, level-set alignment, interface crossings, loops.
struct StructureReport {
  std::string oracle;
  double h = 0.0;
  double tol = 0.0;
  int arcs = 0;
  double max_straightness = 0.0;
  double max_sigma_constancy = 0.0;
  double max_u_constancy = 0.0;
  std::vector<double> levels;
  std::vector<LevelSetRecord> level_records;
  double max_level_angle = 0.0;
  std::array<int, 4> crossings{};  // by CrossingKind
  LoopAudit audit;

  bool constancy_passes() const;
  bool levels_pass() const;
  int non_transversal() const { return crossings[2] + crossings[3]; }
};

StructureReport structure_suite(const AnalyticSolution& oracle, double h, const StructureOptions& opt = {});

}  // namespace plastiq
