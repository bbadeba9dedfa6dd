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

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "plastiq/mesh.hpp"
#include "plastiq/solver.hpp"

namespace plastiq {

/// Raised for configuration errors; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Boundary data for one segment: a constant or a table of
/// (arc length along the segment, value) pairs, linearly interpolated.
struct SegmentTable {
  std::vector<std::pair<double, double>> points;
  double at(double s) const;
};

struct SegmentConfig {
  int segment = 0;
  BoundaryKind kind = BoundaryKind::Dirichlet;
  std::optional<SegmentTable> w;
  std::optional<SegmentTable> g;
};

struct RunConfig {
  DomainSpec domain;
  bool domain_given = false;
  std::string oracle;  // empty: none
  std::vector<double> oracle_params;
  bool boundary_from_oracle = false;
  std::vector<SegmentConfig> segments;
  std::string fields = "solve";  // or "oracle"
  SolverConfig solver;

  double eps_sat = 0.02;
  double char_eps = 0.02;
  double convex_threshold = 0.02;

  std::string seeds = "grid";  // or "interface"
  int seed_grid = 12;
  double step_h = 0.5;
  double max_length = 0.0;  // 0: four times the bounding-box diagonal
  double on_tol_h = 0.05;
  double exclude_h = 10.0;
  double constancy_tol_h = 5.0;
  int levels = 5;

  std::vector<std::string> analyses;
  std::vector<std::uint64_t> probe_seeds{1, 2};
  std::vector<double> probe_step_ratios{0.5, 2.0};
  double probe_tol_factor = 10.0;

  // assertions; NaN or negative: not requested
  double assert_u_rel_l2 = -1.0;
  double assert_sigma_rel_l2 = -1.0;
  double assert_kkt_max = -1.0;
  int assert_char_components_max = -1;
  int assert_fans = -1;
  bool assert_no_loops = false;
  bool assert_uniqueness = false;
  bool assert_constancy = false;

  std::string out = "out";

  bool wants(const std::string& analysis) const;
};

extern const std::vector<std::string> kAnalyses;

/// Full schema with defaults, as printed by `plastiq schema`.
nlohmann::json config_schema();

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

struct RunResult {
  int exit_code = 0;  // 0 pass, 2 not converged, 3 assertion failed
  nlohmann::json report;
  std::vector<std::string> failures;
  double wall_seconds = 0.0;
};

/// Runs the configured pipeline and writes every artifact under config.out.
/// Configuration problems found late (e.g. missing boundary data for a mesh
/// segment) raise ConfigError.
RunResult run_pipeline(const RunConfig& config);

}  // namespace plastiq
