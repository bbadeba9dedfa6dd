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

#include <cstdint>
#include <string>
#include <vector>

#include "plastiq/geometry.hpp"
#include "plastiq/mesh.hpp"

namespace plastiq {

struct SolverConfig {
  enum class Init { Zeros, Random };

  int max_iter = 40000;
  /// Threshold on every stopping residual and on the relative energy change
  /// over `window` iterations.
  double tol = 1e-4;
  /// Extrapolation on the primal variable, in [0, 1].
  double theta = 1.0;
  /// Balance tau_dual / tau_primal = step_ratio^2.
  double step_ratio = 1.0;
  /// Dirichlet multiplier step relative to the stress step; 0 picks
  /// 4 / mesh_size.
  double trace_step_scale = 0.0;
  Init init = Init::Zeros;
  std::uint64_t seed = 0;
  int window = 100;
  int check_every = 10;
  int workers = 1;

  void validate() const;
};

/// The five first-order residuals, one per line of the optimality system that
/// admits a discrete counterpart. Key names are shared with the JSON report.
struct ResidualRecord {
  double div_interior = 0.0;
  double neumann_trace = 0.0;
  double ball_violation = 0.0;
  double flow_rule = 0.0;
  double dirichlet_flow_rule = 0.0;

  double max() const;
};

/// Plastic strain: interior density per triangle and Dirichlet jump density
/// w - u per boundary edge (0 on Neumann edges).
struct PlasticStrain {
  std::vector<Vec2> interior;
  std::vector<double> boundary;
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  std::vector<int> history_iterations;
  std::vector<double> energy_history;
  /// kkt_residuals() of the returned fields.
  ResidualRecord kkt;
  /// Pointwise residuals of the discrete saddle-point system (these drive the
  /// stopping test; they include the Dirichlet multiplier).
  ResidualRecord stopping;
  double energy_change = 0.0;
  double final_energy = 0.0;
  double operator_norm = 0.0;
  double tau_primal = 0.0;
  double tau_dual = 0.0;
  double tau_trace = 0.0;  // multiplier step
  double wall_seconds = 0.0;
  std::string safe_load;  // "not-needed", "trivial" (g = 0) or "unverified"
};

struct Solution {
  std::vector<double> u;
  std::vector<Vec2> sigma;
  PlasticStrain p;
  /// Dirichlet multiplier per boundary edge, in [-1, 1] (0 on Neumann edges).
  std::vector<double> lambda;
  SolveReport report;
};

/// Primal-dual hybrid gradient solve of the discrete relaxed problem. Returns
/// the best iterate (flagged not converged) when max_iter is exhausted.
/// Throws `Error` naming the iteration if a NaN appears.
Solution solve(const TriMesh& mesh, const BoundaryData& bdata, const SolverConfig& config);

/// Residuals of the optimality system for arbitrary fields, computed without
/// solver state. Nodal and cell residuals are in integrated form (weighted by
/// the local measure), which stays bounded on fields with isolated
/// singularities; the ball violation is pointwise.
ResidualRecord kkt_residuals(std::span<const double> u, std::span<const Vec2> sigma, const PlasticStrain& p,
                             const TriMesh& mesh, const BoundaryData& bdata);

/// Weak normal stress per boundary edge, recovered from sigma through the
/// boundary-node flux balance (Neumann load removed, Dirichlet share spread
/// over the incident Dirichlet edges). Neumann entries hold g.
std::vector<double> weak_normal_stress(std::span<const Vec2> sigma, const TriMesh& mesh, const BoundaryData& bdata);

PlasticStrain extract_plastic_strain(std::span<const double> u, std::span<const Vec2> sigma, const TriMesh& mesh,
                                     const BoundaryData& bdata);

struct UniquenessReport {
  int runs = 0;
  std::vector<std::vector<double>> u_l1;      // pairwise ||u_i - u_j||_{L1}
  std::vector<std::vector<double>> sigma_l2;  // pairwise ||sigma_i - sigma_j||_{L2}
  std::vector<std::vector<bool>> inconclusive;
  std::vector<SolveReport> reports;
  bool pure_dirichlet = false;
  double max_u_l1 = 0.0;
  double max_sigma_l2 = 0.0;
};

UniquenessReport uniqueness_probe(const TriMesh& mesh, const BoundaryData& bdata,
                                  const std::vector<SolverConfig>& configs);

double l1_distance(std::span<const double> a, std::span<const double> b, const TriMesh& mesh);
double l2_distance(std::span<const Vec2> a, std::span<const Vec2> b, const TriMesh& mesh);

}  // namespace plastiq
