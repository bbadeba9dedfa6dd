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

namespace plastiq {

/// Linear-growth energy density: |x|^2/2 inside the unit ball, |x| - 1/2 outside.
double eval_W(const Vec2& xi);

/// Pointwise minimizer of the infimal convolution |.|^2/2 [] |.|: xi = sigma + p
/// with sigma the projection of xi onto the closed unit ball.
struct Split {
  Vec2 sigma;
  Vec2 p;
};

Split split_infconv(const Vec2& xi);

/// Projection onto the closed unit ball.
Vec2 project_ball(const Vec2& v);

/// Discrete relaxed energy:
///   sum_T |T| W(grad u|_T) + sum_{Dirichlet e} |e| |w_e - u_e| - sum_{Neumann e} |e| g_e u_e
/// with u_e the edge-midpoint trace. Summation order is fixed.
double primal_energy(std::span<const double> u, const TriMesh& mesh, const BoundaryData& bdata);

/// Energy of a (u, sigma, p) triple with plastic strain split into an interior
/// density (per triangle) and a Dirichlet-edge jump density (indexed by
/// boundary edge; Neumann entries are ignored). Throws `Error` naming the worst
/// cell or edge when grad u = sigma + p or p_e = w_e - u_e fails by more
/// than 1e-8.
double triple_energy(std::span<const double> u, std::span<const Vec2> sigma, std::span<const Vec2> p_interior,
                     std::span<const double> p_boundary, const TriMesh& mesh, const BoundaryData& bdata);

struct FlowRuleResidual {
  std::vector<double> cell;  // |p_T| - sigma_T . p_T
  std::vector<double> edge;  // |p_e| - (sigma.nu)_e p_e on Dirichlet edges, 0 elsewhere
  double max_cell = 0.0;
  double max_edge = 0.0;
};

/// Flow-rule complementarity residuals. `sigma_nu` holds the normal stress on
/// every boundary edge (only Dirichlet entries are read). Throws `Error` if
/// |sigma| exceeds 1 + 1e-6 anywhere.
FlowRuleResidual flow_rule_residual(std::span<const Vec2> sigma, std::span<const Vec2> p_interior,
                                    std::span<const double> p_boundary, const TriMesh& mesh,
                                    std::span<const double> sigma_nu);

struct SafeLoadReport {
  double max_norm = 0.0;            // max_T |tau_T|
  double max_div_residual = 0.0;    // max over interior nodes of |divergence_adjoint(tau)| / lumped mass
  double max_trace_residual = 0.0;  // max over Neumann edges of |tau . nu - g|
  double alpha = 0.0;
  double tolerance = 0.0;
  bool passes = false;
};

/// Checks a candidate safe-load certificate tau: |tau| <= alpha < 1, divergence
/// free in the interior, tau . nu = g on the Neumann boundary.
SafeLoadReport verify_safe_load(std::span<const Vec2> tau, const BoundaryData& bdata, double alpha,
                                const TriMesh& mesh, double tolerance = 1e-9);

}  // namespace plastiq
