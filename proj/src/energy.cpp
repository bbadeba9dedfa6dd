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

#include "plastiq/energy.hpp"

#include <algorithm>
#include <sstream>

namespace plastiq {

double eval_W(const Vec2& xi) {
  const double r = norm(xi);
  return r <= 1.0 ? 0.5 * r * r : r - 0.5;
}

Vec2 project_ball(const Vec2& v) {
  const double r = norm(v);
  return r <= 1.0 ? v : v / r;
}

Split split_infconv(const Vec2& xi) {
  const Vec2 s = project_ball(xi);
  return {s, xi - s};
}

namespace {

void check_sizes(const TriMesh& mesh, std::size_t nu, std::size_t ncell, const char* who) {
  if (nu != static_cast<std::size_t>(mesh.num_vertices()))
    throw Error(std::string(who) + ": nodal field has wrong size");
  if (ncell != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error(std::string(who) + ": cell field has wrong size");
}

// Boundary part shared by both energies: Dirichlet penalty minus Neumann work.
double boundary_terms(std::span<const double> u, const TriMesh& mesh, const BoundaryData& bdata,
                      std::span<const double> jump) {
  double e = 0.0;
  for (int b = 0; b < mesh.num_boundary_edges(); ++b) {
    const auto& be = mesh.boundary_edge(b);
    const double len = mesh.boundary_length(b);
    const double ue = 0.5 * (u[be.v[0]] + u[be.v[1]]);
    if (be.kind == BoundaryKind::Dirichlet)
      e += len * std::abs(jump.empty() ? bdata.w[b] - ue : jump[b]);
    else
      e -= len * bdata.g[b] * ue;
  }
  return e;
}

}  // namespace

double primal_energy(std::span<const double> u, const TriMesh& mesh, const BoundaryData& bdata) {
  check_sizes(mesh, u.size(), static_cast<std::size_t>(mesh.num_triangles()), "primal_energy");
  bdata.validate(mesh);
  double e = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const auto& gr = mesh.shape_gradients(t);
    e += mesh.area(t) * eval_W(u[tri[0]] * gr[0] + u[tri[1]] * gr[1] + u[tri[2]] * gr[2]);
  }
  return e + boundary_terms(u, mesh, bdata, {});
}

double triple_energy(std::span<const double> u, std::span<const Vec2> sigma, std::span<const Vec2> p_interior,
                     std::span<const double> p_boundary, const TriMesh& mesh, const BoundaryData& bdata) {
  check_sizes(mesh, u.size(), sigma.size(), "triple_energy");
  if (p_interior.size() != sigma.size()) throw Error("triple_energy: interior plastic strain has wrong size");
  if (p_boundary.size() != static_cast<std::size_t>(mesh.num_boundary_edges()))
    throw Error("triple_energy: boundary plastic strain has wrong size");
  bdata.validate(mesh);

  const std::vector<Vec2> du = gradient(u, mesh);
  int worst_cell = -1;
  double worst_cell_err = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double err = norm(du[t] - sigma[t] - p_interior[t]);
    if (err > worst_cell_err) {
      worst_cell_err = err;
      worst_cell = t;
    }
  }
  if (worst_cell_err > 1e-8) {
    std::ostringstream os;
    os << "triple_energy: grad u != sigma + p on triangle " << worst_cell << " (mismatch " << worst_cell_err << ")";
    throw Error(os.str());
  }
  int worst_edge = -1;
  double worst_edge_err = 0.0;
  for (int b = 0; b < mesh.num_boundary_edges(); ++b) {
    const auto& be = mesh.boundary_edge(b);
    if (be.kind != BoundaryKind::Dirichlet) continue;
    const double err = std::abs(bdata.w[b] - 0.5 * (u[be.v[0]] + u[be.v[1]]) - p_boundary[b]);
    if (err > worst_edge_err) {
      worst_edge_err = err;
      worst_edge = b;
    }
  }
  if (worst_edge_err > 1e-8) {
    std::ostringstream os;
    os << "triple_energy: p != w - u on boundary edge " << worst_edge << " (mismatch " << worst_edge_err << ")";
    throw Error(os.str());
  }

  double e = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    e += mesh.area(t) * (0.5 * norm2(sigma[t]) + norm(p_interior[t]));
  return e + boundary_terms(u, mesh, bdata, p_boundary);
}

FlowRuleResidual flow_rule_residual(std::span<const Vec2> sigma, std::span<const Vec2> p_interior,
                                    std::span<const double> p_boundary, const TriMesh& mesh,
                                    std::span<const double> sigma_nu) {
  if (sigma.size() != static_cast<std::size_t>(mesh.num_triangles()) || p_interior.size() != sigma.size())
    throw Error("flow_rule_residual: cell field has wrong size");
  if (p_boundary.size() != static_cast<std::size_t>(mesh.num_boundary_edges()) ||
      sigma_nu.size() != p_boundary.size())
    throw Error("flow_rule_residual: edge field has wrong size");
  FlowRuleResidual r;
  r.cell.resize(sigma.size());
  r.edge.assign(p_boundary.size(), 0.0);
  for (std::size_t t = 0; t < sigma.size(); ++t) {
    const double s = norm(sigma[t]);
    if (s > 1.0 + 1e-6) {
      std::ostringstream os;
      os << "flow_rule_residual: |sigma| = " << s << " > 1 on triangle " << t;
      throw Error(os.str());
    }
    r.cell[t] = norm(p_interior[t]) - dot(sigma[t], p_interior[t]);
    r.max_cell = std::max(r.max_cell, r.cell[t]);
  }
  for (int b = 0; b < mesh.num_boundary_edges(); ++b) {
    if (mesh.boundary_edge(b).kind != BoundaryKind::Dirichlet) continue;
    r.edge[b] = std::abs(p_boundary[b]) - sigma_nu[b] * p_boundary[b];
    r.max_edge = std::max(r.max_edge, r.edge[b]);
  }
  return r;
}

SafeLoadReport verify_safe_load(std::span<const Vec2> tau, const BoundaryData& bdata, double alpha,
                                const TriMesh& mesh, double tolerance) {
  if (tau.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("verify_safe_load: cell field has wrong size");
  SafeLoadReport rep;
  rep.alpha = alpha;
  rep.tolerance = tolerance;
  for (const Vec2& t : tau) rep.max_norm = std::max(rep.max_norm, norm(t));
  const std::vector<double> div = divergence_adjoint(tau, mesh);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v)) continue;
    rep.max_div_residual = std::max(rep.max_div_residual, std::abs(div[v]) / mesh.lumped_mass(v));
  }
  for (int b = 0; b < mesh.num_boundary_edges(); ++b) {
    if (mesh.boundary_edge(b).kind != BoundaryKind::Neumann) continue;
    const double tn = dot(tau[mesh.boundary_triangle(b)], mesh.boundary_normal(b));
    rep.max_trace_residual = std::max(rep.max_trace_residual, std::abs(tn - bdata.g[b]));
  }
  rep.passes = alpha > 0.0 && alpha < 1.0 && rep.max_norm <= alpha && rep.max_div_residual <= tolerance &&
               rep.max_trace_residual <= tolerance;
  return rep;
}

}  // namespace plastiq
