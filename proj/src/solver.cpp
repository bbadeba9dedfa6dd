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

#include "plastiq/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "plastiq/energy.hpp"
#include "plastiq/parallel.hpp"

namespace plastiq {

void SolverConfig::validate() const {
  if (max_iter < 1) throw Error("solver: max_iter must be >= 1");
  if (!(tol > 0.0)) throw Error("solver: tol must be > 0");
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error("solver: theta must lie in [0, 1]");
  if (!(step_ratio > 0.0) || !std::isfinite(step_ratio)) throw Error("solver: step_ratio must be > 0");
  if (window < 1) throw Error("solver: window must be >= 1");
  if (check_every < 1) throw Error("solver: check_every must be >= 1");
  if (workers < 1) throw Error("solver: workers must be >= 1");
  if (!(trace_step_scale >= 0.0)) throw Error("solver: trace_step_scale must be >= 0");
}

double ResidualRecord::max() const {
  return std::max({div_interior, neumann_trace, ball_violation, flow_rule, dirichlet_flow_rule});
}

namespace {

struct Incidence {
  int tri;
  int k;
};

// Flattened operator data shared by the iteration and the residuals.
struct Operators {
  int nv = 0;
  int nt = 0;
  std::vector<int> vt_off;
  std::vector<Incidence> vt;
  std::vector<int> dir_edges;  // boundary edge ids of Dirichlet edges
  std::vector<int> ve_off;     // node -> incident Dirichlet edges (positions in dir_edges)
  std::vector<int> ve;
  std::vector<double> load;     // T_N^T L g
  std::vector<double> dir_len;  // sum of Dirichlet half-lengths at each node
  std::vector<std::uint8_t> on_neumann_only;

  Operators(const TriMesh& mesh, const BoundaryData& bdata) : nv(mesh.num_vertices()), nt(mesh.num_triangles()) {
    vt_off.assign(nv + 1, 0);
    for (int v = 0; v < nv; ++v) vt_off[v + 1] = vt_off[v] + static_cast<int>(mesh.vertex_triangles(v).size());
    vt.resize(vt_off[nv]);
    for (int v = 0; v < nv; ++v) {
      int pos = vt_off[v];
      for (int t : mesh.vertex_triangles(v)) {
        const auto& tri = mesh.triangle(t);
        vt[pos++] = {t, tri[0] == v ? 0 : (tri[1] == v ? 1 : 2)};
      }
    }
    load.assign(nv, 0.0);
    dir_len.assign(nv, 0.0);
    std::vector<int> count(nv, 0);
    std::vector<std::uint8_t> touches_dir(nv, 0);
    for (int b = 0; b < mesh.num_boundary_edges(); ++b) {
      const auto& be = mesh.boundary_edge(b);
      const double half = 0.5 * mesh.boundary_length(b);
      if (be.kind == BoundaryKind::Dirichlet) {
        dir_edges.push_back(b);
        for (int v : be.v) {
          ++count[v];
          dir_len[v] += half;
          touches_dir[v] = 1;
        }
      } else {
        for (int v : be.v) load[v] += half * bdata.g[b];
      }
    }
    ve_off.assign(nv + 1, 0);
    for (int v = 0; v < nv; ++v) ve_off[v + 1] = ve_off[v] + count[v];
    ve.resize(ve_off[nv]);
    std::vector<int> fill(ve_off.begin(), ve_off.end() - 1);
    for (int j = 0; j < static_cast<int>(dir_edges.size()); ++j)
      for (int v : mesh.boundary_edge(dir_edges[j]).v) ve[fill[v]++] = j;
    on_neumann_only.assign(nv, 0);
    for (int v = 0; v < nv; ++v) on_neumann_only[v] = mesh.is_boundary_vertex(v) && !touches_dir[v];
  }

  // (G^T A sigma)_v
  double flux(const TriMesh& mesh, std::span<const Vec2> sigma, int v) const {
    double acc = 0.0;
    for (int j = vt_off[v]; j < vt_off[v + 1]; ++j)
      acc += mesh.area(vt[j].tri) * dot(sigma[vt[j].tri], mesh.shape_gradients(vt[j].tri)[vt[j].k]);
    return acc;
  }
};

Vec2 cell_gradient(const TriMesh& mesh, std::span<const double> u, int t) {
  const auto& tri = mesh.triangle(t);
  const auto& gr = mesh.shape_gradients(t);
  return u[tri[0]] * gr[0] + u[tri[1]] * gr[1] + u[tri[2]] * gr[2];
}

double edge_trace(const TriMesh& mesh, std::span<const double> u, int b) {
  const auto& be = mesh.boundary_edge(b);
  return 0.5 * (u[be.v[0]] + u[be.v[1]]);
}

// Largest singular value of K = (grad, Dirichlet trace) from the lumped-mass
// metric on nodes to the area / length metrics on cells / edges.
double weighted_norm(const TriMesh& mesh, const Operators& ops, double trace_weight) {
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    std::vector<Vec2> g(ops.nt);
    for (int t = 0; t < ops.nt; ++t) g[t] = cell_gradient(mesh, x, t);
    for (int v = 0; v < ops.nv; ++v) {
      double acc = ops.flux(mesh, g, v);
      for (int j = ops.ve_off[v]; j < ops.ve_off[v + 1]; ++j) {
        const int b = ops.dir_edges[ops.ve[j]];
        acc += trace_weight * 0.5 * mesh.boundary_length(b) * edge_trace(mesh, x, b);
      }
      y[v] = acc / mesh.lumped_mass(v);
    }
  };
  auto inner = [&](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (int v = 0; v < ops.nv; ++v) s += mesh.lumped_mass(v) * a[v] * b[v];
    return s;
  };
  return std::sqrt(power_iteration(static_cast<std::size_t>(ops.nv), apply, inner, 1e-8, 20000));
}

struct State {
  std::vector<double> u;
  std::vector<Vec2> sigma;
  std::vector<double> lambda;  // per Dirichlet edge (indexed like ops.dir_edges)
};

ResidualRecord stopping_residuals(const TriMesh& mesh, const Operators& ops, const BoundaryData& bdata,
                                  const State& s) {
  ResidualRecord r;
  for (int v = 0; v < ops.nv; ++v) {
    const double f = ops.flux(mesh, s.sigma, v);
    if (!mesh.is_boundary_vertex(v)) {
      r.div_interior = std::max(r.div_interior, std::abs(f) / mesh.lumped_mass(v));
      continue;
    }
    double bal = f - ops.load[v];
    for (int j = ops.ve_off[v]; j < ops.ve_off[v + 1]; ++j)
      bal -= 0.5 * mesh.boundary_length(ops.dir_edges[ops.ve[j]]) * s.lambda[ops.ve[j]];
    r.neumann_trace = std::max(r.neumann_trace, std::abs(bal) / mesh.boundary_weight(v));
  }
  for (int t = 0; t < ops.nt; ++t) {
    const Vec2 sg = s.sigma[t];
    const Vec2 p = cell_gradient(mesh, s.u, t) - sg;
    r.ball_violation = std::max(r.ball_violation, norm(sg) - 1.0);
    r.flow_rule = std::max(r.flow_rule, norm(p) - dot(sg, p));
  }
  for (int j = 0; j < static_cast<int>(ops.dir_edges.size()); ++j) {
    const int b = ops.dir_edges[j];
    const double jump = bdata.w[b] - edge_trace(mesh, s.u, b);
    r.dirichlet_flow_rule = std::max(r.dirichlet_flow_rule, std::abs(jump) - s.lambda[j] * jump);
  }
  r.ball_violation = std::max(r.ball_violation, 0.0);
  return r;
}

}  // namespace

Solution solve(const TriMesh& mesh, const BoundaryData& bdata, const SolverConfig& config) {
  config.validate();
  bdata.validate(mesh);
  const auto t0 = std::chrono::steady_clock::now();
  const Operators ops(mesh, bdata);
  const int nv = ops.nv;
  const int nt = ops.nt;
  const int nd = static_cast<int>(ops.dir_edges.size());

  SolveReport rep;
  bool has_neumann = nd < mesh.num_boundary_edges();
  if (!has_neumann)
    rep.safe_load = "not-needed";
  else
    rep.safe_load = bdata.max_abs_g() == 0.0 ? "trivial" : "unverified";

  // Small safety margin on the estimate keeps tau_p tau_d |K|^2 strictly below 1.
  // The trace block has norm ~h^-1/2 against ~h^-1 for the gradient, so the
  // multiplier gets a larger step; the norm below accounts for it.
  const double kappa = config.trace_step_scale > 0.0 ? config.trace_step_scale : 4.0 / mesh.mesh_size();
  rep.operator_norm = 1.01 * weighted_norm(mesh, ops, kappa);
  rep.tau_dual = config.step_ratio / rep.operator_norm;
  rep.tau_primal = 1.0 / (config.step_ratio * rep.operator_norm);
  rep.tau_trace = kappa * rep.tau_dual;
  const double td = rep.tau_dual;
  const double tl = rep.tau_trace;
  const double tp = rep.tau_primal;

  State s;
  s.u.assign(nv, 0.0);
  s.sigma.assign(nt, Vec2{});
  s.lambda.assign(nd, 0.0);
  if (config.init == SolverConfig::Init::Random) {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    for (double& x : s.u) x = dist(rng);
    for (Vec2& x : s.sigma) {
      x.x = dist(rng);
      x.y = dist(rng);
    }
    for (double& x : s.lambda) x = dist(rng);
  }
  std::vector<double> ubar = s.u;
  std::vector<double> unew(nv);

  State best = s;
  double best_score = std::numeric_limits<double>::infinity();
  ResidualRecord best_res;
  double best_change = 0.0;
  int best_iter = 0;

  rep.history_iterations.push_back(0);
  rep.energy_history.push_back(primal_energy(s.u, mesh, bdata));
  const double div_scale = 1.0 + (has_neumann ? bdata.max_abs_g() : 0.0);

  int it = 0;
  for (it = 1; it <= config.max_iter; ++it) {
    parallel_for(nt, config.workers, [&](int b, int e) {
      for (int t = b; t < e; ++t)
        s.sigma[t] = project_ball((s.sigma[t] + td * cell_gradient(mesh, ubar, t)) / (1.0 + td));
    });
    for (int j = 0; j < nd; ++j) {
      const int b = ops.dir_edges[j];
      s.lambda[j] = std::clamp(s.lambda[j] + tl * (bdata.w[b] - edge_trace(mesh, ubar, b)), -1.0, 1.0);
    }
    std::atomic<bool> finite = true;
    parallel_for(nv, config.workers, [&](int b, int e) {
      bool ok = true;
      for (int v = b; v < e; ++v) {
        double r = ops.flux(mesh, s.sigma, v) - ops.load[v];
        for (int j = ops.ve_off[v]; j < ops.ve_off[v + 1]; ++j)
          r -= 0.5 * mesh.boundary_length(ops.dir_edges[ops.ve[j]]) * s.lambda[ops.ve[j]];
        unew[v] = s.u[v] - tp * r / mesh.lumped_mass(v);
        ok = ok && std::isfinite(unew[v]);
      }
      if (!ok) finite = false;
    });
    if (!finite) {
      std::ostringstream os;
      os << "solve: non-finite value (NaN) at iteration " << it;
      throw Error(os.str());
    }
    for (int v = 0; v < nv; ++v) {
      ubar[v] = unew[v] + config.theta * (unew[v] - s.u[v]);
      s.u[v] = unew[v];
    }

    if (it > 2 && it % config.check_every != 0 && it != config.max_iter) continue;

    const double energy = primal_energy(s.u, mesh, bdata);
    if (!std::isfinite(energy)) {
      std::ostringstream os;
      os << "solve: non-finite energy (NaN) at iteration " << it;
      throw Error(os.str());
    }
    rep.history_iterations.push_back(it);
    rep.energy_history.push_back(energy);
    // Earliest recorded energy inside the window.
    std::size_t ref = rep.history_iterations.size() - 1;
    while (ref > 0 && rep.history_iterations[ref - 1] >= it - config.window) --ref;
    if (ref == rep.history_iterations.size() - 1 && ref > 0) --ref;
    const double change = std::abs(energy - rep.energy_history[ref]) / std::max(1.0, std::abs(energy));

    ResidualRecord res = stopping_residuals(mesh, ops, bdata, s);
    const double score = std::max({res.div_interior / div_scale, res.neumann_trace, res.ball_violation,
                                   res.flow_rule, res.dirichlet_flow_rule});
    if (score < best_score) {
      best_score = score;
      best = s;
      best_res = res;
      best_change = change;
      best_iter = it;
    }
    if (score <= config.tol && change <= config.tol) {
      rep.converged = true;
      best = s;
      best_res = res;
      best_change = change;
      best_iter = it;
      break;
    }
  }
  rep.iterations = std::min(it, config.max_iter);
  (void)best_iter;

  Solution sol;
  sol.u = std::move(best.u);
  sol.sigma = std::move(best.sigma);
  sol.lambda.assign(mesh.num_boundary_edges(), 0.0);
  for (int j = 0; j < nd; ++j) sol.lambda[ops.dir_edges[j]] = best.lambda[j];
  sol.p = extract_plastic_strain(sol.u, sol.sigma, mesh, bdata);
  rep.stopping = best_res;
  rep.energy_change = best_change;
  rep.final_energy = primal_energy(sol.u, mesh, bdata);
  rep.kkt = kkt_residuals(sol.u, sol.sigma, sol.p, mesh, bdata);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  sol.report = std::move(rep);
  return sol;
}

PlasticStrain extract_plastic_strain(std::span<const double> u, std::span<const Vec2> sigma, const TriMesh& mesh,
                                     const BoundaryData& bdata) {
  if (u.size() != static_cast<std::size_t>(mesh.num_vertices()) ||
      sigma.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("extract_plastic_strain: field has wrong size");
  PlasticStrain p;
  p.interior.resize(sigma.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) p.interior[t] = cell_gradient(mesh, u, t) - sigma[t];
  p.boundary.assign(mesh.num_boundary_edges(), 0.0);
  for (int b = 0; b < mesh.num_boundary_edges(); ++b)
    if (mesh.boundary_edge(b).kind == BoundaryKind::Dirichlet) p.boundary[b] = bdata.w[b] - edge_trace(mesh, u, b);
  return p;
}

std::vector<double> weak_normal_stress(std::span<const Vec2> sigma, const TriMesh& mesh, const BoundaryData& bdata) {
  const Operators ops(mesh, bdata);
  std::vector<double> q(mesh.num_vertices(), 0.0);
  for (int v = 0; v < ops.nv; ++v)
    if (ops.dir_len[v] > 0.0) q[v] = (ops.flux(mesh, sigma, v) - ops.load[v]) / ops.dir_len[v];
  std::vector<double> out(mesh.num_boundary_edges());
  for (int b = 0; b < mesh.num_boundary_edges(); ++b) {
    const auto& be = mesh.boundary_edge(b);
    out[b] = be.kind == BoundaryKind::Dirichlet ? 0.5 * (q[be.v[0]] + q[be.v[1]]) : bdata.g[b];
  }
  return out;
}

ResidualRecord kkt_residuals(std::span<const double> u, std::span<const Vec2> sigma, const PlasticStrain& p,
                             const TriMesh& mesh, const BoundaryData& bdata) {
  if (u.size() != static_cast<std::size_t>(mesh.num_vertices()) ||
      sigma.size() != static_cast<std::size_t>(mesh.num_triangles()) || p.interior.size() != sigma.size() ||
      p.boundary.size() != static_cast<std::size_t>(mesh.num_boundary_edges()))
    throw Error("kkt_residuals: field has wrong size");
  bdata.validate(mesh);
  const Operators ops(mesh, bdata);
  ResidualRecord r;
  for (int v = 0; v < ops.nv; ++v) {
    if (!mesh.is_boundary_vertex(v))
      r.div_interior = std::max(r.div_interior, std::abs(ops.flux(mesh, sigma, v)));
    else if (ops.on_neumann_only[v])
      r.neumann_trace = std::max(r.neumann_trace, std::abs(ops.flux(mesh, sigma, v) - ops.load[v]));
  }
  for (int t = 0; t < ops.nt; ++t) {
    r.ball_violation = std::max(r.ball_violation, norm(sigma[t]) - 1.0);
    r.flow_rule = std::max(r.flow_rule, mesh.area(t) * (norm(p.interior[t]) - dot(sigma[t], p.interior[t])));
  }
  r.ball_violation = std::max(r.ball_violation, 0.0);
  const std::vector<double> sn = weak_normal_stress(sigma, mesh, bdata);
  for (int b : ops.dir_edges) {
    const double j = p.boundary[b];
    r.dirichlet_flow_rule =
        std::max(r.dirichlet_flow_rule, mesh.boundary_length(b) * std::abs(std::abs(j) - sn[b] * j));
  }
  return r;
}

double l1_distance(std::span<const double> a, std::span<const double> b, const TriMesh& mesh) {
  if (a.size() != b.size() || a.size() != static_cast<std::size_t>(mesh.num_vertices()))
    throw Error("l1_distance: size mismatch");
  double s = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v) s += mesh.lumped_mass(v) * std::abs(a[v] - b[v]);
  return s;
}

double l2_distance(std::span<const Vec2> a, std::span<const Vec2> b, const TriMesh& mesh) {
  if (a.size() != b.size() || a.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("l2_distance: size mismatch");
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) s += mesh.area(t) * norm2(a[t] - b[t]);
  return std::sqrt(s);
}

UniquenessReport uniqueness_probe(const TriMesh& mesh, const BoundaryData& bdata,
                                  const std::vector<SolverConfig>& configs) {
  if (configs.size() < 2) throw Error("uniqueness_probe: need at least two configs");
  UniquenessReport rep;
  rep.runs = static_cast<int>(configs.size());
  rep.pure_dirichlet = true;
  for (const auto& be : mesh.boundary_edges()) rep.pure_dirichlet = rep.pure_dirichlet && be.kind == BoundaryKind::Dirichlet;
  std::vector<Solution> sols;
  for (const auto& c : configs) sols.push_back(solve(mesh, bdata, c));
  const auto n = configs.size();
  rep.u_l1.assign(n, std::vector<double>(n, 0.0));
  rep.sigma_l2.assign(n, std::vector<double>(n, 0.0));
  rep.inconclusive.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    rep.reports.push_back(sols[i].report);
    for (std::size_t j = 0; j < n; ++j) {
      rep.u_l1[i][j] = l1_distance(sols[i].u, sols[j].u, mesh);
      rep.sigma_l2[i][j] = l2_distance(sols[i].sigma, sols[j].sigma, mesh);
      rep.inconclusive[i][j] = !sols[i].report.converged || !sols[j].report.converged;
      rep.max_u_l1 = std::max(rep.max_u_l1, rep.u_l1[i][j]);
      rep.max_sigma_l2 = std::max(rep.max_sigma_l2, rep.sigma_l2[i][j]);
    }
  }
  return rep;
}

}  // namespace plastiq
