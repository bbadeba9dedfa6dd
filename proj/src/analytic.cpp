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

#include "plastiq/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace plastiq {

std::string to_string(Region r) {
  switch (r) {
    case Region::Elastic: return "elastic";
    case Region::Plastic: return "plastic";
    case Region::Outside: return "outside";
  }
  return "?";
}

TriMesh AnalyticSolution::mesh(double h) const {
  DomainSpec spec = domain_spec;
  spec.edge_length = h;
  TriMesh m = build_domain(spec);
  if (!marker) return m;
  return m.with_boundary_kinds(
      [&](int e) { return marker(m.boundary_edge(e).segment, m.boundary_midpoint(e)); });
}

BoundaryData AnalyticSolution::boundary_data(const TriMesh& mesh) const {
  if (!w) throw Error(name + ": oracle carries no boundary data");
  auto gfn = g ? g : std::function<double(Vec2)>([](Vec2) { return 0.0; });
  return BoundaryData::sample(mesh, w, gfn);
}

std::vector<double> AnalyticSolution::sample_u(const TriMesh& mesh) const {
  if (!u) throw Error(name + ": oracle has no displacement");
  std::vector<double> out(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) out[v] = u(mesh.vertex(v));
  return out;
}

std::vector<Vec2> AnalyticSolution::sample_sigma(const TriMesh& mesh) const {
  std::vector<Vec2> out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) out[t] = sigma(mesh.centroid(t));
  return out;
}

std::vector<Region> AnalyticSolution::sample_region(const TriMesh& mesh) const {
  std::vector<Region> out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) out[t] = region(mesh.centroid(t));
  return out;
}

AnalyticSolution macclintock(double a, double b) {
  if (!(a > 0.0) || !(a < b)) throw Error("macclintock: need 0 < a < b");
  AnalyticSolution s;
  s.name = "macclintock";
  s.domain_spec = DomainSpec::half_disk(b, 0.1, {a});
  const Vec2 apex{-a, 0.0};
  // Tolerances absorb polygonal boundary points that sit a hair outside.
  const double slack = 1e-9 * b;
  s.region = [=](Vec2 p) {
    const double r = norm(p);
    if (p.y < -slack || r > b * (1.0 + 1e-9)) return Region::Outside;
    return r <= a ? Region::Plastic : Region::Elastic;
  };
  s.u = [=](Vec2 p) {
    const double r = norm(p);
    if (r > a) return 2.0 * std::sqrt(a * r) * std::sin(0.5 * std::atan2(std::max(p.y, 0.0), p.x));
    if (distance(p, apex) == 0.0) return 0.0;
    return 2.0 * a * std::sin(std::atan2(std::max(p.y, 0.0), p.x + a));
  };
  s.sigma = [=](Vec2 p) {
    const double r = norm(p);
    if (r > a) {
      const double th = 0.5 * std::atan2(std::max(p.y, 0.0), p.x);
      return std::sqrt(a / r) * Vec2{-std::sin(th), std::cos(th)};
    }
    const Vec2 d = p - apex;
    if (norm(d) == 0.0) return Vec2{0.0, 1.0};
    return normalized(perp(d));
  };
  s.marker = [=](int segment, Vec2 mid) {
    return segment == 1 && mid.x < -a ? BoundaryKind::Neumann : BoundaryKind::Dirichlet;
  };
  s.w = [=](Vec2 p) {
    if (std::abs(p.y) <= 1e-12 * b) return 0.0;  // diameter, right of the apex
    return 2.0 * std::sqrt(a * b) * std::sin(0.5 * std::atan2(p.y, p.x));
  };
  s.g = [](Vec2) { return 0.0; };
  s.interface_distance = [=](Vec2 p) { return std::abs(norm(p) - a); };
  s.singular_points = {apex};
  return s;
}

AnalyticSolution annulus(double a, double b, double alpha, double beta) {
  if (!(a > 0.0) || !(a < b)) throw Error("annulus: need 0 < a < b");
  if (!(std::abs(beta - alpha) > a * std::log(b / a)))
    throw Error("annulus: closed form needs |beta - alpha| > a ln(b/a)");
  AnalyticSolution s;
  s.name = "annulus";
  s.domain_spec = DomainSpec::annulus(a, b, 0.1);
  const double sg = beta > alpha ? 1.0 : -1.0;
  s.region = [=](Vec2 p) {
    const double r = norm(p);
    return r < a * (1.0 - 1e-9) || r > b * (1.0 + 1e-9) ? Region::Outside : Region::Elastic;
  };
  s.u = [=](Vec2 p) { return sg * a * std::log(norm(p) / b) + beta; };
  s.sigma = [=](Vec2 p) {
    const double r = norm(p);
    return (sg * a / (r * r)) * p;
  };
  const double ua = sg * a * std::log(a / b) + beta;
  s.plastic_boundary_jump = PlasticJump{"r = a", ua - alpha};
  const double mid = 0.5 * (a + b);
  s.w = [=](Vec2 p) { return norm(p) < mid ? alpha : beta; };
  return s;
}

AnalyticSolution monotone_fan(std::vector<double> theta, std::vector<double> h, double R) {
  if (theta.size() != h.size() || theta.size() < 2) throw Error("monotone_fan: need >= 2 matching samples");
  if (theta.front() != 0.0) throw Error("monotone_fan: samples must start at theta = 0");
  if (!(theta.back() > 0.0 && theta.back() < std::numbers::pi))
    throw Error("monotone_fan: sector angle must lie in (0, pi)");
  if (!(R > 0.0 && R <= 1.0)) throw Error("monotone_fan: need 0 < R <= 1");
  for (std::size_t i = 1; i < theta.size(); ++i) {
    const double dt = theta[i] - theta[i - 1];
    const double dh = h[i] - h[i - 1];
    if (dt < 0.0) throw Error("monotone_fan: theta samples must be nondecreasing");
    if (dt == 0.0 ? !(dh > 0.0) : !(dh / dt > 1.0)) {
      std::ostringstream os;
      os << "monotone_fan: slope <= 1 between samples " << i - 1 << " and " << i;
      throw Error(os.str());
    }
  }
  AnalyticSolution s;
  s.name = "monotone_fan";
  const double angle = theta.back();
  s.domain_spec = DomainSpec::fan_sector(R, angle, 0.1);
  auto hfn = [theta, h](double t) {
    t = std::clamp(t, theta.front(), theta.back());
    // Rightmost interval containing t, so a step takes its upper value.
    auto it = std::upper_bound(theta.begin(), theta.end(), t);
    std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - theta.begin(), 1), theta.size() - 1);
    const double dt = theta[i] - theta[i - 1];
    if (dt == 0.0) return h[i];
    return h[i - 1] + (h[i] - h[i - 1]) * (t - theta[i - 1]) / dt;
  };
  auto ang = [angle](Vec2 p) {
    double t = std::atan2(p.y, p.x);
    if (t < -0.5 * (2 * std::numbers::pi - angle)) t += 2 * std::numbers::pi;
    return t;
  };
  s.region = [=](Vec2 p) {
    const double t = ang(p);
    const double tol = 1e-9;
    if (norm(p) > R * (1.0 + tol) || t < -tol || t > angle + tol) return Region::Outside;
    return Region::Plastic;
  };
  s.u = [=](Vec2 p) { return hfn(ang(p)); };
  s.sigma = [=](Vec2 p) {
    if (norm(p) == 0.0) return Vec2{0.0, 1.0};
    return normalized(perp(p));
  };
  s.w = s.u;
  s.singular_points = {Vec2{0.0, 0.0}};
  return s;
}

AnalyticSolution triangle_sigma() {
  AnalyticSolution s;
  s.name = "triangle_sigma";
  s.domain_spec = DomainSpec::triangle({0.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, 0.1);
  const double tol = 1e-9;
  s.region = [=](Vec2 p) {
    if (p.x < -tol || p.y < p.x - tol || p.x + p.y > 1.0 + tol) return Region::Outside;
    return Region::Plastic;
  };
  s.sigma = [](Vec2 p) {
    const double sum = p.x + p.y;
    if (!(sum > 0.0)) return Vec2{0.0, 1.0};
    const int n = std::max(0, static_cast<int>(std::floor(-std::log2(std::min(sum, 1.0)))));
    const double half = std::ldexp(1.0, -n - 1);
    Vec2 d;
    double sign = 1.0;
    if (p.y >= half) {
      d = p - Vec2{half, half};  // b_n
    } else {
      d = p - Vec2{0.0, half};   // a_{n+1}
      sign = -1.0;
    }
    if (norm(d) == 0.0) return Vec2{0.0, 1.0};
    return sign * normalized(perp(d));
  };
  for (int n = 0; n < 30; ++n) {
    const double half = std::ldexp(1.0, -n - 1);
    s.singular_points.push_back({half, half});
    s.singular_points.push_back({0.0, half});
  }
  s.singular_points.push_back({0.0, 0.0});
  return s;
}

double triangle_sigma_h1(int m, double h) {
  const AnalyticSolution s = triangle_sigma();
  const TriMesh mesh = s.mesh(h);
  std::vector<double> sx(mesh.num_vertices()), sy(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2 q = s.sigma(mesh.vertex(v));
    sx[v] = q.x;
    sy[v] = q.y;
  }
  const double ycut = std::ldexp(1.0, -m);
  double e = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.centroid(t).y <= ycut) continue;
    const auto& tri = mesh.triangle(t);
    const auto& gr = mesh.shape_gradients(t);
    Vec2 gx{}, gy{};
    for (int k = 0; k < 3; ++k) {
      gx += sx[tri[k]] * gr[k];
      gy += sy[tri[k]] * gr[k];
    }
    e += mesh.area(t) * (norm2(gx) + norm2(gy));
  }
  return e;
}

CompareResult compare(const AnalyticSolution& a, std::span<const double> u, std::span<const Vec2> sigma,
                      const TriMesh& mesh, std::span<const Region> labels) {
  if (sigma.size() != static_cast<std::size_t>(mesh.num_triangles())) throw Error("compare: sigma has wrong size");
  if (!labels.empty() && labels.size() != sigma.size()) throw Error("compare: labels have wrong size");
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (a.region(mesh.centroid(t)) == Region::Outside) {
      std::ostringstream os;
      os << "compare: mesh is not compatible with the " << a.name << " domain (triangle " << t << " lies outside)";
      throw Error(os.str());
    }
  }
  CompareResult r;
  if (a.has_u() && !u.empty()) {
    if (u.size() != static_cast<std::size_t>(mesh.num_vertices())) throw Error("compare: u has wrong size");
    const std::vector<double> ex = a.sample_u(mesh);
    double mass = 0.0, mu = 0.0, me = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      mass += mesh.lumped_mass(v);
      mu += mesh.lumped_mass(v) * u[v];
      me += mesh.lumped_mass(v) * ex[v];
    }
    mu /= mass;
    me /= mass;
    double num = 0.0, den = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      const double d = (u[v] - mu) - (ex[v] - me);
      num += mesh.lumped_mass(v) * d * d;
      den += mesh.lumped_mass(v) * (ex[v] - me) * (ex[v] - me);
    }
    r.u_rel_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  } else {
    r.u_rel_l2 = std::numeric_limits<double>::quiet_NaN();
  }
  double num = 0.0, den = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Vec2 ex = a.sigma(mesh.centroid(t));
    num += mesh.area(t) * norm2(sigma[t] - ex);
    den += mesh.area(t) * norm2(ex);
  }
  r.sigma_rel_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const int i = a.region(mesh.centroid(t)) == Region::Plastic ? 1 : 0;
    if (i == 1) r.analytic_plastic_area += mesh.area(t);
    if (labels.empty()) continue;
    const int j = labels[t] == Region::Plastic ? 1 : 0;
    r.confusion[i][j] += mesh.area(t);
    if (j == 1) r.discrete_plastic_area += mesh.area(t);
  }
  return r;
}

std::vector<std::string> oracle_names() { return {"macclintock", "annulus", "monotone_fan", "triangle_sigma"}; }

AnalyticSolution make_oracle(const std::string& name, const std::vector<double>& params) {
  auto arg = [&](std::size_t i, double def) { return i < params.size() ? params[i] : def; };
  if (name == "macclintock") return macclintock(arg(0, 1.0), arg(1, 2.0));
  if (name == "annulus") return annulus(arg(0, 1.0), arg(1, 2.0), arg(2, 0.0), arg(3, 2.0));
  if (name == "monotone_fan") {
    // h(theta) = slope * theta on [0, angle]
    const double slope = arg(0, 2.0), angle = arg(1, std::numbers::pi / 2), R = arg(2, 1.0);
    return monotone_fan({0.0, angle}, {0.0, slope * angle}, R);
  }
  if (name == "triangle_sigma") return triangle_sigma();
  throw Error("unknown oracle '" + name + "' (expected macclintock, annulus, monotone_fan or triangle_sigma)");
}

}  // namespace plastiq
