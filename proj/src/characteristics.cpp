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

#include "plastiq/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace plastiq {

SigmaInterpolant::SigmaInterpolant(const TriMesh& mesh, std::span<const Vec2> sigma, std::vector<Vec2> discontinuities)
    : mesh_(&mesh), locator_(mesh), discontinuities_(std::move(discontinuities)) {
  if (sigma.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("SigmaInterpolant: sigma has wrong size");
  nodal_.assign(mesh.num_vertices(), Vec2{});
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    double w = 0.0;
    Vec2 acc{};
    for (int t : mesh.vertex_triangles(v)) {
      acc += mesh.area(t) * sigma[t];
      w += mesh.area(t);
    }
    nodal_[v] = acc / w;
  }
}

std::optional<Vec2> SigmaInterpolant::operator()(const Vec2& p) const {
  const int t = locator_.locate(p);
  if (t < 0) return std::nullopt;
  const auto l = locator_.barycentric(t, p);
  const auto& tri = mesh_->triangle(t);
  Vec2 s = l[0] * nodal_[tri[0]] + l[1] * nodal_[tri[1]] + l[2] * nodal_[tri[2]];
  const double n = norm(s);
  if (n > 1.0) s = s / n;
  return s;
}

TraceField make_field(const SigmaInterpolant& interp, std::span<const double> u_nodal) {
  TraceField f;
  f.sigma = [&interp](Vec2 p) { return interp(p); };
  if (!u_nodal.empty()) {
    if (u_nodal.size() != static_cast<std::size_t>(interp.mesh().num_vertices()))
      throw Error("make_field: u has wrong size");
    f.u = [&interp, u_nodal](Vec2 p) { return interp.locator().interpolate(u_nodal, p); };
  }
  f.discontinuities = interp.discontinuities();
  return f;
}

TraceField make_field(const AnalyticSolution& oracle) {
  TraceField f;
  f.sigma = [&oracle](Vec2 p) -> std::optional<Vec2> {
    if (oracle.region(p) == Region::Outside) return std::nullopt;
    return oracle.sigma(p);
  };
  if (oracle.has_u()) {
    f.u = [&oracle](Vec2 p) -> std::optional<double> {
      if (oracle.region(p) == Region::Outside) return std::nullopt;
      return oracle.u(p);
    };
  }
  f.discontinuities = oracle.singular_points;
  return f;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Boundary: return "boundary";
    case Termination::ZeroSigma: return "zero_sigma";
    case Termination::DiscontinuityPoint: return "discontinuity_point";
    case Termination::MaxLength: return "max_length";
    case Termination::LoopDetected: return "loop_detected";
  }
  return "?";
}

namespace {

constexpr double kZeroSigma = 0.1;
constexpr int kLoopGap = 10;

struct LoopGrid {
  double cell;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets;

  static std::uint64_t key(long i, long j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
  }
  long ix(double x) const { return static_cast<long>(std::floor(x / cell)); }

  // True if a point with index gap > kLoopGap lies within one cell of p.
  bool revisits(const std::vector<Vec2>& pts, const Vec2& p, int idx) const {
    const long i = ix(p.x), j = ix(p.y);
    for (long a = i - 1; a <= i + 1; ++a)
      for (long b = j - 1; b <= j + 1; ++b) {
        auto it = buckets.find(key(a, b));
        if (it == buckets.end()) continue;
        for (int q : it->second)
          if (idx - q > kLoopGap && distance(pts[q], p) < cell) return true;
      }
    return false;
  }
  void add(const Vec2& p, int idx) { buckets[key(ix(p.x), ix(p.y))].push_back(idx); }
};

}  // namespace

Characteristic trace(const TraceField& field, Vec2 x0, int direction, double step, double max_length) {
  if (!(step > 0.0) || !(max_length > 0.0)) throw Error("trace: step and max_length must be positive");
  const auto s0 = field.sigma(x0);
  if (!s0) throw Error("trace: seed point lies outside the domain");
  Characteristic c;
  c.direction = direction >= 0 ? 1 : -1;
  c.step = step;
  const double dir = c.direction;
  auto push = [&](const Vec2& p, double s) {
    const Vec2 sg = field.sigma(p).value_or(Vec2{});
    c.points.push_back(p);
    c.s.push_back(s);
    c.sigma.push_back(sg);
    double uv = std::numeric_limits<double>::quiet_NaN();
    if (field.u)
      if (auto v = field.u(p)) uv = *v;
    c.u.push_back(uv);
  };
  auto rhs = [&](const Vec2& p) -> std::optional<Vec2> {
    const auto sg = field.sigma(p);
    if (!sg) return std::nullopt;
    const double n = norm(*sg);
    if (n == 0.0) return std::nullopt;
    return dir * perp(*sg) / n;
  };
  auto inside = [&](const Vec2& p) { return field.sigma(p).has_value(); };
  auto near_jump = [&](const Vec2& p) {
    for (const Vec2& z : field.discontinuities)
      if (distance(p, z) < 2.0 * step) return true;
    return false;
  };
  // Exit point on the segment x -> x + len * d, to within step/100.
  auto bisect = [&](const Vec2& x, const Vec2& d, double len) {
    double lo = 0.0, hi = len;
    while (hi - lo > 0.01 * step) {
      const double mid = 0.5 * (lo + hi);
      (inside(x + mid * d) ? lo : hi) = mid;
    }
    return x + lo * d;
  };

  LoopGrid grid{0.5 * step, {}};
  Vec2 x = x0;
  double s = 0.0;
  push(x, s);
  grid.add(x, 0);
  while (true) {
    const Vec2 sg = c.sigma.back();
    if (norm(sg) < kZeroSigma) {
      c.termination = Termination::ZeroSigma;
      break;
    }
    if (near_jump(x)) {
      c.termination = Termination::DiscontinuityPoint;
      break;
    }
    const double hstep = std::min(step, max_length - s);
    if (hstep <= 1e-12 * step) {
      c.termination = Termination::MaxLength;
      break;
    }
    const Vec2 k1 = dir * perp(sg) / norm(sg);
    std::optional<Vec2> next;
    const auto k2 = rhs(x + 0.5 * hstep * k1);
    std::optional<Vec2> k3, k4;
    if (k2) k3 = rhs(x + 0.5 * hstep * *k2);
    if (k3) k4 = rhs(x + hstep * *k3);
    if (k4) next = x + (hstep / 6.0) * (k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
    if (!next || !inside(*next)) {
      const Vec2 d = next ? normalized(*next - x) : k1;
      const double len = next ? distance(*next, x) : hstep;
      if (inside(x + len * d)) {
        next = x + len * d;  // a stage stepped outside but the Euler end stays in
      } else {
        const Vec2 p = bisect(x, d, len);
        s += distance(p, x);
        push(p, s);
        c.termination = Termination::Boundary;
        break;
      }
    }
    s += distance(*next, x);
    x = *next;
    push(x, s);
    const int idx = static_cast<int>(c.points.size()) - 1;
    if (grid.revisits(c.points, x, idx)) {
      c.termination = Termination::LoopDetected;
      break;
    }
    grid.add(x, idx);
  }
  return c;
}

RegionQuery make_query(const RegionMap& map, const TriLocator& locator) {
  RegionQuery q;
  q.region = [&map, &locator](Vec2 p) {
    const int t = locator.locate(p);
    return t < 0 ? Region::Outside : map.label[t];
  };
  std::vector<std::array<Vec2, 2>> segs;
  const TriMesh& mesh = locator.mesh();
  for (int e : map.interface_edges) segs.push_back({mesh.vertex(mesh.edges()[e].v[0]), mesh.vertex(mesh.edges()[e].v[1])});
  if (!segs.empty()) {
    q.interface_distance = [segs](Vec2 p) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& sg : segs) d = std::min(d, segment_distance(p, sg[0], sg[1]));
      return d;
    };
  }
  return q;
}

RegionQuery make_query(const AnalyticSolution& oracle) {
  RegionQuery q;
  q.region = oracle.region;
  q.interface_distance = oracle.interface_distance;
  return q;
}

ConstancyRecord straightness_and_constancy(const Characteristic& c, const RegionQuery& q,
                                           std::span<const Vec2> discontinuities, double exclude_radius) {
  ConstancyRecord rec;
  const int n = static_cast<int>(c.points.size());
  auto excluded = [&](int i) {
    for (const Vec2& z : discontinuities)
      if (distance(c.points[i], z) < exclude_radius) return true;
    return false;
  };
  int i = 0;
  while (i < n) {
    if (q.region(c.points[i]) != Region::Plastic) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && q.region(c.points[j + 1]) == Region::Plastic) ++j;
    if (j - i + 1 < 3) {
      ++rec.skipped;
      i = j + 1;
      continue;
    }
    SubArc a;
    a.begin = i;
    a.end = j;
    a.length = c.s[j] - c.s[i];
    for (int k = i; k <= j; ++k)
      a.straightness = std::max(a.straightness, segment_distance(c.points[k], c.points[i], c.points[j]));
    // reference sample: the usable point closest to the middle
    int mid = -1;
    for (int off = 0; off <= (j - i) / 2 + 1 && mid < 0; ++off)
      for (int k : {(i + j) / 2 - off, (i + j) / 2 + off})
        if (mid < 0 && k >= i && k <= j && !excluded(k)) mid = k;
    if (mid >= 0) {
      for (int k = i; k <= j; ++k) {
        if (excluded(k)) continue;
        a.sigma_constancy = std::max(a.sigma_constancy, norm(c.sigma[k] - c.sigma[mid]));
        if (std::isfinite(c.u[k]) && std::isfinite(c.u[mid]))
          a.u_constancy = std::max(a.u_constancy, std::abs(c.u[k] - c.u[mid]));
      }
    }
    rec.max_straightness = std::max(rec.max_straightness, a.straightness);
    rec.max_sigma_constancy = std::max(rec.max_sigma_constancy, a.sigma_constancy);
    rec.max_u_constancy = std::max(rec.max_u_constancy, a.u_constancy);
    rec.arcs.push_back(a);
    i = j + 1;
  }
  return rec;
}

FanReport detect_fans(const RegionMap& map, std::span<const Vec2> sigma, const TriMesh& mesh, const FanOptions& opt) {
  if (sigma.size() != static_cast<std::size_t>(mesh.num_triangles())) throw Error("detect_fans: sigma has wrong size");
  FanReport rep;
  const double h = mesh.mesh_size();
  rep.h = h;
  const int nt = mesh.num_triangles();
  const TriLocator loc(mesh);
  const double R = opt.apex_radius_h * h;
  auto usable = [&](int t) { return t >= 0 && map.label[t] == Region::Plastic && norm(sigma[t]) > 0.0; };

  std::vector<Vec2> centre(nt), dirv(nt);
  for (int t = 0; t < nt; ++t) {
    centre[t] = mesh.centroid(t);
    if (usable(t)) dirv[t] = normalized(perp(sigma[t]));
  }
  // Per-cell apex estimate: densest cluster of intersections with the lines
  // of cells found across the local characteristic at a few distances.
  std::vector<std::optional<Vec2>> est(nt);
  std::vector<Vec2> cand;
  for (int t = 0; t < nt; ++t) {
    if (!usable(t)) continue;
    cand.clear();
    const Vec2 nrm = normalized(sigma[t]);
    for (double depth : {2.0, 4.0, 8.0})
      for (double sg : {1.0, -1.0}) {
        const int o = loc.locate(centre[t] + sg * depth * h * nrm);
        if (!usable(o)) continue;
        Vec2 p;
        if (line_intersection(centre[t], dirv[t], centre[o], dirv[o], p, opt.min_sine)) cand.push_back(p);
      }
    if (cand.empty()) continue;
    int best = -1, best_count = 0;
    for (int a = 0; a < static_cast<int>(cand.size()); ++a) {
      int cnt = 0;
      for (const Vec2& b : cand) cnt += distance(cand[a], b) <= R;
      if (cnt > best_count) {
        best_count = cnt;
        best = a;
      }
    }
    Vec2 m{};
    int k = 0;
    for (const Vec2& b : cand)
      if (distance(cand[best], b) <= R) {
        m += b;
        ++k;
      }
    m = m / k;
    if (loc.boundary_distance(m) <= opt.boundary_tol_h * h) est[t] = m;
  }

  std::vector<char> assigned(nt, 0), pooled(nt, 0);
  for (int t = 0; t < nt; ++t) pooled[t] = est[t].has_value();
  auto mean_near = [&](const Vec2& c, int* count) {
    Vec2 m{};
    int k = 0;
    for (int t = 0; t < nt; ++t)
      if (pooled[t] && distance(*est[t], c) <= R) {
        m += *est[t];
        ++k;
      }
    *count = k;
    return k > 0 ? m / k : c;
  };
  while (true) {
    // densest pooled estimate, counted on a hash grid of cell R
    std::unordered_map<std::uint64_t, std::vector<int>> grid;
    auto key = [&](long i, long j) {
      return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
    };
    auto cell = [&](double v) { return static_cast<long>(std::floor(v / R)); };
    for (int t = 0; t < nt; ++t)
      if (pooled[t]) grid[key(cell(est[t]->x), cell(est[t]->y))].push_back(t);
    int best = -1, best_count = 0;
    for (int t = 0; t < nt; ++t) {
      if (!pooled[t]) continue;
      int cnt = 0;
      const long ci = cell(est[t]->x), cj = cell(est[t]->y);
      for (long a = ci - 1; a <= ci + 1; ++a)
        for (long b = cj - 1; b <= cj + 1; ++b) {
          auto it = grid.find(key(a, b));
          if (it == grid.end()) continue;
          for (int o : it->second) cnt += distance(*est[t], *est[o]) <= R;
        }
      if (cnt > best_count) {
        best_count = cnt;
        best = t;
      }
    }
    if (best < 0 || best_count < opt.min_members) break;
    int support = 0;
    Vec2 apex = mean_near(*est[best], &support);
    apex = mean_near(apex, &support);

    Fan fan;
    fan.apex = apex;
    std::vector<double> dists;
    for (int t = 0; t < nt; ++t) {
      if (assigned[t] || !usable(t)) continue;
      if (std::abs(cross(apex - centre[t], dirv[t])) > opt.line_tol_h * h) continue;
      fan.members.push_back(t);
      if (est[t]) dists.push_back(distance(*est[t], apex));
    }
    for (int t : fan.members) pooled[t] = 0;
    for (int t = 0; t < nt; ++t)
      if (pooled[t] && distance(*est[t], apex) <= R) pooled[t] = 0;
    if (!dists.empty()) {
      std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
      fan.spread = dists[dists.size() / 2];
    } else {
      fan.spread = std::numeric_limits<double>::infinity();
    }
    if (static_cast<int>(fan.members.size()) < opt.min_members || fan.spread > R) continue;
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    std::vector<double> ang;
    for (int t : fan.members) {
      assigned[t] = 1;
      ang.push_back(std::atan2(centre[t].y - apex.y, centre[t].x - apex.x));
    }
    // extent on the circle: complement of the largest gap between angles
    std::sort(ang.begin(), ang.end());
    double gap = ang.front() + 2 * std::numbers::pi - ang.back();
    int at = 0;
    for (std::size_t i = 1; i < ang.size(); ++i)
      if (ang[i] - ang[i - 1] > gap) {
        gap = ang[i] - ang[i - 1];
        at = static_cast<int>(i);
      }
    amin = ang[at];
    amax = at == 0 ? ang.back() : ang[at - 1] + 2 * std::numbers::pi;
    fan.angle_min = amin;
    fan.angle_max = amax;
    rep.fans.push_back(std::move(fan));
  }

  // connected groups of the remaining plastic cells
  std::vector<char> seen(nt, 0);
  for (int t = 0; t < nt; ++t) {
    if (seen[t] || assigned[t] || map.label[t] != Region::Plastic) continue;
    ++rep.components;
    std::vector<int> stack{t};
    seen[t] = 1;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      for (int n : mesh.neighbors(c))
        if (n >= 0 && !seen[n] && !assigned[n] && map.label[n] == Region::Plastic) {
          seen[n] = 1;
          stack.push_back(n);
        }
    }
  }
  return rep;
}

LevelSetRecord level_set_alignment(std::span<const double> u, double level, const RegionMap& map,
                                   std::span<const Vec2> sigma, const TriMesh& mesh) {
  if (u.size() != static_cast<std::size_t>(mesh.num_vertices()) ||
      sigma.size() != static_cast<std::size_t>(mesh.num_triangles()))
    throw Error("level_set_alignment: field has wrong size");
  LevelSetRecord r;
  double above = 0.0, total = 0.0;
  std::vector<Vec2> pts;
  std::vector<int> cells;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (map.label[t] != Region::Plastic) continue;
    const auto& tri = mesh.triangle(t);
    total += mesh.area(t);
    if ((u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0 > level) above += mesh.area(t);
    Vec2 cut[3];
    int nc = 0;
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      const bool pa = u[a] > level, pb = u[b] > level;
      if (pa == pb) continue;
      const double s = (level - u[a]) / (u[b] - u[a]);
      cut[nc++] = mesh.vertex(a) + s * (mesh.vertex(b) - mesh.vertex(a));
    }
    if (nc == 2) {
      pts.push_back(0.5 * (cut[0] + cut[1]));
      cells.push_back(t);
    }
  }
  if (!(above > 0.0 && above < total) || pts.size() < 2) return r;
  r.in_range = true;
  r.points = static_cast<int>(pts.size());
  Vec2 c{};
  for (const Vec2& p : pts) c += p;
  c = c / static_cast<double>(pts.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (const Vec2& p : pts) {
    const Vec2 d = p - c;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  const double ang = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  r.centre = c;
  r.direction = {std::cos(ang), std::sin(ang)};
  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin, ss = 0.0;
  for (const Vec2& p : pts) {
    const double t = dot(p - c, r.direction);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
    ss += std::pow(cross(r.direction, p - c), 2);
  }
  r.rms = std::sqrt(ss / static_cast<double>(pts.size()));
  r.midpoint = c + 0.5 * (tmin + tmax) * r.direction;
  int nearest = 0;
  for (int i = 1; i < static_cast<int>(pts.size()); ++i)
    if (distance(pts[i], r.midpoint) < distance(pts[nearest], r.midpoint)) nearest = i;
  const Vec2 sg = sigma[cells[nearest]];
  const double cosang = norm(sg) > 0.0 ? std::abs(dot(r.direction, normalized(perp(sg)))) : 0.0;
  r.angle = std::acos(std::min(1.0, cosang));
  return r;
}

std::string to_string(CrossingKind k) {
  switch (k) {
    case CrossingKind::TransversalPlasticToElastic: return "transversal_plastic_to_elastic";
    case CrossingKind::TransversalElasticToPlastic: return "transversal_elastic_to_plastic";
    case CrossingKind::TangentialAlongCharSegment: return "tangential_along_char_segment";
    case CrossingKind::EndpointTouch: return "endpoint_touch";
  }
  return "?";
}

std::vector<CrossingEvent> crossing_analysis(const Characteristic& c, const RegionQuery& q, double on_tol) {
  constexpr int kWindow = 5;
  enum Code { kElastic = 0, kPlastic = 1, kOn = 2 };
  const int n = static_cast<int>(c.points.size());
  std::vector<int> code(n);
  for (int i = 0; i < n; ++i) {
    if (q.interface_distance && q.interface_distance(c.points[i]) <= on_tol) {
      code[i] = kOn;
      continue;
    }
    const Region r = q.region(c.points[i]);
    code[i] = r == Region::Plastic ? kPlastic : (r == Region::Elastic ? kElastic : (i > 0 ? code[i - 1] : kElastic));
  }
  struct Run {
    int code, begin, end;
    int len() const { return end - begin + 1; }
  };
  std::vector<Run> runs;
  for (int i = 0; i < n; ++i) {
    if (!runs.empty() && runs.back().code == code[i])
      runs.back().end = i;
    else
      runs.push_back({code[i], i, i});
  }
  // Clean side runs anchor the analysis; whatever lies between two of them
  // (on-interface points, staircase flicker) is a single transition zone.
  std::vector<int> clean;
  for (int i = 0; i < static_cast<int>(runs.size()); ++i)
    if (runs[i].code != kOn && runs[i].len() >= kWindow) clean.push_back(i);
  auto longest_on = [&](int from, int to) {  // run indices, exclusive
    int best = 0;
    for (int k = from; k < to; ++k)
      if (runs[k].code == kOn) best = std::max(best, runs[k].len());
    return best;
  };
  std::vector<CrossingEvent> ev;
  const int nr = static_cast<int>(runs.size());
  if (clean.empty()) {
    if (longest_on(0, nr) >= kWindow) ev.push_back({CrossingKind::TangentialAlongCharSegment, 0, c.points[0]});
    return ev;
  }
  if (clean.front() > 0 && longest_on(0, clean.front()) >= kWindow)
    ev.push_back({CrossingKind::TangentialAlongCharSegment, 0, c.points[0]});
  for (std::size_t k = 0; k + 1 < clean.size(); ++k) {
    const Run& a = runs[clean[k]];
    const Run& b = runs[clean[k + 1]];
    const int at = a.end + 1;
    if (a.code != b.code) {
      ev.push_back({a.code == kPlastic ? CrossingKind::TransversalPlasticToElastic
                                       : CrossingKind::TransversalElasticToPlastic,
                    at, c.points[at]});
    } else if (clean[k + 1] > clean[k] + 1) {
      ev.push_back({longest_on(clean[k] + 1, clean[k + 1]) >= kWindow ? CrossingKind::TangentialAlongCharSegment
                                                                     : CrossingKind::EndpointTouch,
                    at, c.points[at]});
    }
  }
  if (clean.back() + 1 < nr && longest_on(clean.back() + 1, nr) >= kWindow) {
    const int at = runs[clean.back()].end + 1;
    ev.push_back({CrossingKind::TangentialAlongCharSegment, at, c.points[at]});
  }
  return ev;
}

LoopAudit no_loop_audit(const TraceField& field, std::span<const Vec2> seeds, const RegionQuery& q, double step,
                        double max_length, std::vector<Characteristic>* keep) {
  LoopAudit a;
  for (const Vec2& x : seeds) {
    for (int dir : {1, -1}) {
      Characteristic c = trace(field, x, dir, step, max_length);
      ++a.traces;
      ++a.terminations[static_cast<int>(c.termination)];
      bool touches = false;
      for (const Vec2& p : c.points) touches = touches || q.region(p) == Region::Plastic;
      const bool loop = c.termination == Termination::LoopDetected;
      a.loops += loop;
      a.plastic_touching += touches;
      a.plastic_touching_loops += loop && touches;
      if (keep) keep->push_back(std::move(c));
    }
  }
  return a;
}

std::vector<Vec2> seed_grid(const TraceField& field, Vec2 lo, Vec2 hi, int n, double keep_out) {
  std::vector<Vec2> out;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 p{lo.x + (hi.x - lo.x) * (i + 0.5) / n, lo.y + (hi.y - lo.y) * (j + 0.5) / n};
      if (!field.sigma(p)) continue;
      bool far = true;
      for (const Vec2& z : field.discontinuities) far = far && distance(p, z) >= keep_out;
      if (far) out.push_back(p);
    }
  return out;
}

}  // namespace plastiq
