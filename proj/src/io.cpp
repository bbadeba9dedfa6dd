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

#include "plastiq/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace plastiq {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return in;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan" || s == "-nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw Error("not a number: '" + s + "'");
  return v;
}

double json_number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw Error("csv: no column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const { return parse_number(text(row, name)); }

const std::string& CsvTable::text(std::size_t row, const std::string& name) const {
  const auto& r = rows.at(row);
  const int c = column(name);
  if (c >= static_cast<int>(r.size())) throw Error("csv: short row " + std::to_string(row));
  return r[c];
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error("csv: empty file " + path.string());
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_line(line));
    if (t.rows.back().size() != t.header.size())
      throw Error("csv: row " + std::to_string(t.rows.size()) + " of " + path.string() + " has wrong width");
  }
  return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  auto out = open_out(path);
  auto put = [&out](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  };
  put(table.header);
  for (const auto& r : table.rows) put(r);
}

void write_vertices_csv(const std::filesystem::path& path, const TriMesh& mesh, std::span<const double> u) {
  CsvTable t;
  t.header = {"id", "x", "y"};
  if (!u.empty()) t.header.push_back("u");
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2 p = mesh.vertex(v);
    std::vector<std::string> r{std::to_string(v), format_number(p.x), format_number(p.y)};
    if (!u.empty()) r.push_back(format_number(u[v]));
    t.rows.push_back(std::move(r));
  }
  write_csv(path, t);
}

void write_cells_csv(const std::filesystem::path& path, const TriMesh& mesh, std::span<const Vec2> sigma,
                     std::span<const Vec2> p, std::span<const Region> labels) {
  CsvTable t;
  t.header = {"id", "v0", "v1", "v2", "cx", "cy", "area", "sigma_x", "sigma_y", "p_x", "p_y", "region"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int c = 0; c < mesh.num_triangles(); ++c) {
    const auto& tri = mesh.triangle(c);
    const Vec2 ctr = mesh.centroid(c);
    const Vec2 pp = p.empty() ? Vec2{nan, nan} : p[c];
    t.rows.push_back({std::to_string(c), std::to_string(tri[0]), std::to_string(tri[1]), std::to_string(tri[2]),
                      format_number(ctr.x), format_number(ctr.y), format_number(mesh.area(c)),
                      format_number(sigma[c].x), format_number(sigma[c].y), format_number(pp.x), format_number(pp.y),
                      labels.empty() ? "unclassified" : to_string(labels[c])});
  }
  write_csv(path, t);
}

void write_boundary_csv(const std::filesystem::path& path, const TriMesh& mesh, const BoundaryData& bdata,
                        std::span<const double> lambda, std::span<const double> jump) {
  CsvTable t;
  t.header = {"edge", "segment", "kind", "x", "y", "length", "w", "g", "lambda", "jump"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int e = 0; e < mesh.num_boundary_edges(); ++e) {
    const Vec2 m = mesh.boundary_midpoint(e);
    t.rows.push_back({std::to_string(e), std::to_string(mesh.boundary_edge(e).segment),
                      to_string(mesh.boundary_edge(e).kind), format_number(m.x), format_number(m.y),
                      format_number(mesh.boundary_length(e)), format_number(bdata.w[e]), format_number(bdata.g[e]),
                      format_number(lambda.empty() ? nan : lambda[e]), format_number(jump.empty() ? nan : jump[e])});
  }
  write_csv(path, t);
}

void write_interface_csv(const std::filesystem::path& path, const RegionMap& map) {
  CsvTable t;
  t.header = {"polyline", "k", "x", "y"};
  for (std::size_t i = 0; i < map.sigma_interface.size(); ++i)
    for (std::size_t k = 0; k < map.sigma_interface[i].size(); ++k) {
      const Vec2 p = map.sigma_interface[i][k];
      t.rows.push_back({std::to_string(i), std::to_string(k), format_number(p.x), format_number(p.y)});
    }
  write_csv(path, t);
}

void write_char_boundary_csv(const std::filesystem::path& path, const RegionMap& map) {
  CsvTable t;
  t.header = {"segment", "ax", "ay", "bx", "by", "length", "edges"};
  const auto& segs = map.char_boundary.segments;
  for (std::size_t i = 0; i < segs.size(); ++i)
    t.rows.push_back({std::to_string(i), format_number(segs[i].a.x), format_number(segs[i].a.y),
                      format_number(segs[i].b.x), format_number(segs[i].b.y), format_number(segs[i].length()),
                      std::to_string(segs[i].edges.size())});
  write_csv(path, t);
}

void write_characteristics_csv(const std::filesystem::path& path, std::span<const Characteristic> traces) {
  CsvTable t;
  t.header = {"trace", "s", "x", "y", "sigma_x", "sigma_y", "u"};
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const Characteristic& c = traces[i];
    for (std::size_t k = 0; k < c.points.size(); ++k)
      t.rows.push_back({std::to_string(i), format_number(c.s[k]), format_number(c.points[k].x),
                        format_number(c.points[k].y), format_number(c.sigma[k].x), format_number(c.sigma[k].y),
                        format_number(c.u[k])});
  }
  write_csv(path, t);
}

std::vector<Characteristic> read_characteristics_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  std::vector<Characteristic> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t id = static_cast<std::size_t>(std::stoul(t.text(r, "trace")));
    if (id >= out.size()) out.resize(id + 1);
    Characteristic& c = out[id];
    c.s.push_back(t.number(r, "s"));
    c.points.push_back({t.number(r, "x"), t.number(r, "y")});
    c.sigma.push_back({t.number(r, "sigma_x"), t.number(r, "sigma_y")});
    c.u.push_back(t.number(r, "u"));
  }
  return out;
}

void write_vtk(const std::filesystem::path& path, const TriMesh& mesh, std::span<const double> u,
               std::span<const Vec2> sigma, std::span<const Region> labels) {
  auto out = open_out(path);
  const int nv = mesh.num_vertices(), nt = mesh.num_triangles();
  out << "# vtk DataFile Version 3.0\nplastiq fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (int v = 0; v < nv; ++v) out << format_number(mesh.vertex(v).x) << ' ' << format_number(mesh.vertex(v).y) << " 0\n";
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangle(t);
    out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) out << "5\n";
  if (!u.empty()) {
    out << "POINT_DATA " << nv << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < nv; ++v) out << format_number(u[v]) << '\n';
  }
  out << "CELL_DATA " << nt << "\nVECTORS sigma double\n";
  for (int t = 0; t < nt; ++t) out << format_number(sigma[t].x) << ' ' << format_number(sigma[t].y) << " 0\n";
  if (!labels.empty()) {
    out << "SCALARS region int 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < nt; ++t) out << (labels[t] == Region::Plastic ? 1 : 0) << '\n';
  }
}

VtkData read_vtk(const std::filesystem::path& path) {
  auto in = open_in(path);
  VtkData d;
  std::string line, word;
  for (int i = 0; i < 4; ++i) std::getline(in, line);
  if (line.find("UNSTRUCTURED_GRID") == std::string::npos) throw Error("vtk: not an unstructured grid");
  auto num = [&in]() {
    std::string s;
    if (!(in >> s)) throw Error("vtk: truncated file");
    return parse_number(s);
  };
  char section = 0;  // 'p' point data, 'c' cell data
  while (in >> word) {
    if (word == "POINTS") {
      const int n = static_cast<int>(num());
      in >> word;
      d.points.resize(n);
      for (auto& p : d.points) {
        p.x = num();
        p.y = num();
        num();
      }
    } else if (word == "CELLS") {
      const int n = static_cast<int>(num());
      num();
      d.cells.resize(n);
      for (auto& c : d.cells) {
        if (num() != 3) throw Error("vtk: only triangles are supported");
        for (int& v : c) v = static_cast<int>(num());
      }
    } else if (word == "CELL_TYPES") {
      const int n = static_cast<int>(num());
      for (int i = 0; i < n; ++i) num();
    } else if (word == "POINT_DATA") {
      num();
      section = 'p';
    } else if (word == "CELL_DATA") {
      num();
      section = 'c';
    } else if (word == "SCALARS") {
      std::string name, type;
      in >> name >> type;
      num();
      in >> word >> word;  // LOOKUP_TABLE default
      const std::size_t n = section == 'p' ? d.points.size() : d.cells.size();
      if (name == "u") {
        d.u.resize(n);
        for (double& v : d.u) v = num();
      } else if (name == "region") {
        d.region.resize(n);
        for (int& v : d.region) v = static_cast<int>(num());
      } else {
        for (std::size_t i = 0; i < n; ++i) num();
      }
    } else if (word == "VECTORS") {
      std::string name, type;
      in >> name >> type;
      d.sigma.resize(d.cells.size());
      for (auto& s : d.sigma) {
        s.x = num();
        s.y = num();
        num();
      }
    } else {
      throw Error("vtk: unexpected token '" + word + "'");
    }
  }
  return d;
}

nlohmann::json to_json(const ResidualRecord& r) {
  return {{"div_interior", r.div_interior},
          {"neumann_trace", r.neumann_trace},
          {"ball_violation", r.ball_violation},
          {"flow_rule", r.flow_rule},
          {"dirichlet_flow_rule", r.dirichlet_flow_rule}};
}

ResidualRecord residuals_from_json(const nlohmann::json& j) {
  ResidualRecord r;
  r.div_interior = json_number(j.at("div_interior"));
  r.neumann_trace = json_number(j.at("neumann_trace"));
  r.ball_violation = json_number(j.at("ball_violation"));
  r.flow_rule = json_number(j.at("flow_rule"));
  r.dirichlet_flow_rule = json_number(j.at("dirichlet_flow_rule"));
  return r;
}

nlohmann::json to_json(const SolveReport& r) {
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"kkt", to_json(r.kkt)},
          {"stopping", to_json(r.stopping)},
          {"energy_change", r.energy_change},
          {"final_energy", r.final_energy},
          {"operator_norm", r.operator_norm},
          {"tau_primal", r.tau_primal},
          {"tau_dual", r.tau_dual},
          {"tau_trace", r.tau_trace},
          {"safe_load", r.safe_load},
          {"history_iterations", r.history_iterations},
          {"energy_history", r.energy_history}};
}

nlohmann::json to_json(const RegionMap& map, const TriMesh& mesh) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : map.char_boundary.segments)
    segs.push_back({{"a", {s.a.x, s.a.y}}, {"b", {s.b.x, s.b.y}}, {"length", s.length()}});
  return {{"eps_sat", map.eps_sat},
          {"plastic_cells", map.plastic_count()},
          {"plastic_area", map.plastic_area(mesh)},
          {"relabeled_isolated", map.relabeled_isolated},
          {"empty_interior", map.empty_interior},
          {"interface_polylines", map.sigma_interface.size()},
          {"convexity",
           {{"empty", map.convexity.empty},
            {"is_convex", map.convexity.is_convex},
            {"hull_area_deficit", map.convexity.hull_area_deficit},
            {"threshold", map.convexity.threshold}}},
          {"char_boundary",
           {{"components", map.char_boundary.components},
            {"theorem_consistent", map.char_boundary.theorem_consistent},
            {"candidate_edges", map.char_boundary.candidate_edges},
            {"hit_edges", map.char_boundary.hit_edges},
            {"fragments", map.char_boundary.fragments},
            {"segments", segs}}}};
}

nlohmann::json to_json(const CompareResult& c) {
  return {{"u_rel_l2", c.u_rel_l2},
          {"sigma_rel_l2", c.sigma_rel_l2},
          {"confusion", {{c.confusion[0][0], c.confusion[0][1]}, {c.confusion[1][0], c.confusion[1][1]}}},
          {"analytic_plastic_area", c.analytic_plastic_area},
          {"discrete_plastic_area", c.discrete_plastic_area}};
}

nlohmann::json to_json(const FanReport& f) {
  nlohmann::json fans = nlohmann::json::array();
  for (const Fan& x : f.fans)
    fans.push_back({{"apex", {x.apex.x, x.apex.y}},
                    {"angle_min", x.angle_min},
                    {"angle_max", x.angle_max},
                    {"spread", x.spread},
                    {"members", x.members.size()}});
  return {{"h", f.h}, {"components", f.components}, {"fans", fans}};
}

nlohmann::json to_json(const LoopAudit& a) {
  nlohmann::json hist;
  for (int k = 0; k < 5; ++k) hist[to_string(static_cast<Termination>(k))] = a.terminations[k];
  return {{"traces", a.traces},
          {"loops", a.loops},
          {"plastic_touching", a.plastic_touching},
          {"plastic_touching_loops", a.plastic_touching_loops},
          {"passes", a.passes()},
          {"terminations", hist}};
}

nlohmann::json to_json(const UniquenessReport& u) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : u.reports) runs.push_back(to_json(r));
  return {{"runs", u.runs},
          {"pure_dirichlet", u.pure_dirichlet},
          {"max_u_l1", u.max_u_l1},
          {"max_sigma_l2", u.max_sigma_l2},
          {"u_l1", u.u_l1},
          {"sigma_l2", u.sigma_l2},
          {"inconclusive", u.inconclusive},
          {"reports", runs}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace plastiq
