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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "plastiq/analytic.hpp"
#include "plastiq/characteristics.hpp"
#include "plastiq/classify.hpp"
#include "plastiq/mesh.hpp"
#include "plastiq/solver.hpp"

namespace plastiq {

/// Text table with a header row. Cells are kept as strings; numbers are
/// written with 17 significant digits so a round trip is exact.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws if absent
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

std::string format_number(double v);

/// id,x,y,u (u column omitted when empty).
void write_vertices_csv(const std::filesystem::path& path, const TriMesh& mesh, std::span<const double> u);
/// id,v0,v1,v2,cx,cy,area,sigma_x,sigma_y,p_x,p_y,region. p and labels may be empty.
void write_cells_csv(const std::filesystem::path& path, const TriMesh& mesh, std::span<const Vec2> sigma,
                     std::span<const Vec2> p, std::span<const Region> labels);
/// edge,segment,kind,x,y,length,w,g,lambda,jump (lambda and jump may be empty).
void write_boundary_csv(const std::filesystem::path& path, const TriMesh& mesh, const BoundaryData& bdata,
                        std::span<const double> lambda, std::span<const double> jump);
/// polyline,k,x,y
void write_interface_csv(const std::filesystem::path& path, const RegionMap& map);
/// segment,ax,ay,bx,by,length,edges
void write_char_boundary_csv(const std::filesystem::path& path, const RegionMap& map);
/// trace,s,x,y,sigma_x,sigma_y,u
void write_characteristics_csv(const std::filesystem::path& path, std::span<const Characteristic> traces);
std::vector<Characteristic> read_characteristics_csv(const std::filesystem::path& path);

/// Legacy ASCII VTK unstructured grid: point scalar u, cell vector sigma,
/// cell scalar region (0 elastic, 1 plastic).
void write_vtk(const std::filesystem::path& path, const TriMesh& mesh, std::span<const double> u,
               std::span<const Vec2> sigma, std::span<const Region> labels);

struct VtkData {
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> cells;
  std::vector<double> u;
  std::vector<Vec2> sigma;
  std::vector<int> region;
};
VtkData read_vtk(const std::filesystem::path& path);

nlohmann::json to_json(const ResidualRecord& r);
ResidualRecord residuals_from_json(const nlohmann::json& j);
/// Without wall time, so identical runs give identical reports.
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const RegionMap& map, const TriMesh& mesh);
nlohmann::json to_json(const CompareResult& c);
nlohmann::json to_json(const FanReport& f);
nlohmann::json to_json(const LoopAudit& a);
nlohmann::json to_json(const UniquenessReport& u);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace plastiq
