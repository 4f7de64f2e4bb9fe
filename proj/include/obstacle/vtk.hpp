#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "obstacle/mesh.hpp"

namespace obstacle {

struct VtkField {
  std::string name;
  std::span<const double> values;
};

/// Legacy ASCII unstructured grid with triangle cells.
std::string format_vtk(const Mesh& mesh, const std::vector<VtkField>& point_data, const std::vector<VtkField>& cell_data);
void write_vtk(const std::string& path, const Mesh& mesh, const std::vector<VtkField>& point_data,
               const std::vector<VtkField>& cell_data);

}  // namespace obstacle
