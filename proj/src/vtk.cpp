#include "obstacle/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace obstacle {

namespace {

void append(std::string& out, const char* fmt, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  out += buf;
}

void append_scalars(std::string& out, const VtkField& field, std::size_t expected) {
  if (field.values.size() != expected) throw std::invalid_argument("vtk field '" + field.name + "' has wrong length");
  out += "SCALARS " + field.name + " double 1\nLOOKUP_TABLE default\n";
  char buf[40];
  for (double x : field.values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    out += buf;
  }
}

}  // namespace

std::string format_vtk(const Mesh& mesh, const std::vector<VtkField>& point_data, const std::vector<VtkField>& cell_data) {
  const std::size_t nv = mesh.num_vertices();
  const std::size_t nt = mesh.num_triangles();
  std::string out = "# vtk DataFile Version 3.0\nobstacle-fem\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(nv) + " double\n";
  for (const Point& p : mesh.vertices()) append(out, "%.17g %.17g 0\n", p.x, p.y);
  out += "CELLS " + std::to_string(nt) + " " + std::to_string(4 * nt) + "\n";
  for (const Triangle& t : mesh.triangles()) {
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  out += "CELL_TYPES " + std::to_string(nt) + "\n";
  for (std::size_t k = 0; k < nt; ++k) out += "5\n";
  if (!point_data.empty()) {
    out += "POINT_DATA " + std::to_string(nv) + "\n";
    for (const auto& f : point_data) append_scalars(out, f, nv);
  }
  if (!cell_data.empty()) {
    out += "CELL_DATA " + std::to_string(nt) + "\n";
    for (const auto& f : cell_data) append_scalars(out, f, nt);
  }
  return out;
}

void write_vtk(const std::string& path, const Mesh& mesh, const std::vector<VtkField>& point_data,
               const std::vector<VtkField>& cell_data) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path);
  file << format_vtk(mesh, point_data, cell_data);
}

}  // namespace obstacle
