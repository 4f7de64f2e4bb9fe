#include <cstdio>
#include <fstream>
#include <sstream>

#include "obstacle/mesh.hpp"

namespace obstacle {

namespace {
constexpr const char* kHeader = "obstacle-mesh v1";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string format_mesh(const Mesh& mesh) {
  std::string out = kHeader;
  out += '\n';
  out += std::to_string(mesh.num_vertices()) + '\n';
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    Point p = mesh.vertices()[v];
    out += format_double(p.x) + ' ' + format_double(p.y) + ' ' + (mesh.on_boundary(static_cast<int>(v)) ? "1" : "0") + '\n';
  }
  out += std::to_string(mesh.num_triangles()) + '\n';
  for (const auto& t : mesh.triangles()) {
    out += std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  }
  return out;
}

Mesh parse_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  if (header != kHeader) throw MeshError("expected header '" + std::string(kHeader) + "', got '" + header + "'");

  std::size_t nv = 0;
  if (!(in >> nv)) throw MeshError("missing vertex count");
  std::vector<Point> vertices(nv);
  std::vector<VertexTag> tags(nv);
  double outer = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    int flag = 0;
    if (!(in >> vertices[v].x >> vertices[v].y >> flag)) throw MeshError("truncated vertex line " + std::to_string(v));
    if (flag != 0 && flag != 1) throw MeshError("boundary flag must be 0 or 1 on vertex " + std::to_string(v));
    tags[v] = flag ? VertexTag::outer_boundary : VertexTag::interior;
    if (flag) outer = std::max(outer, norm(vertices[v]));
  }
  std::size_t nt = 0;
  if (!(in >> nt)) throw MeshError("missing triangle count");
  std::vector<Triangle> triangles(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    if (!(in >> triangles[k][0] >> triangles[k][1] >> triangles[k][2])) {
      throw MeshError("truncated triangle line " + std::to_string(k));
    }
  }
  return Mesh(std::move(vertices), std::move(triangles), std::move(tags), outer);
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open " + path + " for writing");
  out << format_mesh(mesh);
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str());
}

}  // namespace obstacle
