#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace obstacle {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a);

using Triangle = std::array<int, 3>;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Where a vertex sits relative to the curved geometry. Refinement projects
/// midpoints of edges whose endpoints share a curve back onto that curve.
enum class VertexTag : std::uint8_t { interior = 0, outer_boundary = 1, conform_circle = 2 };

/// One mesh edge. `vertices` is oriented counterclockwise as seen from
/// `left`; `right` is -1 on the boundary. The unit normal points from the
/// left element into the right one.
struct Edge {
  std::array<int, 2> vertices{};
  int left = -1;
  int right = -1;
  double length = 0.0;
  Point normal;

  bool is_interior() const { return right >= 0; }
};

struct EdgeTopology {
  std::vector<Edge> edges;
  /// element_edges[K][i] is the edge opposite local vertex i of K.
  std::vector<std::array<int, 3>> element_edges;
  std::vector<int> interior;  // ids into `edges`
  std::vector<int> boundary;
};

/// Builds the edge table. Throws MeshError when an edge has more than two
/// adjacent triangles.
EdgeTopology build_edge_topology(std::span<const Point> vertices, std::span<const Triangle> triangles);

/// Conforming, counterclockwise triangulation of a polygonal disk.
///
/// Triangle vertex 0 is the newest vertex; the edge (v1, v2) opposite it is
/// the refinement edge used by newest-vertex bisection. Instances are
/// immutable; refinement returns a new mesh.
class Mesh {
 public:
  /// Validates orientation and manifoldness and builds the edge table.
  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<VertexTag> tags,
       double outer_radius, std::optional<double> conform_radius = std::nullopt,
       std::vector<int> generation = {});

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<VertexTag>& tags() const { return tags_; }
  const std::vector<int>& generation() const { return generation_; }
  const EdgeTopology& topology() const { return topology_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  bool on_boundary(int v) const { return tags_[v] == VertexTag::outer_boundary; }
  double outer_radius() const { return outer_radius_; }
  std::optional<double> conform_radius() const { return conform_radius_; }

  double area(int k) const { return areas_[k]; }
  /// Longest edge of element k.
  double diameter(int k) const { return diameters_[k]; }
  double max_diameter() const;
  double total_area() const;
  std::array<Point, 3> corners(int k) const;
  Point centroid(int k) const;

 private:
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<VertexTag> tags_;
  std::vector<int> generation_;
  double outer_radius_;
  std::optional<double> conform_radius_;
  std::vector<double> areas_;
  std::vector<double> diameters_;
  EdgeTopology topology_;
};

double signed_area(Point a, Point b, Point c);

/// Concentric-ring mesh of the disk |x| < radius. When `conform_radius` is
/// given one vertex ring is placed exactly on that circle.
Mesh generate_disk_mesh(double radius, double target_h, std::optional<double> conform_radius = std::nullopt);

/// Red refinement: every triangle is split into four through its edge midpoints.
Mesh refine_uniform(const Mesh& mesh);

/// Newest-vertex bisection of the marked elements with conformity closure.
Mesh refine_adaptive(const Mesh& mesh, std::span<const int> marked);

struct ConformityReport {
  bool positive_orientation = true;
  bool manifold = true;
  int hanging_vertices = 0;
  bool ok() const { return positive_orientation && manifold && hanging_vertices == 0; }
};

/// Brute-force audit: orientation, edge multiplicity and hanging vertices.
ConformityReport audit_conformity(const Mesh& mesh);

/// Smallest interior angle over all triangles, in radians.
double min_angle(const Mesh& mesh);

/// Number of vertices with | |x| - radius | <= tol.
int count_vertices_on_circle(const Mesh& mesh, double radius, double tol = 1e-12);

// Plain-text "obstacle-mesh v1" format.
void write_mesh(const Mesh& mesh, const std::string& path);
std::string format_mesh(const Mesh& mesh);
Mesh parse_mesh(const std::string& text);
Mesh read_mesh(const std::string& path);

}  // namespace obstacle
