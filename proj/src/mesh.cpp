#include "obstacle/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace obstacle {

double norm(Point a) { return std::hypot(a.x, a.y); }

double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

namespace {

std::uint64_t edge_key(int a, int b) {
  auto lo = static_cast<std::uint64_t>(std::min(a, b));
  auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

// Rotates the triangle so that its longest edge becomes the refinement edge (v1, v2).
Triangle orient_longest_edge(const Triangle& t, std::span<const Point> p) {
  int best = 0;
  double best_len = -1.0;
  for (int i = 0; i < 3; ++i) {
    double len = norm(p[t[(i + 2) % 3]] - p[t[(i + 1) % 3]]);
    if (len > best_len * (1.0 + 1e-12)) {
      best_len = len;
      best = i;
    }
  }
  return {t[best], t[(best + 1) % 3], t[(best + 2) % 3]};
}

// Midpoint of an edge, projected back onto the curve both endpoints share.
struct MidpointFactory {
  const Mesh& mesh;
  std::vector<Point>& vertices;
  std::vector<VertexTag>& tags;

  int make(const Edge& e) {
    Point a = mesh.vertices()[e.vertices[0]];
    Point b = mesh.vertices()[e.vertices[1]];
    VertexTag ta = mesh.tags()[e.vertices[0]];
    VertexTag tb = mesh.tags()[e.vertices[1]];
    Point m = 0.5 * (a + b);
    VertexTag tag = VertexTag::interior;
    if (!e.is_interior() && ta == VertexTag::outer_boundary && tb == VertexTag::outer_boundary) {
      m = (mesh.outer_radius() / norm(m)) * m;
      tag = VertexTag::outer_boundary;
    } else if (mesh.conform_radius() && ta == VertexTag::conform_circle && tb == VertexTag::conform_circle) {
      m = (*mesh.conform_radius() / norm(m)) * m;
      tag = VertexTag::conform_circle;
    }
    vertices.push_back(m);
    tags.push_back(tag);
    return static_cast<int>(vertices.size()) - 1;
  }
};

}  // namespace

EdgeTopology build_edge_topology(std::span<const Point> vertices, std::span<const Triangle> triangles) {
  EdgeTopology topo;
  topo.element_edges.resize(triangles.size());
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(triangles.size() * 2);

  for (std::size_t k = 0; k < triangles.size(); ++k) {
    const auto& t = triangles[k];
    for (int i = 0; i < 3; ++i) {
      int a = t[(i + 1) % 3];
      int b = t[(i + 2) % 3];
      auto [it, inserted] = lookup.try_emplace(edge_key(a, b), static_cast<int>(topo.edges.size()));
      if (inserted) {
        Edge e;
        e.vertices = {a, b};
        e.left = static_cast<int>(k);
        Point d = vertices[b] - vertices[a];
        e.length = norm(d);
        e.normal = {d.y / e.length, -d.x / e.length};
        topo.edges.push_back(e);
      } else {
        Edge& e = topo.edges[it->second];
        if (e.right >= 0) {
          throw MeshError("non-manifold edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") shared by more than two triangles");
        }
        e.right = static_cast<int>(k);
      }
      topo.element_edges[k][i] = it->second;
    }
  }
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    (topo.edges[e].is_interior() ? topo.interior : topo.boundary).push_back(static_cast<int>(e));
  }
  return topo;
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<VertexTag> tags,
           double outer_radius, std::optional<double> conform_radius, std::vector<int> generation)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      tags_(std::move(tags)),
      generation_(std::move(generation)),
      outer_radius_(outer_radius),
      conform_radius_(conform_radius) {
  if (tags_.size() != vertices_.size()) throw MeshError("vertex tag count does not match vertex count");
  if (generation_.empty()) generation_.assign(triangles_.size(), 0);
  if (generation_.size() != triangles_.size()) throw MeshError("generation tag count does not match triangles");

  const int nv = static_cast<int>(vertices_.size());
  areas_.resize(triangles_.size());
  diameters_.resize(triangles_.size());
  for (std::size_t k = 0; k < triangles_.size(); ++k) {
    const auto& t = triangles_[k];
    for (int v : t) {
      if (v < 0 || v >= nv) throw MeshError("triangle " + std::to_string(k) + " references a missing vertex");
    }
    auto [a, b, c] = corners(static_cast<int>(k));
    areas_[k] = signed_area(a, b, c);
    if (!(areas_[k] > 0.0)) {
      throw MeshError("triangle " + std::to_string(k) + " is not counterclockwise (signed area " +
                      std::to_string(areas_[k]) + ")");
    }
    diameters_[k] = std::max({norm(b - a), norm(c - b), norm(a - c)});
  }
  topology_ = build_edge_topology(vertices_, triangles_);
}

double Mesh::max_diameter() const { return *std::max_element(diameters_.begin(), diameters_.end()); }

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : areas_) s += a;
  return s;
}

std::array<Point, 3> Mesh::corners(int k) const {
  const auto& t = triangles_[k];
  return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
}

Point Mesh::centroid(int k) const {
  auto c = corners(k);
  return (1.0 / 3.0) * (c[0] + c[1] + c[2]);
}

Mesh generate_disk_mesh(double radius, double target_h, std::optional<double> conform_radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
  if (!(target_h > 0.0)) throw std::invalid_argument("target mesh size must be positive");
  if (conform_radius && !(*conform_radius > 0.0 && *conform_radius < radius)) {
    throw std::invalid_argument("conform radius must lie strictly inside (0, radius)");
  }

  auto ring_count = [&](double length) { return std::max(1, static_cast<int>(std::ceil(length / target_h - 1e-9))); };
  std::vector<double> radii;
  std::size_t conform_ring = static_cast<std::size_t>(-1);
  if (conform_radius) {
    const double a = *conform_radius;
    int n_in = ring_count(a);
    int n_out = ring_count(radius - a);
    for (int i = 1; i <= n_in; ++i) radii.push_back(i == n_in ? a : a * i / n_in);
    conform_ring = radii.size() - 1;
    for (int j = 1; j <= n_out; ++j) radii.push_back(j == n_out ? radius : a + (radius - a) * j / n_out);
  } else {
    int n = ring_count(radius);
    for (int i = 1; i <= n; ++i) radii.push_back(i == n ? radius : radius * i / n);
  }

  std::vector<Point> vertices{{0.0, 0.0}};
  std::vector<VertexTag> tags{VertexTag::interior};
  std::vector<int> ring_start;
  std::vector<int> ring_size;
  std::vector<double> ring_offset;
  double previous = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    const double spacing = r - previous;
    previous = r;
    int m = std::max(6, static_cast<int>(std::lround(2.0 * std::numbers::pi * r / spacing)));
    double offset = (i % 2 == 1) ? std::numbers::pi / m : 0.0;
    VertexTag tag = VertexTag::interior;
    if (i + 1 == radii.size()) tag = VertexTag::outer_boundary;
    else if (i == conform_ring) tag = VertexTag::conform_circle;
    ring_start.push_back(static_cast<int>(vertices.size()));
    ring_size.push_back(m);
    ring_offset.push_back(offset);
    for (int j = 0; j < m; ++j) {
      double t = offset + 2.0 * std::numbers::pi * j / m;
      vertices.push_back({r * std::cos(t), r * std::sin(t)});
      tags.push_back(tag);
    }
  }

  std::vector<Triangle> triangles;
  for (int j = 0; j < ring_size[0]; ++j) {
    triangles.push_back({0, ring_start[0] + j, ring_start[0] + (j + 1) % ring_size[0]});
  }
  // Zip consecutive rings together in order of increasing angle.
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    const int na = ring_size[i], nb = ring_size[i + 1];
    auto angle_a = [&](int s) { return ring_offset[i] + 2.0 * std::numbers::pi * s / na; };
    auto angle_b = [&](int s) { return ring_offset[i + 1] + 2.0 * std::numbers::pi * s / nb; };
    auto va = [&](int s) { return ring_start[i] + s % na; };
    auto vb = [&](int s) { return ring_start[i + 1] + s % nb; };
    int ia = 0, ib = 0;
    while (ia < na || ib < nb) {
      bool advance_a = ib >= nb || (ia < na && angle_a(ia + 1) <= angle_b(ib + 1));
      if (advance_a) {
        triangles.push_back({va(ia), vb(ib), va(ia + 1)});
        ++ia;
      } else {
        triangles.push_back({va(ia), vb(ib), vb(ib + 1)});
        ++ib;
      }
    }
  }
  for (auto& t : triangles) t = orient_longest_edge(t, vertices);
  return Mesh(std::move(vertices), std::move(triangles), std::move(tags), radius, conform_radius);
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Point> vertices = mesh.vertices();
  std::vector<VertexTag> tags = mesh.tags();
  MidpointFactory factory{mesh, vertices, tags};
  const auto& topo = mesh.topology();
  std::vector<int> midpoint(topo.edges.size());
  for (std::size_t e = 0; e < topo.edges.size(); ++e) midpoint[e] = factory.make(topo.edges[e]);

  std::vector<Triangle> triangles;
  std::vector<int> generation;
  triangles.reserve(4 * mesh.num_triangles());
  generation.reserve(4 * mesh.num_triangles());
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangles()[k];
    const auto& ed = topo.element_edges[k];
    int m0 = midpoint[ed[0]], m1 = midpoint[ed[1]], m2 = midpoint[ed[2]];
    for (Triangle child : {Triangle{t[0], m2, m1}, Triangle{m2, t[1], m0}, Triangle{m1, m0, t[2]}, Triangle{m0, m1, m2}}) {
      triangles.push_back(orient_longest_edge(child, vertices));
      generation.push_back(mesh.generation()[k] + 2);
    }
  }
  return Mesh(std::move(vertices), std::move(triangles), std::move(tags), mesh.outer_radius(), mesh.conform_radius(),
              std::move(generation));
}

Mesh refine_adaptive(const Mesh& mesh, std::span<const int> marked) {
  const auto& topo = mesh.topology();
  const int nt = static_cast<int>(mesh.num_triangles());
  std::vector<char> edge_marked(topo.edges.size(), 0);
  std::vector<int> queue;
  for (int k : marked) {
    if (k < 0 || k >= nt) throw std::out_of_range("marked element id " + std::to_string(k) + " out of range");
    int e = topo.element_edges[k][0];
    if (!edge_marked[e]) {
      edge_marked[e] = 1;
      queue.push_back(e);
    }
  }
  if (queue.empty()) return mesh;

  // Closure: any element with a marked edge must also bisect its refinement edge.
  while (!queue.empty()) {
    int e = queue.back();
    queue.pop_back();
    for (int k : {topo.edges[e].left, topo.edges[e].right}) {
      if (k < 0) continue;
      int ref = topo.element_edges[k][0];
      if (!edge_marked[ref]) {
        edge_marked[ref] = 1;
        queue.push_back(ref);
      }
    }
  }

  std::vector<Point> vertices = mesh.vertices();
  std::vector<VertexTag> tags = mesh.tags();
  MidpointFactory factory{mesh, vertices, tags};
  std::vector<int> midpoint(topo.edges.size(), -1);
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    if (edge_marked[e]) midpoint[e] = factory.make(topo.edges[e]);
  }

  std::vector<Triangle> triangles;
  std::vector<int> generation;
  auto emit = [&](Triangle t, int gen) {
    triangles.push_back(t);
    generation.push_back(gen);
  };
  for (int k = 0; k < nt; ++k) {
    const auto& t = mesh.triangles()[k];
    const auto& ed = topo.element_edges[k];
    const int gen = mesh.generation()[k];
    if (!edge_marked[ed[0]]) {
      emit(t, gen);
      continue;
    }
    const int m = midpoint[ed[0]];
    // Children (m, v0, v1) and (m, v2, v0); their refinement edges are v0v1 and v2v0.
    if (edge_marked[ed[2]]) {
      int p = midpoint[ed[2]];
      emit({p, m, t[0]}, gen + 2);
      emit({p, t[1], m}, gen + 2);
    } else {
      emit({m, t[0], t[1]}, gen + 1);
    }
    if (edge_marked[ed[1]]) {
      int p = midpoint[ed[1]];
      emit({p, m, t[2]}, gen + 2);
      emit({p, t[0], m}, gen + 2);
    } else {
      emit({m, t[2], t[0]}, gen + 1);
    }
  }
  return Mesh(std::move(vertices), std::move(triangles), std::move(tags), mesh.outer_radius(), mesh.conform_radius(),
              std::move(generation));
}

ConformityReport audit_conformity(const Mesh& mesh) {
  ConformityReport report;
  const auto& p = mesh.vertices();
  std::unordered_map<std::uint64_t, int> count;
  for (const auto& t : mesh.triangles()) {
    if (!(signed_area(p[t[0]], p[t[1]], p[t[2]]) > 0.0)) report.positive_orientation = false;
    for (int i = 0; i < 3; ++i) ++count[edge_key(t[i], t[(i + 1) % 3])];
  }
  for (const auto& [key, n] : count) {
    if (n > 2) report.manifold = false;
  }
  // A vertex strictly inside some edge is hanging.
  for (const auto& [key, n] : count) {
    int a = static_cast<int>(key >> 32);
    int b = static_cast<int>(key & 0xffffffffu);
    Point pa = p[a], pb = p[b];
    double len = norm(pb - pa);
    double xmin = std::min(pa.x, pb.x), xmax = std::max(pa.x, pb.x);
    double ymin = std::min(pa.y, pb.y), ymax = std::max(pa.y, pb.y);
    for (std::size_t v = 0; v < p.size(); ++v) {
      if (static_cast<int>(v) == a || static_cast<int>(v) == b) continue;
      Point q = p[v];
      if (q.x < xmin - 1e-12 || q.x > xmax + 1e-12 || q.y < ymin - 1e-12 || q.y > ymax + 1e-12) continue;
      double dist = std::abs(cross(pb - pa, q - pa)) / len;
      double s = dot(q - pa, pb - pa) / (len * len);
      if (dist < 1e-10 * len && s > 1e-10 && s < 1.0 - 1e-10) ++report.hanging_vertices;
    }
  }
  return report;
}

double min_angle(const Mesh& mesh) {
  double best = std::numbers::pi;
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
    auto c = mesh.corners(static_cast<int>(k));
    for (int i = 0; i < 3; ++i) {
      Point u = c[(i + 1) % 3] - c[i];
      Point w = c[(i + 2) % 3] - c[i];
      best = std::min(best, std::atan2(std::abs(cross(u, w)), dot(u, w)));
    }
  }
  return best;
}

int count_vertices_on_circle(const Mesh& mesh, double radius, double tol) {
  int n = 0;
  for (Point q : mesh.vertices()) {
    if (std::abs(norm(q) - radius) <= tol) ++n;
  }
  return n;
}

}  // namespace obstacle
