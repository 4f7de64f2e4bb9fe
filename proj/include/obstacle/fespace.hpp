#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "obstacle/linalg.hpp"
#include "obstacle/mesh.hpp"

namespace obstacle {

enum class Family { P1, P2, P1_bubble, P2_bubble, P0_disc };
enum class Constraint { dirichlet, none };

struct SpaceSpec {
  Family family;
  Constraint constraint;
};

/// Validates the family/constraint combination (P0 is never constrained).
SpaceSpec make_space(Family family, Constraint constraint);

int local_dof_count(Family family);
int polynomial_degree(Family family);
bool has_bubble(Family family);
std::string to_string(Family family);

using Barycentric = std::array<double, 3>;

/// Symmetric rule on the reference triangle; weights sum to 1/2.
struct QuadratureRule {
  std::vector<Barycentric> points;
  std::vector<double> weights;
  int order;
};

/// Smallest tabulated rule exact for total degree <= order (1 <= order <= 6).
const QuadratureRule& quadrature_rule(int order);

/// Gauss-Legendre rule on [0, 1] with `n` points (1..4), weights summing to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const LineRule& gauss_legendre(int n);

/// Affine map data of one triangle.
struct ElementGeometry {
  std::array<Point, 3> corners;
  double area;
  double h;
  std::array<Point, 3> grad_bary;

  static ElementGeometry of(const Mesh& mesh, int k);
  Point map(const Barycentric& b) const;
  Barycentric barycentric(Point x) const;
};

struct BasisValue {
  double value = 0.0;
  Point gradient;
  double laplacian = 0.0;
};

/// Physical-space values, gradients and Laplacians of all local shape
/// functions at a barycentric point. Local order: vertices, then edges
/// (edge i opposite vertex i, P2 only), then the bubble.
void eval_basis(Family family, const ElementGeometry& geom, const Barycentric& b, std::span<BasisValue> out);
std::vector<BasisValue> eval_basis(Family family, const ElementGeometry& geom, const Barycentric& b);

enum class DofKind { vertex, edge, bubble, element };

struct DofMap {
  SpaceSpec spec;
  int num_dofs = 0;
  int local_count = 0;
  std::vector<int> element_dofs;  // num_triangles * local_count
  std::vector<DofKind> kind;
  std::vector<char> constrained;
  std::vector<int> free_index;  // -1 for constrained dofs
  std::vector<int> free_dofs;

  int num_free() const { return static_cast<int>(free_dofs.size()); }
  std::span<const int> dofs(int k) const {
    return {element_dofs.data() + static_cast<std::size_t>(k) * local_count, static_cast<std::size_t>(local_count)};
  }
  /// Free-dof vector to full coefficient vector (constrained entries zero).
  Vector expand(std::span<const double> free) const;
  Vector restrict_to_free(std::span<const double> full) const;
};

DofMap build_dofmap(const Mesh& mesh, SpaceSpec spec);

/// Value, gradient and Laplacian of a finite element field on element k.
BasisValue eval_field(const DofMap& dofs, std::span<const double> coefficients, const ElementGeometry& geom, int k,
                      const Barycentric& b);

}  // namespace obstacle
