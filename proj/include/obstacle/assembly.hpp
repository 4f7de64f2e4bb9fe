#pragma once

#include <functional>
#include <vector>

#include "obstacle/fespace.hpp"
#include "obstacle/linalg.hpp"
#include "obstacle/mesh.hpp"

namespace obstacle {

using ScalarField = std::function<double(Point)>;
using VectorField = std::function<Point(Point)>;

/// Load, obstacle and stabilization data of one obstacle problem.
struct ProblemData {
  ScalarField load;
  ScalarField obstacle;
  /// Optional; central differences of `obstacle` are used when empty.
  VectorField obstacle_gradient;
  double alpha = 0.0;
  /// Optional per-element override of alpha (used by the bubble-condensation equivalence).
  std::vector<double> alpha_per_element;
  int degree = 1;

  double alpha_on(int k) const { return alpha_per_element.empty() ? alpha : alpha_per_element[k]; }
  Point obstacle_grad(Point x) const;
};

struct AssemblyOptions {
  int quadrature_order = 4;
  int threads = 1;
};

/// A (stiffness on free V-dofs), B (Q x free V), f, g.
struct MixedSystem {
  SparseMatrix A;
  SparseMatrix B;
  Vector f;
  Vector g;
};

/// A_alpha, B_alpha, C_alpha, f_alpha, g_alpha. C_alpha is block diagonal per
/// element; `c_blocks[k]` holds its (1x1 for P0) diagonal block on element k.
struct StabilizedSystem {
  SparseMatrix A;
  SparseMatrix B;
  SparseMatrix C;
  Vector f;
  Vector g;
  Vector c_blocks;
};

MixedSystem assemble_mixed(const Mesh& mesh, const DofMap& v, const DofMap& q, const ProblemData& data,
                           const AssemblyOptions& options = {});

StabilizedSystem assemble_stabilized(const Mesh& mesh, const DofMap& v, const DofMap& q, const ProblemData& data,
                                     const AssemblyOptions& options = {});

/// (grad u, grad v) + (u, v) on free dofs.
SparseMatrix assemble_h1_gram(const Mesh& mesh, const DofMap& v, const AssemblyOptions& options = {});

/// sum_K h_K^2 (Lap u, Lap v)_K on free dofs.
SparseMatrix assemble_laplacian_gram(const Mesh& mesh, const DofMap& v, const AssemblyOptions& options = {});

/// Residual of the stabilization consistency identity: the largest
/// |alpha * (S_h(u, lambda; test) - F_h(test))| over all V and Q basis functions.
/// `lambda` receives the element id so that elementwise perturbations are expressible.
double consistency_residual(const Mesh& mesh, const DofMap& v, const DofMap& q, const ProblemData& data,
                            const ScalarField& laplacian_u, const std::function<double(int, Point)>& lambda,
                            const AssemblyOptions& options = {});

}  // namespace obstacle
