#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "obstacle/assembly.hpp"
#include "obstacle/mesh.hpp"
#include "obstacle/solver.hpp"

namespace testing_support {

using obstacle::Mesh;

/// Regular n-gon fan of radius 2 around a single interior vertex.
Mesh fan_disk(int n, double radius = 2.0, double rotation = 0.0);

/// Centre, an inner ring of `inner` vertices at radius r1 and an outer
/// boundary ring of 2 * inner vertices at radius 2.
Mesh two_ring_disk(int inner, double r1);

/// All small disk meshes with at most `max_elements` triangles used by the
/// enumeration oracle tests.
std::vector<Mesh> small_disk_meshes(int max_elements = 12);

Eigen::MatrixXd to_dense(const obstacle::SparseMatrix& m);
Eigen::VectorXd to_eigen(const std::vector<double>& v);

struct OracleResult {
  /// Every active set whose equality solve is KKT-feasible.
  std::vector<std::vector<int>> feasible_sets;
  Eigen::VectorXd u;
  Eigen::VectorXd lambda;
  /// Largest disagreement in (u, lambda) among the feasible sets.
  double spread = 0.0;
};

/// Enumerates all 2^M active sets of the mixed complementarity system.
OracleResult enumerate_mixed(const obstacle::MixedSystem& sys, double tol = 1e-10);

/// Enumerates all 2^M active sets of the stabilized complementarity system
/// with block-diagonal C.
OracleResult enumerate_stabilized(const obstacle::StabilizedSystem& sys, double tol = 1e-10);

/// Random sparse matrix with roughly `density` filled entries.
obstacle::SparseMatrix random_sparse(int rows, int cols, double density, std::mt19937& rng);

/// Random symmetric positive definite sparse matrix.
obstacle::SparseMatrix random_spd(int n, double density, std::mt19937& rng);

}  // namespace testing_support
