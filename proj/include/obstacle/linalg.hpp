#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace obstacle {

using Vector = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row and no explicit zeros are stored.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols);

  /// Duplicate entries are summed in input order, so identical triplet
  /// sequences always give bit-identical matrices.
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<int>& row_offsets() const { return offsets_; }
  const std::vector<int>& col_indices() const { return cols_idx_; }
  const std::vector<double>& values() const { return values_; }

  double at(int i, int j) const;
  Vector diagonal() const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector operator*(std::span<const double> x) const;
  Vector multiply_transpose(std::span<const double> x) const;

  SparseMatrix transpose() const;
  SparseMatrix select_rows(std::span<const int> rows) const;

  bool operator==(const SparseMatrix& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> cols_idx_;
  std::vector<double> values_;
};

/// Returns a + scale * b.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double scale = 1.0);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
Vector subtract(std::span<const double> a, std::span<const double> b);

struct LinearSolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

class LinearSolverError : public std::runtime_error {
 public:
  LinearSolverError(const std::string& what, double achieved, int iterations)
      : std::runtime_error(what), achieved_residual(achieved), iterations(iterations) {}
  double achieved_residual;
  int iterations;
};

class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, int rows) : std::runtime_error(what), rows(rows) {}
  int rows;
};

struct SpdSolveResult {
  Vector x;
  LinearSolveStats stats;
};

/// Jacobi-preconditioned conjugate gradients. Guarantees
/// ||Ax - b|| <= rel_tol ||b|| or throws LinearSolverError after 10 n iterations.
SpdSolveResult spd_solve(const SparseMatrix& a, std::span<const double> b, double rel_tol);

/// Sparse LDL^T factorization (fill-reducing ordering), with a sparse LU
/// fallback for symmetric matrices that are singular to LDL^T without pivoting.
class SparseFactorization {
 public:
  explicit SparseFactorization(const SparseMatrix& a);
  ~SparseFactorization();
  SparseFactorization(SparseFactorization&&) noexcept;
  SparseFactorization& operator=(SparseFactorization&&) noexcept;

  Vector solve(std::span<const double> b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Direct solve of a symmetric, possibly indefinite system with iterative
/// refinement. `stats.iterations` counts refinement steps.
SpdSolveResult symmetric_solve(const SparseMatrix& a, std::span<const double> b, double rel_tol);

struct SaddleSolveResult {
  Vector u;
  Vector lambda;
  LinearSolveStats outer;
  int inner_iterations = 0;
};

/// Solves [[A, -B^T], [-B, 0]] (u, lambda) = (f, -g) by conjugate gradients on
/// the Schur complement B A^{-1} B^T, with A factorized once. Throws
/// SingularSystemError when B is rank deficient.
SaddleSolveResult saddle_solve(const SparseMatrix& a, const SparseMatrix& b, std::span<const double> f,
                               std::span<const double> g, double rel_tol);

/// MatrixMarket coordinate dump, for debugging.
void write_matrix_market(const SparseMatrix& m, const std::string& path);

}  // namespace obstacle
