#include "obstacle/linalg.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace obstacle {

SparseMatrix::SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> entries) {
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw std::out_of_range("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                              ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseMatrix m(rows, cols);
  m.cols_idx_.reserve(entries.size());
  m.values_.reserve(entries.size());
  std::size_t i = 0;
  for (int r = 0; r < rows; ++r) {
    while (i < entries.size() && entries[i].row == r) {
      int c = entries[i].col;
      double sum = 0.0;
      while (i < entries.size() && entries[i].row == r && entries[i].col == c) sum += entries[i++].value;
      if (sum != 0.0) {
        m.cols_idx_.push_back(c);
        m.values_.push_back(sum);
      }
    }
    m.offsets_[r + 1] = static_cast<int>(m.values_.size());
  }
  return m;
}

double SparseMatrix::at(int i, int j) const {
  auto first = cols_idx_.begin() + offsets_[i];
  auto last = cols_idx_.begin() + offsets_[i + 1];
  auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? values_[it - cols_idx_.begin()] : 0.0;
}

Vector SparseMatrix::diagonal() const {
  Vector d(std::min(rows_, cols_));
  for (int i = 0; i < static_cast<int>(d.size()); ++i) d[i] = at(i, i);
  return d;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int p = offsets_[i]; p < offsets_[i + 1]; ++p) s += values_[p] * x[cols_idx_[p]];
    y[i] = s;
  }
}

Vector SparseMatrix::operator*(std::span<const double> x) const {
  Vector y(rows_);
  multiply(x, y);
  return y;
}

Vector SparseMatrix::multiply_transpose(std::span<const double> x) const {
  Vector y(cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    for (int p = offsets_[i]; p < offsets_[i + 1]; ++p) y[cols_idx_[p]] += values_[p] * x[i];
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (int i = 0; i < rows_; ++i) {
    for (int p = offsets_[i]; p < offsets_[i + 1]; ++p) t.push_back({cols_idx_[p], i, values_[p]});
  }
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::select_rows(std::span<const int> rows) const {
  SparseMatrix m(static_cast<int>(rows.size()), cols_);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    int i = rows[r];
    m.cols_idx_.insert(m.cols_idx_.end(), cols_idx_.begin() + offsets_[i], cols_idx_.begin() + offsets_[i + 1]);
    m.values_.insert(m.values_.end(), values_.begin() + offsets_[i], values_.begin() + offsets_[i + 1]);
    m.offsets_[r + 1] = static_cast<int>(m.values_.size());
  }
  return m;
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double scale) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("matrix shapes differ in add");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (int i = 0; i < a.rows(); ++i) {
    for (int p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) t.push_back({i, a.col_indices()[p], a.values()[p]});
    for (int p = b.row_offsets()[i]; p < b.row_offsets()[i + 1]; ++p) {
      t.push_back({i, b.col_indices()[p], scale * b.values()[p]});
    }
  }
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

namespace {

// Preconditioned CG on an abstract SPD operator. Returns false when the
// curvature p^T A p collapses (operator singular on the Krylov space).
template <class Apply, class Precondition>
bool pcg(Apply&& apply, Precondition&& precondition, std::span<const double> b, Vector& x, double rel_tol,
         int max_iter, LinearSolveStats& stats) {
  const std::size_t n = b.size();
  const double bnorm = norm2(b);
  x.assign(n, 0.0);
  stats = {};
  if (bnorm == 0.0) return true;

  Vector r(b.begin(), b.end()), z(n), p(n), q(n);
  int it = 0;
  while (it < max_iter) {
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    double rnorm = norm2(r);
    while (rnorm > rel_tol * bnorm && it < max_iter) {
      apply(p, q);
      double curvature = dot(p, q);
      if (!(curvature > 0.0)) {
        stats.iterations = it;
        stats.relative_residual = rnorm / bnorm;
        return false;
      }
      double step = rz / curvature;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += step * p[i];
        r[i] -= step * q[i];
      }
      precondition(r, z);
      double rz_next = dot(r, z);
      double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      rnorm = norm2(r);
      ++it;
    }
    // Replace the recursive residual with the true one and restart if they drifted apart.
    apply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    rnorm = norm2(r);
    stats.iterations = it;
    stats.relative_residual = rnorm / bnorm;
    if (rnorm <= rel_tol * bnorm) return true;
  }
  return true;
}

}  // namespace

SpdSolveResult spd_solve(const SparseMatrix& a, std::span<const double> b, double rel_tol) {
  if (a.rows() != a.cols() || static_cast<std::size_t>(a.rows()) != b.size()) {
    throw std::invalid_argument("spd_solve: dimension mismatch");
  }
  Vector inv_diag = a.diagonal();
  for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;
  SpdSolveResult result;
  const int cap = std::max(10, 10 * a.rows());
  bool ok = pcg([&](std::span<const double> x, std::span<double> y) { a.multiply(x, y); },
                [&](std::span<const double> r, std::span<double> z) {
                  for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag[i] * r[i];
                },
                b, result.x, rel_tol, cap, result.stats);
  if (!ok || result.stats.relative_residual > rel_tol) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "conjugate gradients did not converge: residual %.3e after %d iterations (tol %.1e)",
                  result.stats.relative_residual, result.stats.iterations, rel_tol);
    throw LinearSolverError(msg, result.stats.relative_residual, result.stats.iterations);
  }
  return result;
}

struct SparseFactorization::Impl {
  int n = 0;
  bool use_lu = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

SparseFactorization::SparseFactorization(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("SparseFactorization: matrix must be square");
  const int n = a.rows();
  impl_->n = n;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.nnz());
  for (int i = 0; i < n; ++i) {
    for (int p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) t.emplace_back(i, a.col_indices()[p], a.values()[p]);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  impl_->ldlt.compute(m);
  bool ok = impl_->ldlt.info() == Eigen::Success;
  if (ok) {
    const auto& d = impl_->ldlt.vectorD();
    for (int i = 0; i < n && ok; ++i) ok = std::isfinite(d[i]) && d[i] != 0.0;
  }
  if (!ok) {
    impl_->use_lu = true;
    impl_->lu.compute(m);
    if (impl_->lu.info() != Eigen::Success) throw SingularSystemError("sparse factorization failed", n);
  }
}

SparseFactorization::~SparseFactorization() = default;
SparseFactorization::SparseFactorization(SparseFactorization&&) noexcept = default;
SparseFactorization& SparseFactorization::operator=(SparseFactorization&&) noexcept = default;

Vector SparseFactorization::solve(std::span<const double> b) const {
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), impl_->n);
  Eigen::VectorXd x = impl_->use_lu ? Eigen::VectorXd(impl_->lu.solve(rhs)) : Eigen::VectorXd(impl_->ldlt.solve(rhs));
  return Vector(x.data(), x.data() + impl_->n);
}

SpdSolveResult symmetric_solve(const SparseMatrix& a, std::span<const double> b, double rel_tol) {
  if (a.rows() != a.cols() || static_cast<std::size_t>(a.rows()) != b.size()) {
    throw std::invalid_argument("symmetric_solve: dimension mismatch");
  }
  SpdSolveResult result;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    result.x.assign(b.size(), 0.0);
    return result;
  }
  const SparseFactorization factor(a);
  result.x = factor.solve(b);
  Vector r = subtract(b, a * result.x);
  result.stats.relative_residual = norm2(r) / bnorm;
  for (int step = 0; step < 3 && result.stats.relative_residual > rel_tol; ++step) {
    Vector dx = factor.solve(r);
    for (std::size_t i = 0; i < dx.size(); ++i) result.x[i] += dx[i];
    r = subtract(b, a * result.x);
    result.stats.relative_residual = norm2(r) / bnorm;
    result.stats.iterations = step + 1;
  }
  if (!(result.stats.relative_residual <= std::max(rel_tol, 1e-10))) {
    throw LinearSolverError("direct solve is inaccurate", result.stats.relative_residual, result.stats.iterations);
  }
  return result;
}

SaddleSolveResult saddle_solve(const SparseMatrix& a, const SparseMatrix& b, std::span<const double> f,
                               std::span<const double> g, double rel_tol) {
  const int n = a.rows();
  const int m = b.rows();
  if (b.cols() != n || static_cast<int>(f.size()) != n || static_cast<int>(g.size()) != m) {
    throw std::invalid_argument("saddle_solve: dimension mismatch");
  }
  SaddleSolveResult result;
  if (m == 0) {
    auto s = symmetric_solve(a, f, rel_tol);
    result.u = std::move(s.x);
    result.inner_iterations = s.stats.iterations;
    return result;
  }
  for (int i = 0; i < m; ++i) {
    if (b.row_offsets()[i] == b.row_offsets()[i + 1]) {
      throw SingularSystemError("active coupling block with " + std::to_string(m) + " rows is rank deficient (row " +
                                    std::to_string(i) + " is zero)",
                                m);
    }
  }

  const SparseFactorization factor(a);
  int inner_iterations = 0;
  auto solve_a = [&](std::span<const double> rhs) {
    ++inner_iterations;
    return factor.solve(rhs);
  };

  // Diagonal approximation of B A^{-1} B^T.
  Vector a_diag = a.diagonal();
  Vector s_diag(m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int p = b.row_offsets()[i]; p < b.row_offsets()[i + 1]; ++p) {
      double v = b.values()[p];
      s_diag[i] += v * v / a_diag[b.col_indices()[p]];
    }
  }
  auto schur = [&](std::span<const double> x, std::span<double> y) {
    Vector w = solve_a(b.multiply_transpose(x));
    b.multiply(w, y);
  };
  auto precondition = [&](std::span<const double> r, std::span<double> z) {
    for (int i = 0; i < m; ++i) z[i] = r[i] / s_diag[i];
  };

  Vector rhs_norm_vec(f.begin(), f.end());
  rhs_norm_vec.insert(rhs_norm_vec.end(), g.begin(), g.end());
  const double rhs_norm = norm2(rhs_norm_vec);

  result.u.assign(n, 0.0);
  result.lambda.assign(m, 0.0);
  Vector r1(f.begin(), f.end());
  Vector r2(g.begin(), g.end());
  // A few rounds of iterative refinement absorb the inexact inner solves.
  for (int round = 0; round < 4; ++round) {
    // Correction for residual (r1, r2) of the system A du - B^T dl = r1, B du = r2.
    Vector w = solve_a(r1);
    Vector bw = b * w;
    Vector schur_rhs = subtract(r2, bw);
    Vector dl;
    LinearSolveStats stats;
    bool ok = pcg(schur, precondition, schur_rhs, dl, std::max(rel_tol * 1e-1, 1e-14), std::max(10, 10 * m), stats);
    result.outer.iterations += stats.iterations;
    if (!ok || stats.relative_residual > std::max(rel_tol, 1e-10)) {
      throw SingularSystemError("active coupling block with " + std::to_string(m) +
                                    " rows is rank deficient (Schur complement residual stalled at " +
                                    std::to_string(stats.relative_residual) + ")",
                                m);
    }
    Vector btdl = b.multiply_transpose(dl);
    for (int i = 0; i < n; ++i) btdl[i] += r1[i];
    Vector du = solve_a(btdl);
    for (int i = 0; i < n; ++i) result.u[i] += du[i];
    for (int i = 0; i < m; ++i) result.lambda[i] += dl[i];

    Vector au = a * result.u;
    Vector btl = b.multiply_transpose(result.lambda);
    Vector bu = b * result.u;
    for (int i = 0; i < n; ++i) r1[i] = f[i] - au[i] + btl[i];
    for (int i = 0; i < m; ++i) r2[i] = g[i] - bu[i];
    Vector block = r1;
    block.insert(block.end(), r2.begin(), r2.end());
    result.outer.relative_residual = rhs_norm > 0.0 ? norm2(block) / rhs_norm : norm2(block);
    if (result.outer.relative_residual <= rel_tol) break;
  }
  result.inner_iterations = inner_iterations;
  if (result.outer.relative_residual > rel_tol) {
    throw LinearSolverError("saddle solve did not reach the requested block residual",
                            result.outer.relative_residual, result.outer.iterations);
  }
  return result;
}

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  char buf[64];
  for (int i = 0; i < m.rows(); ++i) {
    for (int p = m.row_offsets()[i]; p < m.row_offsets()[i + 1]; ++p) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, m.col_indices()[p] + 1, m.values()[p]);
      out << buf;
    }
  }
}

}  // namespace obstacle
