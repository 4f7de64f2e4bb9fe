#include "support.hpp"

#include <cmath>
#include <numbers>

namespace testing_support {

using namespace obstacle;

Mesh fan_disk(int n, double radius, double rotation) {
  std::vector<Point> v{{0.0, 0.0}};
  std::vector<VertexTag> tags{VertexTag::interior};
  for (int i = 0; i < n; ++i) {
    const double t = rotation + 2.0 * std::numbers::pi * i / n;
    v.push_back({radius * std::cos(t), radius * std::sin(t)});
    tags.push_back(VertexTag::outer_boundary);
  }
  std::vector<Triangle> tris;
  for (int i = 0; i < n; ++i) tris.push_back({0, 1 + i, 1 + (i + 1) % n});
  return Mesh(std::move(v), std::move(tris), std::move(tags), radius);
}

Mesh two_ring_disk(int inner, double r1) {
  const int outer = 2 * inner;
  std::vector<Point> v{{0.0, 0.0}};
  std::vector<VertexTag> tags{VertexTag::interior};
  for (int i = 0; i < inner; ++i) {
    const double t = 2.0 * std::numbers::pi * i / inner;
    v.push_back({r1 * std::cos(t), r1 * std::sin(t)});
    tags.push_back(VertexTag::interior);
  }
  for (int i = 0; i < outer; ++i) {
    const double t = 2.0 * std::numbers::pi * i / outer;
    v.push_back({2.0 * std::cos(t), 2.0 * std::sin(t)});
    tags.push_back(VertexTag::outer_boundary);
  }
  auto in = [&](int i) { return 1 + (i % inner); };
  auto out = [&](int i) { return 1 + inner + (i % outer); };
  std::vector<Triangle> tris;
  for (int i = 0; i < inner; ++i) tris.push_back({0, in(i), in(i + 1)});
  for (int i = 0; i < inner; ++i) {
    // Outer vertices 2i, 2i+1, 2i+2 sit over the inner edge (i, i+1).
    tris.push_back({out(2 * i + 1), in(i), out(2 * i)});
    tris.push_back({out(2 * i + 1), in(i + 1), in(i)});
    tris.push_back({out(2 * i + 1), out(2 * i + 2), in(i + 1)});
  }
  return Mesh(std::move(v), std::move(tris), std::move(tags), 2.0);
}

std::vector<Mesh> small_disk_meshes(int max_elements) {
  std::vector<Mesh> out;
  for (int n = 3; n <= std::min(max_elements, 12); ++n) out.push_back(fan_disk(n, 2.0, 0.1 * n));
  if (10 <= max_elements) {
    const Mesh ring = two_ring_disk(2 + 1, 0.9);  // 3 + 9 = 12 triangles
    if (static_cast<int>(ring.num_triangles()) <= max_elements) out.push_back(ring);
  }
  const std::vector<int> first{0};
  for (int n : {3, 4, 5}) {
    const Mesh refined = refine_adaptive(fan_disk(n), first);
    if (static_cast<int>(refined.num_triangles()) <= max_elements) out.push_back(refined);
  }
  return out;
}

Eigen::MatrixXd to_dense(const SparseMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    for (int p = m.row_offsets()[i]; p < m.row_offsets()[i + 1]; ++p) d(i, m.col_indices()[p]) = m.values()[p];
  }
  return d;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

namespace {

void record(OracleResult& out, std::vector<int> set, const Eigen::VectorXd& u, const Eigen::VectorXd& lambda) {
  if (out.feasible_sets.empty()) {
    out.u = u;
    out.lambda = lambda;
  } else {
    out.spread = std::max({out.spread, (u - out.u).lpNorm<Eigen::Infinity>(),
                           (lambda - out.lambda).lpNorm<Eigen::Infinity>()});
  }
  out.feasible_sets.push_back(std::move(set));
}

std::vector<int> members(unsigned mask, int m) {
  std::vector<int> set;
  for (int i = 0; i < m; ++i) {
    if (mask & (1u << i)) set.push_back(i);
  }
  return set;
}

}  // namespace

OracleResult enumerate_mixed(const MixedSystem& sys, double tol) {
  const Eigen::MatrixXd A = to_dense(sys.A);
  const Eigen::MatrixXd B = to_dense(sys.B);
  const Eigen::VectorXd f = to_eigen(sys.f), g = to_eigen(sys.g);
  const int n = static_cast<int>(A.rows()), m = static_cast<int>(B.rows());
  const double scale = std::max({1.0, f.lpNorm<Eigen::Infinity>(), g.lpNorm<Eigen::Infinity>()});
  OracleResult out;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    const std::vector<int> set = members(mask, m);
    const int s = static_cast<int>(set.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + s, n + s);
    Eigen::VectorXd rhs(n + s);
    K.topLeftCorner(n, n) = A;
    rhs.head(n) = f;
    for (int i = 0; i < s; ++i) {
      K.block(0, n + i, n, 1) = -B.row(set[i]).transpose();
      K.block(n + i, 0, 1, n) = B.row(set[i]);
      rhs(n + i) = g(set[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd x = lu.solve(rhs);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < s; ++i) lambda(set[i]) = x(n + i);
    const Eigen::VectorXd u = x.head(n);
    const Eigen::VectorXd gap = B * u - g;
    if (lambda.minCoeff() < -tol * scale || gap.minCoeff() < -tol * scale) continue;
    record(out, set, u, lambda);
  }
  return out;
}

OracleResult enumerate_stabilized(const StabilizedSystem& sys, double tol) {
  const Eigen::MatrixXd A = to_dense(sys.A);
  const Eigen::MatrixXd B = to_dense(sys.B);
  const Eigen::MatrixXd C = to_dense(sys.C);
  const Eigen::VectorXd f = to_eigen(sys.f), g = to_eigen(sys.g);
  const int n = static_cast<int>(A.rows()), m = static_cast<int>(B.rows());
  const double scale = std::max({1.0, f.lpNorm<Eigen::Infinity>(), g.lpNorm<Eigen::Infinity>()});
  OracleResult out;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    const std::vector<int> set = members(mask, m);
    const int s = static_cast<int>(set.size());
    // [[A, -B_s^T], [B_s, C_ss]] (u, lambda_s) = (f, g_s)
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + s, n + s);
    Eigen::VectorXd rhs(n + s);
    K.topLeftCorner(n, n) = A;
    rhs.head(n) = f;
    for (int i = 0; i < s; ++i) {
      K.block(0, n + i, n, 1) = -B.row(set[i]).transpose();
      K.block(n + i, 0, 1, n) = B.row(set[i]);
      for (int j = 0; j < s; ++j) K(n + i, n + j) = C(set[i], set[j]);
      rhs(n + i) = g(set[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd x = lu.solve(rhs);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < s; ++i) lambda(set[i]) = x(n + i);
    const Eigen::VectorXd u = x.head(n);
    const Eigen::VectorXd gap = B * u + C * lambda - g;
    if (lambda.minCoeff() < -tol * scale || gap.minCoeff() < -tol * scale) continue;
    record(out, set, u, lambda);
  }
  return out;
}

SparseMatrix random_sparse(int rows, int cols, double density, std::mt19937& rng) {
  std::uniform_real_distribution<double> value(-1.0, 1.0), coin(0.0, 1.0);
  std::vector<Triplet> t;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (coin(rng) < density) t.push_back({i, j, value(rng)});
    }
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

SparseMatrix random_spd(int n, double density, std::mt19937& rng) {
  const SparseMatrix r = random_sparse(n, n, density, rng);
  const Eigen::MatrixXd d = to_dense(r);
  const Eigen::MatrixXd s = d.transpose() * d + Eigen::MatrixXd::Identity(n, n);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (s(i, j) != 0.0) t.push_back({i, j, s(i, j)});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace testing_support
