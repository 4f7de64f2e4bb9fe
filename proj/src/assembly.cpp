#include "obstacle/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "obstacle/parallel.hpp"

namespace obstacle {

Point ProblemData::obstacle_grad(Point x) const {
  if (obstacle_gradient) return obstacle_gradient(x);
  const double step = 1e-6;
  return {(obstacle({x.x + step, x.y}) - obstacle({x.x - step, x.y})) / (2.0 * step),
          (obstacle({x.x, x.y + step}) - obstacle({x.x, x.y - step})) / (2.0 * step)};
}

namespace {

constexpr int kMaxLocal = 7;

// Element contributions; Q is elementwise constant so its local block is a scalar.
struct LocalBlock {
  std::array<double, kMaxLocal * kMaxLocal> a{};
  std::array<double, kMaxLocal> b{};
  std::array<double, kMaxLocal> f{};
  double c = 0.0;
  double g = 0.0;
};

void require_p0(const DofMap& q) {
  if (q.spec.family != Family::P0_disc) throw std::invalid_argument("multiplier space must be P0_disc");
}

LocalBlock element_block(const Mesh& mesh, const DofMap& v, const ProblemData& data, int k, double alpha, int order) {
  const ElementGeometry geom = ElementGeometry::of(mesh, k);
  const QuadratureRule& rule = quadrature_rule(order);
  const int n = v.local_count;
  const double stab = alpha * geom.h * geom.h;
  LocalBlock blk;
  std::array<BasisValue, kMaxLocal> phi;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    eval_basis(v.spec.family, geom, rule.points[q], std::span(phi.data(), n));
    const double w = rule.weights[q] * 2.0 * geom.area;
    const Point x = geom.map(rule.points[q]);
    const double fx = data.load(x);
    const double gx = data.obstacle(x);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        blk.a[i * n + j] += w * (dot(phi[i].gradient, phi[j].gradient) - stab * phi[i].laplacian * phi[j].laplacian);
      }
      blk.b[i] += w * (phi[i].value + stab * phi[i].laplacian);
      blk.f[i] += w * fx * (phi[i].value + stab * phi[i].laplacian);
    }
    blk.c += w * stab;
    blk.g += w * (gx - stab * fx);
  }
  return blk;
}

std::vector<LocalBlock> element_blocks(const Mesh& mesh, const DofMap& v, const ProblemData& data,
                                       const AssemblyOptions& options, bool stabilized) {
  const int nt = static_cast<int>(mesh.num_triangles());
  std::vector<LocalBlock> blocks(nt);
  for_each_element(nt, options.threads, [&](int k) {
    blocks[k] = element_block(mesh, v, data, k, stabilized ? data.alpha_on(k) : 0.0, options.quadrature_order);
  });
  return blocks;
}

struct Scattered {
  SparseMatrix A, B, C;
  Vector f, g, c_blocks;
};

// Serial scatter in element order; the summation order is therefore fixed.
Scattered scatter(const Mesh& mesh, const DofMap& v, const DofMap& q, const std::vector<LocalBlock>& blocks) {
  const int nt = static_cast<int>(mesh.num_triangles());
  const int n = v.local_count;
  const int nfree = v.num_free();
  std::vector<Triplet> ta, tb, tc;
  ta.reserve(static_cast<std::size_t>(nt) * n * n);
  tb.reserve(static_cast<std::size_t>(nt) * n);
  Scattered out;
  out.f.assign(nfree, 0.0);
  out.g.assign(q.num_dofs, 0.0);
  out.c_blocks.assign(nt, 0.0);
  for (int k = 0; k < nt; ++k) {
    const auto& blk = blocks[k];
    auto dofs = v.dofs(k);
    const int row_q = q.dofs(k)[0];
    for (int i = 0; i < n; ++i) {
      int fi = v.free_index[dofs[i]];
      if (fi < 0) continue;
      for (int j = 0; j < n; ++j) {
        int fj = v.free_index[dofs[j]];
        if (fj >= 0) ta.push_back({fi, fj, blk.a[i * n + j]});
      }
      tb.push_back({row_q, fi, blk.b[i]});
      out.f[fi] += blk.f[i];
    }
    tc.push_back({row_q, row_q, blk.c});
    out.c_blocks[k] = blk.c;
    out.g[row_q] += blk.g;
  }
  out.A = SparseMatrix::from_triplets(nfree, nfree, std::move(ta));
  out.B = SparseMatrix::from_triplets(q.num_dofs, nfree, std::move(tb));
  out.C = SparseMatrix::from_triplets(q.num_dofs, q.num_dofs, std::move(tc));
  return out;
}

template <class Integrand>
SparseMatrix assemble_bilinear(const Mesh& mesh, const DofMap& v, const AssemblyOptions& options, Integrand&& integrand) {
  const int nt = static_cast<int>(mesh.num_triangles());
  const int n = v.local_count;
  std::vector<std::array<double, kMaxLocal * kMaxLocal>> blocks(nt);
  for_each_element(nt, options.threads, [&](int k) {
    const ElementGeometry geom = ElementGeometry::of(mesh, k);
    const QuadratureRule& rule = quadrature_rule(options.quadrature_order);
    std::array<BasisValue, kMaxLocal> phi;
    auto& blk = blocks[k];
    blk.fill(0.0);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      eval_basis(v.spec.family, geom, rule.points[q], std::span(phi.data(), n));
      const double w = rule.weights[q] * 2.0 * geom.area;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) blk[i * n + j] += w * integrand(geom, phi[i], phi[j]);
      }
    }
  });
  std::vector<Triplet> t;
  for (int k = 0; k < nt; ++k) {
    auto dofs = v.dofs(k);
    for (int i = 0; i < n; ++i) {
      int fi = v.free_index[dofs[i]];
      if (fi < 0) continue;
      for (int j = 0; j < n; ++j) {
        int fj = v.free_index[dofs[j]];
        if (fj >= 0) t.push_back({fi, fj, blocks[k][i * n + j]});
      }
    }
  }
  return SparseMatrix::from_triplets(v.num_free(), v.num_free(), std::move(t));
}

}  // namespace

MixedSystem assemble_mixed(const Mesh& mesh, const DofMap& v, const DofMap& q, const ProblemData& data,
                           const AssemblyOptions& options) {
  require_p0(q);
  auto s = scatter(mesh, v, q, element_blocks(mesh, v, data, options, false));
  return {std::move(s.A), std::move(s.B), std::move(s.f), std::move(s.g)};
}

StabilizedSystem assemble_stabilized(const Mesh& mesh, const DofMap& v, const DofMap& q, const ProblemData& data,
                                     const AssemblyOptions& options) {
  require_p0(q);
  if (!(data.alpha > 0.0) && data.alpha_per_element.empty()) {
    throw std::invalid_argument("stabilized assembly needs alpha > 0");
  }
  for (double a : data.alpha_per_element) {
    if (!(a > 0.0)) throw std::invalid_argument("per-element alpha must be positive");
  }
  auto s = scatter(mesh, v, q, element_blocks(mesh, v, data, options, true));
  return {std::move(s.A), std::move(s.B), std::move(s.C), std::move(s.f), std::move(s.g), std::move(s.c_blocks)};
}

SparseMatrix assemble_h1_gram(const Mesh& mesh, const DofMap& v, const AssemblyOptions& options) {
  // The mass term is a product of two basis functions; use a rule exact for it.
  AssemblyOptions exact = options;
  const int degree = has_bubble(v.spec.family) ? 3 : polynomial_degree(v.spec.family);
  exact.quadrature_order = std::max(options.quadrature_order, std::min(6, 2 * degree));
  return assemble_bilinear(mesh, v, exact, [](const ElementGeometry&, const BasisValue& a, const BasisValue& b) {
    return dot(a.gradient, b.gradient) + a.value * b.value;
  });
}

SparseMatrix assemble_laplacian_gram(const Mesh& mesh, const DofMap& v, const AssemblyOptions& options) {
  return assemble_bilinear(mesh, v, options, [](const ElementGeometry& g, const BasisValue& a, const BasisValue& b) {
    return g.h * g.h * a.laplacian * b.laplacian;
  });
}

double consistency_residual(const Mesh& mesh, const DofMap& v, const DofMap& q, const ProblemData& data,
                            const ScalarField& laplacian_u, const std::function<double(int, Point)>& lambda,
                            const AssemblyOptions& options) {
  require_p0(q);
  const int nt = static_cast<int>(mesh.num_triangles());
  const int n = v.local_count;
  // Residual r = -Lap u - lambda - f; test (phi, 0) gives h^2 (r, -Lap phi), test (0, xi) gives h^2 (r, -xi).
  Vector v_res(v.num_dofs, 0.0);
  Vector q_res(q.num_dofs, 0.0);
  std::vector<std::array<double, kMaxLocal + 1>> local(nt);
  for_each_element(nt, options.threads, [&](int k) {
    const ElementGeometry geom = ElementGeometry::of(mesh, k);
    const QuadratureRule& rule = quadrature_rule(options.quadrature_order);
    const double scale = data.alpha_on(k) * geom.h * geom.h;
    std::array<BasisValue, kMaxLocal> phi;
    auto& out = local[k];
    out.fill(0.0);
    for (std::size_t p = 0; p < rule.points.size(); ++p) {
      eval_basis(v.spec.family, geom, rule.points[p], std::span(phi.data(), n));
      const Point x = geom.map(rule.points[p]);
      const double w = rule.weights[p] * 2.0 * geom.area;
      const double r = -laplacian_u(x) - lambda(k, x) - data.load(x);
      for (int i = 0; i < n; ++i) out[i] += w * scale * r * (-phi[i].laplacian);
      out[kMaxLocal] += w * scale * r * (-1.0);
    }
  });
  for (int k = 0; k < nt; ++k) {
    auto dofs = v.dofs(k);
    for (int i = 0; i < n; ++i) v_res[dofs[i]] += local[k][i];
    q_res[q.dofs(k)[0]] += local[k][kMaxLocal];
  }
  double worst = 0.0;
  for (int d : v.free_dofs) worst = std::max(worst, std::abs(v_res[d]));
  return std::max(worst, norm_inf(q_res));
}

}  // namespace obstacle
