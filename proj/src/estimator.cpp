#include "obstacle/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "obstacle/parallel.hpp"

namespace obstacle {

namespace {

// Per-element integrals that both estimators are built from.
struct ElementTerms {
  double residual = 0.0;     // ||Lap u + lambda + f||^2_K
  double penetration = 0.0;  // ||(g - u)_+||^2_{1,K}
  double gap_mixed = 0.0;    // int (g - u)_+ lambda
  double gap_stab = 0.0;     // int (u - g)_+ lambda
};

ElementTerms element_terms(const Mesh& mesh, const DofMap& v, const Vector& u, double lambda, const ProblemData& data,
                           int k, const QuadratureRule& rule) {
  const ElementGeometry geom = ElementGeometry::of(mesh, k);
  ElementTerms t;
  for (std::size_t p = 0; p < rule.points.size(); ++p) {
    const BasisValue uh = eval_field(v, u, geom, k, rule.points[p]);
    const Point x = geom.map(rule.points[p]);
    const double w = rule.weights[p] * 2.0 * geom.area;
    const double r = uh.laplacian + lambda + data.load(x);
    t.residual += w * r * r;
    const double gap = data.obstacle(x) - uh.value;
    if (gap > 0.0) {
      const Point grad = data.obstacle_grad(x) - uh.gradient;
      t.penetration += w * (gap * gap + dot(grad, grad));
      t.gap_mixed += w * gap * lambda;
    } else if (gap < 0.0) {
      t.gap_stab += w * (-gap) * lambda;
    }
  }
  return t;
}

// Squared normal-derivative jump integrated over every interior edge.
Vector edge_jumps(const Mesh& mesh, const DofMap& v, const Vector& u, int threads) {
  const auto& topo = mesh.topology();
  const int ne = static_cast<int>(topo.edges.size());
  const LineRule& line = gauss_legendre(4);
  Vector out(ne, 0.0);
  for_each_element(ne, threads, [&](int e) {
    const Edge& edge = topo.edges[e];
    if (!edge.is_interior()) return;
    const Point a = mesh.vertices()[edge.vertices[0]];
    const Point b = mesh.vertices()[edge.vertices[1]];
    const ElementGeometry left = ElementGeometry::of(mesh, edge.left);
    const ElementGeometry right = ElementGeometry::of(mesh, edge.right);
    double sum = 0.0;
    for (std::size_t p = 0; p < line.points.size(); ++p) {
      const Point x = a + line.points[p] * (b - a);
      const Point gl = eval_field(v, u, left, edge.left, left.barycentric(x)).gradient;
      const Point gr = eval_field(v, u, right, edge.right, right.barycentric(x)).gradient;
      const double jump = dot(gl - gr, edge.normal);
      sum += line.weights[p] * edge.length * jump * jump;
    }
    out[e] = sum;
  });
  return out;
}

double lambda_on(const DofMap& q, const Vector& lambda, int k) { return lambda[q.dofs(k)[0]]; }

}  // namespace

ErrorBreakdown estimate(const Mesh& mesh, const DofMap& v, const DofMap& q, const DiscreteSolution& sol,
                        const ProblemData& data, Method method, const AssemblyOptions& options) {
  const int nt = static_cast<int>(mesh.num_triangles());
  const Vector u = v.expand(sol.u);
  const QuadratureRule& rule = quadrature_rule(options.quadrature_order);
  std::vector<ElementTerms> terms(nt);
  for_each_element(nt, options.threads, [&](int k) {
    terms[k] = element_terms(mesh, v, u, lambda_on(q, sol.lambda, k), data, k, rule);
  });
  const Vector jumps = edge_jumps(mesh, v, u, options.threads);

  ErrorBreakdown out;
  out.eta_K.resize(nt);
  out.eta_E.assign(jumps.size(), 0.0);
  double sum = 0.0, penetration = 0.0, gap = 0.0;
  for (int k = 0; k < nt; ++k) {
    const double h = mesh.diameter(k);
    out.eta_K[k] = h * std::sqrt(terms[k].residual);
    sum += out.eta_K[k] * out.eta_K[k];
    penetration += terms[k].penetration;
    gap += method == Method::mixed ? terms[k].gap_mixed : terms[k].gap_stab;
  }
  const auto& edges = mesh.topology().edges;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!edges[e].is_interior()) continue;
    out.eta_E[e] = std::sqrt(edges[e].length * jumps[e]);
    sum += out.eta_E[e] * out.eta_E[e];
  }
  out.eta = std::sqrt(sum);
  out.s_term = std::sqrt(penetration) + std::sqrt(gap);
  Oscillation osc = oscillation(mesh, data, options);
  out.osc = std::move(osc.per_element);
  out.osc_total = osc.total;
  out.total = out.eta + out.s_term;
  return out;
}

Vector local_indicator(const Mesh& mesh, const DofMap& v, const DofMap& q, const DiscreteSolution& sol,
                       const ProblemData& data, const AssemblyOptions& options) {
  const int nt = static_cast<int>(mesh.num_triangles());
  const Vector u = v.expand(sol.u);
  const QuadratureRule& rule = quadrature_rule(options.quadrature_order);
  const Vector jumps = edge_jumps(mesh, v, u, options.threads);
  const auto& topo = mesh.topology();
  Vector out(nt);
  for_each_element(nt, options.threads, [&](int k) {
    const ElementTerms t = element_terms(mesh, v, u, lambda_on(q, sol.lambda, k), data, k, rule);
    const double h = mesh.diameter(k);
    double edge_sum = 0.0;
    for (int e : topo.element_edges[k]) edge_sum += jumps[e];
    out[k] = std::sqrt(h * h * t.residual + 0.5 * h * edge_sum + t.penetration + t.gap_stab);
  });
  return out;
}

MarkingResult mark(std::span<const double> indicators, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("mark: theta must lie in (0, 1]");
  const int n = static_cast<int>(indicators.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return indicators[a] * indicators[a] > indicators[b] * indicators[b];
  });
  double total = 0.0;
  for (double x : indicators) total += x * x;
  MarkingResult out;
  if (!(total > 0.0)) return out;
  // Relative slack keeps round-off from adding one element past the exact prefix.
  const double target = theta * total * (1.0 - 1e-12);
  double covered = 0.0;
  for (int k : order) {
    if (covered >= target) break;
    covered += indicators[k] * indicators[k];
    out.marked.push_back(k);
  }
  out.fraction = covered / total;
  std::sort(out.marked.begin(), out.marked.end());
  return out;
}

Oscillation oscillation(const Mesh& mesh, const ProblemData& data, const AssemblyOptions& options) {
  const int nt = static_cast<int>(mesh.num_triangles());
  const QuadratureRule& rule = quadrature_rule(options.quadrature_order);
  Oscillation out;
  out.per_element.resize(nt);
  for_each_element(nt, options.threads, [&](int k) {
    const ElementGeometry geom = ElementGeometry::of(mesh, k);
    const std::size_t np = rule.points.size();
    std::vector<double> fx(np);
    double mean = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      fx[p] = data.load(geom.map(rule.points[p]));
      mean += 2.0 * rule.weights[p] * fx[p];
    }
    double sq = 0.0;
    for (std::size_t p = 0; p < np; ++p) sq += rule.weights[p] * 2.0 * geom.area * (fx[p] - mean) * (fx[p] - mean);
    out.per_element[k] = geom.h * std::sqrt(sq);
  });
  double sum = 0.0;
  for (double x : out.per_element) sum += x * x;
  out.total = std::sqrt(sum);
  return out;
}

}  // namespace obstacle
