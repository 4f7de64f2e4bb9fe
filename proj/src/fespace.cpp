#include "obstacle/fespace.hpp"

#include <algorithm>
#include <stdexcept>

namespace obstacle {

SpaceSpec make_space(Family family, Constraint constraint) {
  if (family == Family::P0_disc && constraint == Constraint::dirichlet) {
    throw std::invalid_argument("P0_disc carries no Dirichlet constraint");
  }
  return {family, constraint};
}

int local_dof_count(Family family) {
  switch (family) {
    case Family::P1: return 3;
    case Family::P2: return 6;
    case Family::P1_bubble: return 4;
    case Family::P2_bubble: return 7;
    case Family::P0_disc: return 1;
  }
  return 0;
}

int polynomial_degree(Family family) {
  switch (family) {
    case Family::P1:
    case Family::P1_bubble: return 1;
    case Family::P2:
    case Family::P2_bubble: return 2;
    case Family::P0_disc: return 0;
  }
  return 0;
}

bool has_bubble(Family family) { return family == Family::P1_bubble || family == Family::P2_bubble; }

std::string to_string(Family family) {
  switch (family) {
    case Family::P1: return "P1";
    case Family::P2: return "P2";
    case Family::P1_bubble: return "P1+B3";
    case Family::P2_bubble: return "P2+B3";
    case Family::P0_disc: return "P0";
  }
  return "?";
}

namespace {

QuadratureRule make_rule(int order, std::initializer_list<std::pair<Barycentric, double>> orbits) {
  QuadratureRule rule{{}, {}, order};
  for (const auto& [p, w] : orbits) {
    // Expand the orbit of p under permutations of the barycentric coordinates.
    std::vector<Barycentric> orbit;
    Barycentric q = p;
    std::array<int, 3> idx{0, 1, 2};
    do {
      Barycentric c{q[idx[0]], q[idx[1]], q[idx[2]]};
      bool seen = false;
      for (const auto& o : orbit) seen = seen || (o == c);
      if (!seen) orbit.push_back(c);
    } while (std::next_permutation(idx.begin(), idx.end()));
    for (const auto& c : orbit) {
      rule.points.push_back(c);
      rule.weights.push_back(0.5 * w);
    }
  }
  return rule;
}

Barycentric s111() { return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; }
Barycentric s21(double a) { return {1.0 - 2.0 * a, a, a}; }

}  // namespace

const QuadratureRule& quadrature_rule(int order) {
  // Dunavant rules of degree 1, 2, 4 and 6.
  static const QuadratureRule degree1 = make_rule(1, {{s111(), 1.0}});
  static const QuadratureRule degree2 = make_rule(2, {{s21(1.0 / 6.0), 1.0 / 3.0}});
  static const QuadratureRule degree4 =
      make_rule(4, {{s21(0.44594849091596488631832925388305), 0.22338158967801146569500700843312},
                    {s21(0.091576213509770743459571463402202), 0.10995174365532186763832632490021}});
  static const QuadratureRule degree6 = make_rule(
      6, {{s21(0.24928674517091042129163855310702), 0.11678627572637936602528961138558},
          {s21(0.063089014491502228340331602870819), 0.050844906370206816920936809106869},
          {Barycentric{0.053145049844816947353249671631398, 0.31035245103378440541660773395655,
                       0.63650249912139864723014259441205},
           0.082851075618373575193553456420442}});
  switch (order) {
    case 1: return degree1;
    case 2: return degree2;
    case 3:
    case 4: return degree4;
    case 5:
    case 6: return degree6;
    default: throw std::invalid_argument("no quadrature rule of order " + std::to_string(order));
  }
}

const LineRule& gauss_legendre(int n) {
  static const std::array<LineRule, 4> rules = [] {
    std::array<LineRule, 4> r;
    auto shift = [](std::vector<double> x, std::vector<double> w) {
      LineRule rule;
      for (std::size_t i = 0; i < x.size(); ++i) {
        rule.points.push_back(0.5 * (x[i] + 1.0));
        rule.weights.push_back(0.5 * w[i]);
      }
      return rule;
    };
    r[0] = shift({0.0}, {2.0});
    r[1] = shift({-0.57735026918962576451, 0.57735026918962576451}, {1.0, 1.0});
    r[2] = shift({-0.77459666924148337704, 0.0, 0.77459666924148337704},
                 {0.55555555555555555556, 0.88888888888888888889, 0.55555555555555555556});
    r[3] = shift({-0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480, 0.86113631159405257522},
                 {0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263, 0.34785484513745385737});
    return r;
  }();
  if (n < 1 || n > 4) throw std::invalid_argument("no Gauss-Legendre rule with " + std::to_string(n) + " points");
  return rules[n - 1];
}

ElementGeometry ElementGeometry::of(const Mesh& mesh, int k) {
  ElementGeometry g;
  g.corners = mesh.corners(k);
  g.area = mesh.area(k);
  g.h = mesh.diameter(k);
  for (int i = 0; i < 3; ++i) {
    Point d = g.corners[(i + 2) % 3] - g.corners[(i + 1) % 3];
    g.grad_bary[i] = {-d.y / (2.0 * g.area), d.x / (2.0 * g.area)};
  }
  return g;
}

Point ElementGeometry::map(const Barycentric& b) const {
  return {b[0] * corners[0].x + b[1] * corners[1].x + b[2] * corners[2].x,
          b[0] * corners[0].y + b[1] * corners[1].y + b[2] * corners[2].y};
}

Barycentric ElementGeometry::barycentric(Point x) const {
  Barycentric b;
  for (int i = 0; i < 3; ++i) {
    Point d = corners[(i + 2) % 3] - corners[(i + 1) % 3];
    b[i] = cross(d, x - corners[(i + 1) % 3]) / (2.0 * area);
  }
  return b;
}

void eval_basis(Family family, const ElementGeometry& geom, const Barycentric& b, std::span<BasisValue> out) {
  const auto& g = geom.grad_bary;
  auto vertex_p1 = [&](int i) {
    out[i] = {b[i], g[i], 0.0};
  };
  auto vertex_p2 = [&](int i) {
    out[i] = {b[i] * (2.0 * b[i] - 1.0), (4.0 * b[i] - 1.0) * g[i], 4.0 * dot(g[i], g[i])};
  };
  auto edge_p2 = [&](int i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    out[3 + i] = {4.0 * b[j] * b[k], 4.0 * (b[k] * g[j] + b[j] * g[k]), 8.0 * dot(g[j], g[k])};
  };
  auto bubble = [&](int slot) {
    double value = 27.0 * b[0] * b[1] * b[2];
    Point grad = 27.0 * (b[1] * b[2] * g[0] + b[0] * b[2] * g[1] + b[0] * b[1] * g[2]);
    double lap = 54.0 * (b[0] * dot(g[1], g[2]) + b[1] * dot(g[0], g[2]) + b[2] * dot(g[0], g[1]));
    out[slot] = {value, grad, lap};
  };

  switch (family) {
    case Family::P0_disc:
      out[0] = {1.0, {0.0, 0.0}, 0.0};
      break;
    case Family::P1:
    case Family::P1_bubble:
      for (int i = 0; i < 3; ++i) vertex_p1(i);
      if (family == Family::P1_bubble) bubble(3);
      break;
    case Family::P2:
    case Family::P2_bubble:
      for (int i = 0; i < 3; ++i) {
        vertex_p2(i);
        edge_p2(i);
      }
      if (family == Family::P2_bubble) bubble(6);
      break;
  }
}

std::vector<BasisValue> eval_basis(Family family, const ElementGeometry& geom, const Barycentric& b) {
  std::vector<BasisValue> out(local_dof_count(family));
  eval_basis(family, geom, b, out);
  return out;
}

DofMap build_dofmap(const Mesh& mesh, SpaceSpec spec) {
  spec = make_space(spec.family, spec.constraint);
  DofMap dm;
  dm.spec = spec;
  dm.local_count = local_dof_count(spec.family);
  const int nt = static_cast<int>(mesh.num_triangles());
  const int nv = static_cast<int>(mesh.num_vertices());
  const auto& topo = mesh.topology();
  const int ne = static_cast<int>(topo.edges.size());
  dm.element_dofs.resize(static_cast<std::size_t>(nt) * dm.local_count);

  if (spec.family == Family::P0_disc) {
    dm.num_dofs = nt;
    dm.kind.assign(nt, DofKind::element);
    for (int k = 0; k < nt; ++k) dm.element_dofs[k] = k;
  } else {
    const int degree = polynomial_degree(spec.family);
    const int edge_base = nv;
    const int bubble_base = nv + (degree == 2 ? ne : 0);
    dm.num_dofs = bubble_base + (has_bubble(spec.family) ? nt : 0);
    dm.kind.assign(dm.num_dofs, DofKind::vertex);
    for (int d = edge_base; d < bubble_base; ++d) dm.kind[d] = DofKind::edge;
    for (int d = bubble_base; d < dm.num_dofs; ++d) dm.kind[d] = DofKind::bubble;
    for (int k = 0; k < nt; ++k) {
      int* out = dm.element_dofs.data() + static_cast<std::size_t>(k) * dm.local_count;
      const auto& t = mesh.triangles()[k];
      for (int i = 0; i < 3; ++i) out[i] = t[i];
      int slot = 3;
      if (degree == 2) {
        for (int i = 0; i < 3; ++i) out[slot++] = edge_base + topo.element_edges[k][i];
      }
      if (has_bubble(spec.family)) out[slot] = bubble_base + k;
    }
  }

  dm.constrained.assign(dm.num_dofs, 0);
  if (spec.constraint == Constraint::dirichlet) {
    for (int v = 0; v < nv; ++v) dm.constrained[v] = mesh.on_boundary(v) ? 1 : 0;
    if (polynomial_degree(spec.family) == 2) {
      for (int e : topo.boundary) dm.constrained[nv + e] = 1;
    }
  }
  dm.free_index.assign(dm.num_dofs, -1);
  for (int d = 0; d < dm.num_dofs; ++d) {
    if (!dm.constrained[d]) {
      dm.free_index[d] = static_cast<int>(dm.free_dofs.size());
      dm.free_dofs.push_back(d);
    }
  }
  return dm;
}

Vector DofMap::expand(std::span<const double> free) const {
  Vector full(num_dofs, 0.0);
  for (std::size_t i = 0; i < free_dofs.size(); ++i) full[free_dofs[i]] = free[i];
  return full;
}

Vector DofMap::restrict_to_free(std::span<const double> full) const {
  Vector free(free_dofs.size());
  for (std::size_t i = 0; i < free_dofs.size(); ++i) free[i] = full[free_dofs[i]];
  return free;
}

BasisValue eval_field(const DofMap& dofs, std::span<const double> coefficients, const ElementGeometry& geom, int k,
                      const Barycentric& b) {
  std::array<BasisValue, 7> phi;
  std::span<BasisValue> basis(phi.data(), dofs.local_count);
  eval_basis(dofs.spec.family, geom, b, basis);
  BasisValue out;
  auto local = dofs.dofs(k);
  for (int i = 0; i < dofs.local_count; ++i) {
    double c = coefficients[local[i]];
    out.value += c * basis[i].value;
    out.gradient = out.gradient + c * basis[i].gradient;
    out.laplacian += c * basis[i].laplacian;
  }
  return out;
}

}  // namespace obstacle
