#include "obstacle/benchmark.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace obstacle {

namespace {

constexpr double kKink = 0.9;
constexpr double kOuter = 2.0;

double radius(Point x) { return std::hypot(x.x, x.y); }

}  // namespace

double ExactSolution::obstacle(double r) const {
  return r < kKink ? std::sqrt(1.0 - r * r) : c1 * r + c2;
}

double ExactSolution::obstacle_dr(double r) const {
  return r < kKink ? -r / std::sqrt(1.0 - r * r) : c1;
}

double ExactSolution::obstacle_laplacian(double r) const {
  if (r >= kKink) return c1 / r;
  const double s = 1.0 - r * r;
  return -std::pow(s, -1.5) - 1.0 / std::sqrt(s);
}

double ExactSolution::u(double r) const {
  return r <= a ? obstacle(r) : r * r / 4.0 - 1.0 + C1 * std::log(r / kOuter);
}

double ExactSolution::u_dr(double r) const { return r <= a ? obstacle_dr(r) : r / 2.0 + C1 / r; }

double ExactSolution::u_drr(double r) const {
  if (r <= a) return -std::pow(1.0 - r * r, -1.5);
  return 0.5 - C1 / (r * r);
}

double ExactSolution::lambda(double r) const { return r < a ? 1.0 - obstacle_laplacian(r) : 0.0; }

double ExactSolution::u_at(Point x) const { return u(radius(x)); }

Point ExactSolution::grad_u(Point x) const {
  const double r = radius(x);
  if (r == 0.0) return {0.0, 0.0};
  return (u_dr(r) / r) * x;
}

double ExactSolution::lambda_at(Point x) const { return lambda(radius(x)); }

Point ExactSolution::obstacle_grad(Point x) const {
  const double r = radius(x);
  if (r == 0.0) return {0.0, 0.0};
  return (obstacle_dr(r) / r) * x;
}

ProblemData ExactSolution::problem(int degree, double alpha) const {
  ProblemData data;
  data.load = [](Point) { return -1.0; };
  data.obstacle = [*this](Point x) { return obstacle(radius(x)); };
  data.obstacle_gradient = [*this](Point x) { return obstacle_grad(x); };
  data.alpha = alpha;
  data.degree = degree;
  return data;
}

ExactSolution build_exact_solution() {
  ExactSolution ex;
  // C^1 continuation of sqrt(1 - r^2) at r = 0.9.
  const double s = std::sqrt(1.0 - kKink * kKink);
  ex.c1 = -kKink / s;
  ex.c2 = s - ex.c1 * kKink;
  auto mismatch = [&](double a) {
    const double c = a * (ex.obstacle_dr(a) - a / 2.0);
    return a * a / 4.0 - 1.0 + c * std::log(a / kOuter) - ex.obstacle(a);
  };
  double lo = 0.7, hi = 0.9;
  double flo = mismatch(lo);
  if (flo * mismatch(hi) > 0.0) throw std::runtime_error("contact radius not bracketed");
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    const double fm = mismatch(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  ex.a = 0.5 * (lo + hi);
  ex.C1 = ex.a * (ex.obstacle_dr(ex.a) - ex.a / 2.0);
  return ex;
}

double error_h1(const Mesh& mesh, const DofMap& v, std::span<const double> u, const ExactSolution& exact) {
  const Vector full = v.expand(u);
  const QuadratureRule& rule = quadrature_rule(6);
  double sum = 0.0;
  for (int k = 0; k < static_cast<int>(mesh.num_triangles()); ++k) {
    const ElementGeometry geom = ElementGeometry::of(mesh, k);
    for (std::size_t p = 0; p < rule.points.size(); ++p) {
      const BasisValue uh = eval_field(v, full, geom, k, rule.points[p]);
      const Point x = geom.map(rule.points[p]);
      const double e = exact.u_at(x) - uh.value;
      const Point ge = exact.grad_u(x) - uh.gradient;
      sum += rule.weights[p] * 2.0 * geom.area * (e * e + dot(ge, ge));
    }
  }
  return std::sqrt(sum);
}

double error_lambda_neg(const Mesh& mesh, const DofMap& q, std::span<const double> lambda, const ExactSolution& exact) {
  const QuadratureRule& rule = quadrature_rule(6);
  double sum = 0.0;
  for (int k = 0; k < static_cast<int>(mesh.num_triangles()); ++k) {
    const ElementGeometry geom = ElementGeometry::of(mesh, k);
    const double lh = lambda[q.dofs(k)[0]];
    double local = 0.0;
    for (std::size_t p = 0; p < rule.points.size(); ++p) {
      const double e = exact.lambda_at(geom.map(rule.points[p])) - lh;
      local += rule.weights[p] * 2.0 * geom.area * e * e;
    }
    sum += geom.h * geom.h * local;
  }
  return std::sqrt(sum);
}

MethodKind parse_method(const std::string& name) {
  if (name == "mixed") return MethodKind::mixed;
  if (name == "stabilized") return MethodKind::stabilized;
  if (name == "nitsche") return MethodKind::nitsche;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(MethodKind method) {
  switch (method) {
    case MethodKind::mixed: return "mixed";
    case MethodKind::stabilized: return "stabilized";
    case MethodKind::nitsche: return "nitsche";
  }
  return "?";
}

MeshFamily parse_family(const std::string& name) {
  if (name == "conforming") return MeshFamily::conforming;
  if (name == "nonconforming") return MeshFamily::nonconforming;
  throw std::invalid_argument("unknown mesh family '" + name + "'");
}

std::string to_string(MeshFamily family) {
  return family == MeshFamily::conforming ? "conforming" : "nonconforming";
}

Family displacement_family(const MethodSpec& spec) {
  if (spec.degree != 1 && spec.degree != 2) throw std::invalid_argument("degree must be 1 or 2");
  if (spec.method == MethodKind::mixed) return spec.degree == 1 ? Family::P1_bubble : Family::P2_bubble;
  return spec.degree == 1 ? Family::P1 : Family::P2;
}

LevelSolve solve_benchmark(const Mesh& mesh, const MethodSpec& spec, const ExactSolution& exact,
                           const AssemblyOptions& options) {
  LevelSolve out{build_dofmap(mesh, {displacement_family(spec), Constraint::dirichlet}),
                 build_dofmap(mesh, {Family::P0_disc, Constraint::none}),
                 exact.problem(spec.degree, spec.alpha),
                 {},
                 {},
                 0.0,
                 0.0};
  Method est_method = Method::stabilized;
  switch (spec.method) {
    case MethodKind::mixed:
      out.sol = pdas_mixed(assemble_mixed(mesh, out.v, out.q, out.data, options), spec.solver);
      est_method = Method::mixed;
      break;
    case MethodKind::stabilized:
      out.sol = pdas_stabilized(assemble_stabilized(mesh, out.v, out.q, out.data, options), spec.solver);
      break;
    case MethodKind::nitsche:
      out.sol = nitsche_solve(mesh, out.v, out.q, out.data, spec.solver, options);
      break;
  }
  out.estimate = estimate(mesh, out.v, out.q, out.sol, out.data, est_method, options);
  out.err_u = error_h1(mesh, out.v, out.sol.u, exact);
  out.err_lambda = error_lambda_neg(mesh, out.q, out.sol.lambda, exact);
  return out;
}

std::vector<double> convergence_rates(std::span<const double> h, std::span<const double> err) {
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) rates.push_back(std::log(err[i] / err[i + 1]) / std::log(h[i] / h[i + 1]));
  return rates;
}

Mesh initial_mesh(MeshFamily family, double initial_h, const ExactSolution& exact) {
  if (family == MeshFamily::conforming) return generate_disk_mesh(kOuter, initial_h, exact.a);
  return generate_disk_mesh(kOuter, initial_h);
}

namespace {

LevelRow make_row(int level, const Mesh& mesh, const LevelSolve& s, const ExactSolution& exact) {
  LevelRow row;
  row.level = level;
  row.h = mesh.max_diameter();
  row.ndof_u = s.v.num_free();
  row.ndof_lambda = s.q.num_dofs;
  row.err_u = s.err_u;
  row.err_lambda = s.err_lambda;
  row.eta = s.estimate.eta;
  row.s = s.estimate.s_term;
  row.osc = s.estimate.osc_total;
  row.iterations = s.sol.report.iterations;
  row.converged = s.sol.report.converged;
  row.circle_vertices = count_vertices_on_circle(mesh, exact.a);
  return row;
}

LevelSolve solve_level(int level, const Mesh& mesh, const MethodSpec& spec, const ExactSolution& exact,
                       const AssemblyOptions& options) {
  try {
    return solve_benchmark(mesh, spec, exact, options);
  } catch (const std::exception& e) {
    throw std::runtime_error("level " + std::to_string(level) + ": " + e.what());
  }
}

}  // namespace

ConvergenceTable convergence_study(const MethodSpec& spec, MeshFamily family, double initial_h, int levels,
                                   const AssemblyOptions& options, const LevelObserver& observer) {
  if (levels < 1) throw std::invalid_argument("convergence_study: levels must be at least 1");
  const ExactSolution exact = build_exact_solution();
  ConvergenceTable table;
  Mesh mesh = initial_mesh(family, initial_h, exact);
  std::vector<double> hs, eu, el;
  for (int level = 0; level < levels; ++level) {
    if (level > 0) mesh = refine_uniform(mesh);
    const LevelSolve s = solve_level(level, mesh, spec, exact, options);
    const LevelRow row = make_row(level, mesh, s, exact);
    if (observer) observer(level, mesh, s, local_indicator(mesh, s.v, s.q, s.sol, s.data, options));
    table.rows.push_back(row);
    hs.push_back(row.h);
    eu.push_back(row.err_u);
    el.push_back(row.err_lambda);
  }
  table.rate_u = convergence_rates(hs, eu);
  table.rate_lambda = convergence_rates(hs, el);
  return table;
}

AdaptiveTable adaptive_study(const MethodSpec& spec, MeshFamily family, double initial_h, double theta,
                             int dof_budget, const AssemblyOptions& options, const LevelObserver& observer) {
  const ExactSolution exact = build_exact_solution();
  AdaptiveTable table;
  Mesh mesh = initial_mesh(family, initial_h, exact);
  for (int level = 0;; ++level) {
    const LevelSolve s = solve_level(level, mesh, spec, exact, options);
    const Vector indicator = local_indicator(mesh, s.v, s.q, s.sol, s.data, options);
    if (observer) observer(level, mesh, s, indicator);
    AdaptiveStep step;
    step.row = make_row(level, mesh, s, exact);
    step.total_dofs = step.row.ndof_u + step.row.ndof_lambda;
    const bool done = step.total_dofs >= dof_budget;
    if (!done) {
      step.marked = mark(indicator, theta).marked;
      int near = 0;
      for (int k : step.marked) {
        if (std::abs(norm(mesh.centroid(k)) - exact.a) <= 2.0 * mesh.diameter(k)) ++near;
      }
      step.marked_near_contact = step.marked.empty() ? 0.0 : static_cast<double>(near) / step.marked.size();
    }
    table.steps.push_back(std::move(step));
    if (done || table.steps.back().marked.empty()) break;
    mesh = refine_adaptive(mesh, table.steps.back().marked);
  }
  return table;
}

double loglog_slope(std::span<const double> n, std::span<const double> err) {
  const std::size_t m = n.size();
  if (m < 2 || err.size() != m) throw std::invalid_argument("loglog_slope: need at least two matching points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(n[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {

Eigen::MatrixXd to_dense(const SparseMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  const auto& off = m.row_offsets();
  for (int i = 0; i < m.rows(); ++i) {
    for (int p = off[i]; p < off[i + 1]; ++p) d(i, m.col_indices()[p]) = m.values()[p];
  }
  return d;
}

ProblemData zero_problem() {
  ProblemData data;
  data.load = [](Point) { return 0.0; };
  data.obstacle = [](Point) { return 0.0; };
  return data;
}

}  // namespace

double infsup_diagnostic(const Mesh& mesh, SpaceSpec v_spec, SpaceSpec q_spec) {
  const DofMap v = build_dofmap(mesh, v_spec);
  const DofMap q = build_dofmap(mesh, q_spec);
  if (v.num_free() + q.num_dofs > kDenseDofCap) throw std::invalid_argument("infsup_diagnostic: too many dofs");
  const MixedSystem sys = assemble_mixed(mesh, v, q, zero_problem());
  const Eigen::MatrixXd h = to_dense(assemble_h1_gram(mesh, v));
  const Eigen::MatrixXd b = to_dense(sys.B);
  Eigen::VectorXd dinv_sqrt(q.num_dofs);
  for (int k = 0; k < q.num_dofs; ++k) dinv_sqrt[k] = 1.0 / (mesh.diameter(k) * std::sqrt(mesh.area(k)));
  const Eigen::MatrixXd scaled = dinv_sqrt.asDiagonal() * b;
  const Eigen::MatrixXd s = scaled * h.llt().solve(scaled.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues()[0]));
}

double inverse_constant_estimate(const Mesh& mesh, SpaceSpec v_spec) {
  const DofMap v = build_dofmap(mesh, v_spec);
  if (v.num_free() > kDenseDofCap) throw std::invalid_argument("inverse_constant_estimate: too many dofs");
  const Eigen::MatrixXd l = to_dense(assemble_laplacian_gram(mesh, v));
  const Eigen::MatrixXd a = to_dense(assemble_mixed(mesh, v, build_dofmap(mesh, {Family::P0_disc, Constraint::none}),
                                                    zero_problem())
                                         .A);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(l, a, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues()[eig.eigenvalues().size() - 1];
  if (!(top > 1e-14)) return std::numeric_limits<double>::infinity();
  return 1.0 / top;
}

std::vector<double> bubble_condensation_alpha(const Mesh& mesh) {
  std::vector<double> alpha(mesh.num_triangles());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const ElementGeometry geom = ElementGeometry::of(mesh, static_cast<int>(k));
    double grad_sq = 0.0;
    for (const Point& g : geom.grad_bary) grad_sq += dot(g, g);
    const double beta = 9.0 * geom.area / 20.0;             // int b_K
    const double stiff = 729.0 * geom.area * grad_sq / 180.0;  // int |grad b_K|^2
    alpha[k] = beta * beta / (stiff * geom.h * geom.h * geom.area);
  }
  return alpha;
}

}  // namespace obstacle
