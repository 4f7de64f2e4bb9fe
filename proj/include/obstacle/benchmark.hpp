#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "obstacle/assembly.hpp"
#include "obstacle/estimator.hpp"
#include "obstacle/solver.hpp"

namespace obstacle {

/// Radial benchmark on the disk of radius 2 with f = -1 and a spherical cap
/// obstacle continued linearly (C^1) beyond r = 0.9.
struct ExactSolution {
  double a = 0.0;   // contact radius
  double C1 = 0.0;  // log coefficient outside contact
  double c1 = 0.0;  // slope of the linear obstacle part
  double c2 = 0.0;

  double obstacle(double r) const;
  double obstacle_dr(double r) const;
  double obstacle_laplacian(double r) const;
  double u(double r) const;
  double u_dr(double r) const;
  double u_drr(double r) const;
  double lambda(double r) const;

  double u_at(Point x) const;
  Point grad_u(Point x) const;
  double lambda_at(Point x) const;
  Point obstacle_grad(Point x) const;

  /// Load and obstacle as assembly input.
  ProblemData problem(int degree, double alpha) const;
};

ExactSolution build_exact_solution();

/// H^1 error of the free coefficient vector `u` against the exact displacement.
double error_h1(const Mesh& mesh, const DofMap& v, std::span<const double> u, const ExactSolution& exact);

/// (sum_K h_K^2 ||lambda - lambda_h||^2_K)^{1/2}.
double error_lambda_neg(const Mesh& mesh, const DofMap& q, std::span<const double> lambda, const ExactSolution& exact);

enum class MethodKind { mixed, stabilized, nitsche };
enum class MeshFamily { conforming, nonconforming };

MethodKind parse_method(const std::string& name);
std::string to_string(MethodKind method);
MeshFamily parse_family(const std::string& name);
std::string to_string(MeshFamily family);

struct MethodSpec {
  MethodKind method = MethodKind::stabilized;
  int degree = 1;
  double alpha = 0.01;
  SolverOptions solver;
};

/// Displacement space used by a method: bubble-enriched for the mixed method.
Family displacement_family(const MethodSpec& spec);

struct LevelSolve {
  DofMap v;
  DofMap q;
  ProblemData data;
  DiscreteSolution sol;
  ErrorBreakdown estimate;
  double err_u = 0.0;
  double err_lambda = 0.0;
};

LevelSolve solve_benchmark(const Mesh& mesh, const MethodSpec& spec, const ExactSolution& exact,
                           const AssemblyOptions& options = {});

struct LevelRow {
  int level = 0;
  double h = 0.0;
  int ndof_u = 0;
  int ndof_lambda = 0;
  double err_u = 0.0;
  double err_lambda = 0.0;
  double eta = 0.0;
  double s = 0.0;
  double osc = 0.0;
  int iterations = 0;
  bool converged = false;
  int circle_vertices = 0;  // vertices on the contact circle
};

struct ConvergenceTable {
  std::vector<LevelRow> rows;
  std::vector<double> rate_u;       // rows.size() - 1 entries
  std::vector<double> rate_lambda;
};

/// log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for consecutive pairs.
std::vector<double> convergence_rates(std::span<const double> h, std::span<const double> err);

Mesh initial_mesh(MeshFamily family, double initial_h, const ExactSolution& exact);

struct AdaptiveStep {
  LevelRow row;
  int total_dofs = 0;
  std::vector<int> marked;
  /// Share of marked elements whose centroid lies within 2 h_K of r = a.
  double marked_near_contact = 0.0;
};

struct AdaptiveTable {
  std::vector<AdaptiveStep> steps;
};

/// Called once per level with the mesh, its solve and the elementwise indicator.
using LevelObserver = std::function<void(int level, const Mesh&, const LevelSolve&, const Vector& indicator)>;

/// Solve, local indicator, bulk marking and newest-vertex refinement until the
/// total number of unknowns reaches `dof_budget`.
AdaptiveTable adaptive_study(const MethodSpec& spec, MeshFamily family, double initial_h, double theta,
                             int dof_budget, const AssemblyOptions& options = {},
                             const LevelObserver& observer = {});

ConvergenceTable convergence_study(const MethodSpec& spec, MeshFamily family, double initial_h, int levels,
                                   const AssemblyOptions& options = {}, const LevelObserver& observer = {});

/// Least-squares slope of log(err) against log(n).
double loglog_slope(std::span<const double> n, std::span<const double> err);

/// Discrete inf-sup constant of the pair in the H^1 / discrete negative norm.
double infsup_diagnostic(const Mesh& mesh, SpaceSpec v_spec, SpaceSpec q_spec);

/// Largest alpha with A - alpha * sum h^2 (Lap, Lap) positive definite;
/// infinity when all Laplacians vanish.
double inverse_constant_estimate(const Mesh& mesh, SpaceSpec v_spec);

/// Per-element alpha under which the P1-P0 stabilized method coincides with
/// the P1 + bubble / P0 mixed method after static condensation.
std::vector<double> bubble_condensation_alpha(const Mesh& mesh);

constexpr int kDenseDofCap = 400;

}  // namespace obstacle
