#pragma once

#include <string>
#include <vector>

#include "obstacle/assembly.hpp"

namespace obstacle {

struct SolverReport {
  int iterations = 0;
  std::vector<double> lambda_update_norms;
  /// Active (or contact) element ids after each iteration.
  std::vector<std::vector<int>> active_history;
  bool converged = false;
  bool oscillation = false;
  int linear_iterations = 0;
  std::string message;
};

struct DiscreteSolution {
  Vector u;       // free V-dofs
  Vector lambda;  // Q-dofs
  std::vector<int> active_set;
  SolverReport report;
};

struct SolverOptions {
  double c = 1.0;
  double tol = 1e-10;
  int max_iter = 100;
  double linear_tol = 1e-12;
};

DiscreteSolution pdas_mixed(const MixedSystem& sys, const SolverOptions& options = {});
DiscreteSolution pdas_stabilized(const StabilizedSystem& sys, const SolverOptions& options = {});

/// Fixed-point iteration on the contact region with the multiplier eliminated
/// locally. For k = 1 contact is decided per element from element means; for
/// k = 2 pointwise at quadrature points of the chosen rule.
DiscreteSolution nitsche_solve(const Mesh& mesh, const DofMap& v, const DofMap& q, const ProblemData& data,
                               const SolverOptions& options = {}, const AssemblyOptions& assembly = {});

struct KktResiduals {
  double primal = 0.0;          // ||min(Bu (+ C lambda) - g, 0)||_inf
  double dual = 0.0;            // ||min(lambda, 0)||_inf
  double complementarity = 0.0; // ||lambda .* (Bu (+ C lambda) - g)||_inf
  double stationarity = 0.0;    // ||Au - B^T lambda - f||_inf
  double scale = 1.0;           // max(1, |f|, |g|, |lambda|) in the inf-norm

  bool ok(double rel = 1e-9) const {
    return dual <= 1e-12 && primal <= rel * scale && complementarity <= rel * scale;
  }
};

KktResiduals kkt_check(const DiscreteSolution& sol, const MixedSystem& sys);
KktResiduals kkt_check(const DiscreteSolution& sol, const StabilizedSystem& sys);

}  // namespace obstacle
