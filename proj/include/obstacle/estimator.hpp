#pragma once

#include <span>
#include <vector>

#include "obstacle/assembly.hpp"
#include "obstacle/solver.hpp"

namespace obstacle {

enum class Method { mixed, stabilized };

struct ErrorBreakdown {
  Vector eta_K;  // per element
  Vector eta_E;  // per edge of the topology; zero on boundary edges
  Vector osc;    // per element
  double s_term = 0.0;
  double eta = 0.0;
  double osc_total = 0.0;
  double total = 0.0;  // eta + s_term
};

ErrorBreakdown estimate(const Mesh& mesh, const DofMap& v, const DofMap& q, const DiscreteSolution& sol,
                        const ProblemData& data, Method method, const AssemblyOptions& options = {});

/// Elementwise indicator used to drive adaptive refinement.
Vector local_indicator(const Mesh& mesh, const DofMap& v, const DofMap& q, const DiscreteSolution& sol,
                       const ProblemData& data, const AssemblyOptions& options = {});

struct MarkingResult {
  std::vector<int> marked;
  double fraction = 0.0;
};

/// Bulk marking on squared indicators: the shortest prefix of elements sorted
/// by decreasing indicator (ties by id) whose squared sum reaches theta.
MarkingResult mark(std::span<const double> indicators, double theta = 0.9);

struct Oscillation {
  Vector per_element;
  double total = 0.0;
};

/// osc_K = h_K ||f - f_K||_K with f_K the element mean of f.
Oscillation oscillation(const Mesh& mesh, const ProblemData& data, const AssemblyOptions& options = {});

}  // namespace obstacle
