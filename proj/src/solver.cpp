#include "obstacle/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "obstacle/parallel.hpp"

namespace obstacle {

namespace {

std::vector<int> positive_entries(std::span<const double> x) {
  std::vector<int> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) out.push_back(static_cast<int>(i));
  }
  return out;
}

double inf_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// sum over rows r in `rows` of weight[r] * b_r^T b_r.
SparseMatrix weighted_row_gram(const SparseMatrix& b, std::span<const int> rows, std::span<const double> weight) {
  const auto& off = b.row_offsets();
  const auto& col = b.col_indices();
  const auto& val = b.values();
  std::vector<Triplet> t;
  for (int r : rows) {
    for (int p = off[r]; p < off[r + 1]; ++p) {
      for (int s = off[r]; s < off[r + 1]; ++s) t.push_back({col[p], col[s], weight[r] * val[p] * val[s]});
    }
  }
  return SparseMatrix::from_triplets(b.cols(), b.cols(), std::move(t));
}

std::vector<int> merge_active(const std::vector<int>& a, std::span<const double> lambda) {
  std::vector<int> out = positive_entries(lambda);
  out.insert(out.end(), a.begin(), a.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string format_failure(const char* what, int iteration, const char* detail) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s at iteration %d: %s", what, iteration, detail);
  return buf;
}

}  // namespace

DiscreteSolution pdas_mixed(const MixedSystem& sys, const SolverOptions& options) {
  if (!(options.c > 0.0)) throw std::invalid_argument("pdas_mixed: c must be positive");
  const int m = sys.B.rows();
  DiscreteSolution sol;
  auto& rep = sol.report;
  auto first = symmetric_solve(sys.A, sys.f, options.linear_tol);
  rep.linear_iterations += first.stats.iterations;
  sol.u = std::move(first.x);
  sol.lambda.assign(m, 0.0);
  std::vector<int> active;

  for (int k = 0; k < options.max_iter; ++k) {
    Vector bu = sys.B * sol.u;
    Vector s(m);
    for (int i = 0; i < m; ++i) s[i] = sol.lambda[i] + options.c * (sys.g[i] - bu[i]);
    active = positive_entries(s);

    Vector next(m, 0.0);
    if (active.empty()) {
      auto r = symmetric_solve(sys.A, sys.f, options.linear_tol);
      rep.linear_iterations += r.stats.iterations;
      sol.u = std::move(r.x);
    } else {
      Vector ga(active.size());
      for (std::size_t i = 0; i < active.size(); ++i) ga[i] = sys.g[active[i]];
      SaddleSolveResult r;
      try {
        r = saddle_solve(sys.A, sys.B.select_rows(active), sys.f, ga, options.linear_tol);
      } catch (const SingularSystemError& e) {
        throw SingularSystemError(format_failure("pdas_mixed", k + 1, e.what()), e.rows);
      }
      rep.linear_iterations += r.outer.iterations + r.inner_iterations;
      sol.u = std::move(r.u);
      for (std::size_t i = 0; i < active.size(); ++i) next[active[i]] = r.lambda[i];
    }
    const double update = inf_diff(next, sol.lambda);
    sol.lambda = std::move(next);
    rep.lambda_update_norms.push_back(update);
    rep.active_history.push_back(active);
    rep.iterations = k + 1;
    if (update <= options.tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) rep.message = "maximum number of iterations reached";
  sol.active_set = merge_active(active, sol.lambda);
  return sol;
}

DiscreteSolution pdas_stabilized(const StabilizedSystem& sys, const SolverOptions& options) {
  const int m = sys.B.rows();
  Vector cinv(m);
  for (int i = 0; i < m; ++i) {
    if (!(sys.c_blocks[i] > 0.0)) throw SingularSystemError("pdas_stabilized: C block not positive", 1);
    cinv[i] = 1.0 / sys.c_blocks[i];
  }
  auto multiplier = [&](const Vector& u, bool project) {
    Vector bu = sys.B * u;
    Vector lam(m);
    for (int i = 0; i < m; ++i) {
      lam[i] = cinv[i] * (sys.g[i] - bu[i]);
      if (project) lam[i] = std::max(0.0, lam[i]);
    }
    return lam;
  };

  DiscreteSolution sol;
  auto& rep = sol.report;
  auto first = symmetric_solve(sys.A, sys.f, options.linear_tol);
  rep.linear_iterations += first.stats.iterations;
  sol.u = std::move(first.x);
  sol.lambda = multiplier(sol.u, false);
  std::vector<int> active;

  for (int k = 0; k < options.max_iter; ++k) {
    active = positive_entries(sol.lambda);
    SparseMatrix mat = active.empty() ? sys.A : add(sys.A, weighted_row_gram(sys.B, active, cinv));
    Vector rhs = sys.f;
    for (int r : active) {
      const auto& off = sys.B.row_offsets();
      for (int p = off[r]; p < off[r + 1]; ++p) {
        rhs[sys.B.col_indices()[p]] += sys.B.values()[p] * cinv[r] * sys.g[r];
      }
    }
    SpdSolveResult solve;
    try {
      solve = symmetric_solve(mat, rhs, options.linear_tol);
    } catch (const LinearSolverError& e) {
      throw LinearSolverError(format_failure("pdas_stabilized", k + 1, e.what()), e.achieved_residual,
                              e.iterations);
    }
    rep.linear_iterations += solve.stats.iterations;
    sol.u = std::move(solve.x);
    Vector next = multiplier(sol.u, true);
    const double update = inf_diff(next, sol.lambda);
    sol.lambda = std::move(next);
    rep.lambda_update_norms.push_back(update);
    rep.active_history.push_back(active);
    rep.iterations = k + 1;
    if (update <= options.tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) rep.message = "maximum number of iterations reached";
  sol.active_set = merge_active(active, sol.lambda);
  return sol;
}

namespace {

constexpr int kMaxLocal = 7;

struct ContactState {
  std::vector<double> lambda;   // per quadrature point (nt * nq)
  std::vector<char> chi;        // per quadrature point
  std::vector<char> element;    // per element
  Vector mean;                  // element mean of lambda
};

struct LocalCorrection {
  std::array<double, kMaxLocal * kMaxLocal> a{};
  std::array<double, kMaxLocal> f{};
};

}  // namespace

DiscreteSolution nitsche_solve(const Mesh& mesh, const DofMap& v, const DofMap& q, const ProblemData& data,
                               const SolverOptions& options, const AssemblyOptions& assembly) {
  const int degree = polynomial_degree(v.spec.family);
  if (degree != 1 && degree != 2) throw std::invalid_argument("nitsche_solve: degree must be 1 or 2");
  const bool projected = degree == 1;
  const StabilizedSystem base = assemble_stabilized(mesh, v, q, data, assembly);
  const int nt = static_cast<int>(mesh.num_triangles());
  const int n = v.local_count;
  const QuadratureRule& rule = quadrature_rule(assembly.quadrature_order);
  const int nq = static_cast<int>(rule.points.size());

  auto contact_from = [&](const Vector& u_free) {
    const Vector u = v.expand(u_free);
    ContactState st;
    st.lambda.assign(static_cast<std::size_t>(nt) * nq, 0.0);
    st.chi.assign(st.lambda.size(), 0);
    st.element.assign(nt, 0);
    st.mean.assign(nt, 0.0);
    for_each_element(nt, assembly.threads, [&](int k) {
      const ElementGeometry geom = ElementGeometry::of(mesh, k);
      const double inv = 1.0 / (data.alpha_on(k) * geom.h * geom.h);
      std::array<double, 64> r{};
      double u_mean = 0.0, g_mean = 0.0, f_mean = 0.0;
      for (int p = 0; p < nq; ++p) {
        const BasisValue uh = eval_field(v, u, geom, k, rule.points[p]);
        const Point x = geom.map(rule.points[p]);
        const double w = 2.0 * rule.weights[p];
        const double gx = data.obstacle(x), fx = data.load(x);
        r[p] = inv * (gx - uh.value) - fx - uh.laplacian;
        u_mean += w * uh.value;
        g_mean += w * gx;
        f_mean += w * fx;
      }
      const std::size_t at = static_cast<std::size_t>(k) * nq;
      if (projected) {
        const double lam = inv * (g_mean - u_mean) - f_mean;
        if (lam > 0.0) {
          st.element[k] = 1;
          st.mean[k] = lam;
          for (int p = 0; p < nq; ++p) {
            st.lambda[at + p] = lam;
            st.chi[at + p] = 1;
          }
        }
      } else {
        for (int p = 0; p < nq; ++p) {
          if (r[p] > 0.0) {
            st.element[k] = 1;
            st.lambda[at + p] = r[p];
            st.chi[at + p] = 1;
            st.mean[k] += 2.0 * rule.weights[p] * r[p];
          }
        }
      }
    });
    return st;
  };

  auto system_for = [&](const ContactState& st) {
    std::vector<LocalCorrection> blocks(nt);
    for_each_element(nt, assembly.threads, [&](int k) {
      if (!st.element[k]) return;
      const ElementGeometry geom = ElementGeometry::of(mesh, k);
      const double ah2 = data.alpha_on(k) * geom.h * geom.h;
      std::array<BasisValue, kMaxLocal> phi;
      auto& blk = blocks[k];
      if (projected) {
        std::array<double, kMaxLocal> m{};
        double g_mean = 0.0, f_mean = 0.0;
        for (int p = 0; p < nq; ++p) {
          eval_basis(v.spec.family, geom, rule.points[p], std::span(phi.data(), n));
          const Point x = geom.map(rule.points[p]);
          const double w = 2.0 * rule.weights[p];
          for (int i = 0; i < n; ++i) m[i] += w * geom.area * phi[i].value;
          g_mean += w * data.obstacle(x);
          f_mean += w * data.load(x);
        }
        const double scale = 1.0 / (ah2 * geom.area);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) blk.a[i * n + j] = scale * m[i] * m[j];
          blk.f[i] = (g_mean / ah2 - f_mean) * m[i];
        }
        return;
      }
      const std::size_t at = static_cast<std::size_t>(k) * nq;
      for (int p = 0; p < nq; ++p) {
        if (!st.chi[at + p]) continue;
        eval_basis(v.spec.family, geom, rule.points[p], std::span(phi.data(), n));
        const Point x = geom.map(rule.points[p]);
        const double w = rule.weights[p] * 2.0 * geom.area;
        const double gx = data.obstacle(x), fx = data.load(x);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            blk.a[i * n + j] += w * (phi[i].value * phi[j].laplacian + phi[i].laplacian * phi[j].value +
                                     phi[i].value * phi[j].value / ah2 + ah2 * phi[i].laplacian * phi[j].laplacian);
          }
          blk.f[i] += w * (gx * phi[i].value / ah2 + gx * phi[i].laplacian -
                           fx * (phi[i].value + ah2 * phi[i].laplacian));
        }
      }
    });
    std::vector<Triplet> t;
    Vector rhs = base.f;
    for (int k = 0; k < nt; ++k) {
      if (!st.element[k]) continue;
      auto dofs = v.dofs(k);
      for (int i = 0; i < n; ++i) {
        const int fi = v.free_index[dofs[i]];
        if (fi < 0) continue;
        rhs[fi] += blocks[k].f[i];
        for (int j = 0; j < n; ++j) {
          const int fj = v.free_index[dofs[j]];
          if (fj >= 0) t.push_back({fi, fj, blocks[k].a[i * n + j]});
        }
      }
    }
    SparseMatrix correction = SparseMatrix::from_triplets(v.num_free(), v.num_free(), std::move(t));
    return std::make_pair(add(base.A, correction), std::move(rhs));
  };

  auto update_norm = [&](const ContactState& a, const ContactState& b) {
    double sum = 0.0;
    for (int k = 0; k < nt; ++k) {
      const double h = mesh.diameter(k);
      const std::size_t at = static_cast<std::size_t>(k) * nq;
      if (projected) {
        const double d = a.mean[k] - b.mean[k];
        sum += h * h * mesh.area(k) * d * d;
        continue;
      }
      for (int p = 0; p < nq; ++p) {
        const double d = a.lambda[at + p] - b.lambda[at + p];
        sum += h * h * 2.0 * rule.weights[p] * mesh.area(k) * d * d;
      }
    }
    return std::sqrt(sum);
  };

  DiscreteSolution sol;
  auto& rep = sol.report;
  auto first = symmetric_solve(base.A, base.f, options.linear_tol);
  rep.linear_iterations += first.stats.iterations;
  sol.u = std::move(first.x);
  ContactState prev;
  prev.lambda.assign(static_cast<std::size_t>(nt) * nq, 0.0);
  prev.chi.assign(prev.lambda.size(), 0);
  prev.element.assign(nt, 0);
  prev.mean.assign(nt, 0.0);
  std::vector<std::vector<char>> seen{prev.chi};

  for (int it = 0; it < options.max_iter; ++it) {
    ContactState next = contact_from(sol.u);
    const double update = update_norm(next, prev);
    rep.lambda_update_norms.push_back(update);
    std::vector<int> contact;
    for (int k = 0; k < nt; ++k) {
      if (next.element[k]) contact.push_back(k);
    }
    rep.active_history.push_back(contact);
    rep.iterations = it + 1;
    prev = std::move(next);
    if (update <= options.tol) {
      rep.converged = true;
      break;
    }
    // A contact set that reappears after a different one means a cycle.
    for (std::size_t s = 0; s + 1 < seen.size(); ++s) {
      if (seen[s] == prev.chi) rep.oscillation = true;
    }
    if (rep.oscillation) {
      rep.message = "contact set oscillates";
      break;
    }
    seen.push_back(prev.chi);
    auto [mat, rhs] = system_for(prev);
    auto solve = symmetric_solve(mat, rhs, options.linear_tol);
    rep.linear_iterations += solve.stats.iterations;
    sol.u = std::move(solve.x);
  }
  if (!rep.converged && rep.message.empty()) rep.message = "maximum number of iterations reached";
  sol.lambda.assign(q.num_dofs, 0.0);
  for (int k = 0; k < nt; ++k) sol.lambda[q.dofs(k)[0]] = prev.mean[k];
  sol.active_set = positive_entries(sol.lambda);
  return sol;
}

namespace {

KktResiduals kkt_common(const DiscreteSolution& sol, const SparseMatrix& A, const SparseMatrix& B,
                        const SparseMatrix* C, const Vector& f, const Vector& g) {
  KktResiduals out;
  Vector gap = B * sol.u;
  if (C != nullptr) {
    Vector cl = *C * sol.lambda;
    for (std::size_t i = 0; i < gap.size(); ++i) gap[i] += cl[i];
  }
  for (std::size_t i = 0; i < gap.size(); ++i) {
    gap[i] -= g[i];
    out.primal = std::max(out.primal, -std::min(gap[i], 0.0));
    out.dual = std::max(out.dual, -std::min(sol.lambda[i], 0.0));
    out.complementarity = std::max(out.complementarity, std::abs(sol.lambda[i] * gap[i]));
  }
  Vector au = A * sol.u;
  Vector btl = B.multiply_transpose(sol.lambda);
  for (std::size_t i = 0; i < au.size(); ++i) {
    out.stationarity = std::max(out.stationarity, std::abs(au[i] - btl[i] - f[i]));
  }
  out.scale = std::max({1.0, norm_inf(f), norm_inf(g), norm_inf(sol.lambda)});
  return out;
}

}  // namespace

KktResiduals kkt_check(const DiscreteSolution& sol, const MixedSystem& sys) {
  return kkt_common(sol, sys.A, sys.B, nullptr, sys.f, sys.g);
}

KktResiduals kkt_check(const DiscreteSolution& sol, const StabilizedSystem& sys) {
  return kkt_common(sol, sys.A, sys.B, &sys.C, sys.f, sys.g);
}

}  // namespace obstacle
