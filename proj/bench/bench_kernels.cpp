#include <benchmark/benchmark.h>

#include <omp.h>

#include <algorithm>
#include <map>

#include "obstacle/benchmark.hpp"

using namespace obstacle;

namespace {

struct Fixture {
  Mesh mesh;
  DofMap v;
  DofMap q;
  ProblemData data;
  DiscreteSolution sol;
};

// P2 stabilized setup on a refined benchmark mesh, built once per refinement level.
const Fixture& fixture(int refinements) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(refinements);
  if (it != cache.end()) return it->second;
  const ExactSolution ex = build_exact_solution();
  Mesh m = initial_mesh(MeshFamily::nonconforming, 0.5, ex);
  for (int i = 0; i < refinements; ++i) m = refine_uniform(m);
  DofMap v = build_dofmap(m, {Family::P2, Constraint::dirichlet});
  DofMap q = build_dofmap(m, {Family::P0_disc, Constraint::none});
  ProblemData data = ex.problem(2, 0.005);
  DiscreteSolution sol = pdas_stabilized(assemble_stabilized(m, v, q, data));
  return cache.emplace(refinements, Fixture{std::move(m), std::move(v), std::move(q), std::move(data), std::move(sol)})
      .first->second;
}

// Arguments: refinement level, thread count (1 is the serial path).
void BM_AssembleStabilized(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  AssemblyOptions opt;
  opt.threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stabilized(f.mesh, f.v, f.q, f.data, opt));
  state.counters["elements"] = static_cast<double>(f.mesh.num_triangles());
}

void BM_Estimate(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  AssemblyOptions opt;
  opt.threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate(f.mesh, f.v, f.q, f.sol, f.data, Method::stabilized, opt));
    benchmark::DoNotOptimize(local_indicator(f.mesh, f.v, f.q, f.sol, f.data, opt));
  }
  state.counters["elements"] = static_cast<double>(f.mesh.num_triangles());
}

void thread_args(benchmark::internal::Benchmark* b) {
  const int max_threads = std::max(2, omp_get_max_threads());
  for (int level : {1, 2, 3}) {
    b->Args({level, 1});
    b->Args({level, max_threads});
  }
}

}  // namespace

BENCHMARK(BM_AssembleStabilized)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Estimate)->Apply(thread_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
