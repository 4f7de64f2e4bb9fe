#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "obstacle/benchmark.hpp"
#include "obstacle/estimator.hpp"

using namespace obstacle;

namespace {

Mesh two_triangle_square() {
  return Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
              std::vector<VertexTag>(4, VertexTag::outer_boundary), 10.0);
}

Mesh reference_triangle() {
  return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, std::vector<VertexTag>(3, VertexTag::outer_boundary), 10.0);
}

ProblemData constant_data(double f, double g) {
  ProblemData d;
  d.load = [f](Point) { return f; };
  d.obstacle = [g](Point) { return g; };
  d.obstacle_gradient = [](Point) { return Point{0, 0}; };
  d.alpha = 0.01;
  return d;
}

DofMap unconstrained(const Mesh& m, Family family) { return build_dofmap(m, make_space(family, Constraint::none)); }

DofMap p0(const Mesh& m) { return unconstrained(m, Family::P0_disc); }

DiscreteSolution vertex_field(const Mesh& m, const DofMap& v, const std::function<double(Point)>& fn) {
  DiscreteSolution sol;
  sol.u.assign(v.num_free(), 0.0);
  for (int i = 0; i < static_cast<int>(m.num_vertices()); ++i) sol.u[v.free_index[i]] = fn(m.vertices()[i]);
  sol.lambda.assign(m.num_triangles(), 0.0);
  return sol;
}

double sum_squares(const Vector& v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); }

}  // namespace

TEST_SUITE("estimator") {
  TEST_CASE("lowest order: element residual is h |lambda + f| sqrt|K|") {
    const ExactSolution exact = build_exact_solution();
    const Mesh m = generate_disk_mesh(2.0, 0.5);
    MethodSpec spec;
    spec.degree = 1;
    spec.alpha = 0.01;
    const LevelSolve s = solve_benchmark(m, spec, exact);
    for (int k = 0; k < static_cast<int>(m.num_triangles()); ++k) {
      const double lambda = s.sol.lambda[s.q.dofs(k)[0]];
      const double expected = m.diameter(k) * std::abs(lambda - 1.0) * std::sqrt(m.area(k));
      CHECK(s.estimate.eta_K[k] == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  TEST_CASE("affine displacement has no edge jumps") {
    const Mesh m = refine_uniform(generate_disk_mesh(2.0, 0.7));
    const DofMap v = unconstrained(m, Family::P1);
    const DiscreteSolution sol = vertex_field(m, v, [](Point x) { return 0.3 - 1.7 * x.x + 0.4 * x.y; });
    const ErrorBreakdown e = estimate(m, v, p0(m), sol, constant_data(0.0, -1e6), Method::stabilized);
    for (double x : e.eta_E) CHECK(x <= 1e-12);
    CHECK(e.eta <= 1e-12);
  }

  TEST_CASE("no penetration and zero multiplier gives a vanishing obstacle term") {
    const Mesh m = generate_disk_mesh(2.0, 0.5);
    const DofMap v = unconstrained(m, Family::P1);
    const DiscreteSolution sol = vertex_field(m, v, [](Point x) { return 1.0 + 0.1 * x.x * x.x; });
    for (Method method : {Method::mixed, Method::stabilized}) {
      CHECK(estimate(m, v, p0(m), sol, constant_data(-1.0, 0.5), method).s_term == 0.0);
    }
    // In the mixed form a positive multiplier does not count where u lies above g.
    DiscreteSolution loaded = sol;
    loaded.lambda.assign(m.num_triangles(), 2.0);
    CHECK(estimate(m, v, p0(m), loaded, constant_data(-1.0, 0.5), Method::mixed).s_term == 0.0);
  }

  TEST_CASE("hat function on the two-triangle square") {
    const Mesh m = two_triangle_square();
    const DofMap v = unconstrained(m, Family::P1);
    const DiscreteSolution sol =
        vertex_field(m, v, [](Point x) { return x.x == 1.0 && x.y == 0.0 ? 1.0 : 0.0; });
    const ProblemData data = constant_data(0.0, -1e6);
    const Vector local = local_indicator(m, v, p0(m), sol, data);
    REQUIRE(local.size() == 2);
    CHECK(local[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    CHECK(local[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    const ErrorBreakdown e = estimate(m, v, p0(m), sol, data, Method::stabilized);
    CHECK(e.eta == doctest::Approx(2.0).epsilon(1e-13));
    // Each element carries half of the only interior edge.
    CHECK(sum_squares(local) == doctest::Approx(e.eta * e.eta).epsilon(1e-13));
  }

  TEST_CASE("local indicators reproduce the global estimate when h_K equals the edge length") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const Mesh m = two_triangle_square();
    for (int trial = 0; trial < 10; ++trial) {
      const DofMap v = unconstrained(m, Family::P2);
      DiscreteSolution sol;
      sol.u.resize(v.num_free());
      for (double& x : sol.u) x = d(rng);
      sol.lambda = {std::abs(d(rng)), std::abs(d(rng))};
      const ProblemData data = constant_data(d(rng), 5.0);
      const Vector local = local_indicator(m, v, p0(m), sol, data);
      const ErrorBreakdown e = estimate(m, v, p0(m), sol, data, Method::stabilized);
      // u < g = 5 everywhere, so only the penetration part of S contributes.
      const double s_sq = e.s_term * e.s_term;
      CHECK(sum_squares(local) == doctest::Approx(e.eta * e.eta + s_sq).epsilon(1e-12));
    }
  }

  TEST_CASE("zero data gives a zero estimate") {
    const Mesh m = generate_disk_mesh(2.0, 0.5);
    for (Family family : {Family::P1, Family::P2}) {
      const DofMap v = build_dofmap(m, make_space(family, Constraint::dirichlet));
      DiscreteSolution sol;
      sol.u.assign(v.num_free(), 0.0);
      sol.lambda.assign(m.num_triangles(), 0.0);
      const ErrorBreakdown e = estimate(m, v, p0(m), sol, constant_data(0.0, 0.0), Method::stabilized);
      CHECK(e.total == 0.0);
      const Vector local = local_indicator(m, v, p0(m), sol, constant_data(0.0, 0.0));
      for (double x : local) CHECK(x == 0.0);
    }
  }

  TEST_CASE("global estimate is the root sum of squares of its parts") {
    const ExactSolution exact = build_exact_solution();
    const Mesh m = generate_disk_mesh(2.0, 0.5);
    MethodSpec spec;
    spec.degree = 2;
    spec.alpha = 0.005;
    const LevelSolve s = solve_benchmark(m, spec, exact);
    const double sum = sum_squares(s.estimate.eta_K) + sum_squares(s.estimate.eta_E);
    CHECK(s.estimate.eta == doctest::Approx(std::sqrt(sum)).epsilon(1e-14));
    CHECK(s.estimate.total == doctest::Approx(s.estimate.eta + s.estimate.s_term).epsilon(1e-14));
    CHECK(s.estimate.osc_total == doctest::Approx(std::sqrt(sum_squares(s.estimate.osc))).epsilon(1e-14));
  }

  TEST_CASE("bulk marking examples") {
    CHECK(mark(std::vector<double>(10, 1.0), 0.9).marked.size() == 9);

    std::vector<double> dominant(20, std::sqrt(0.05 / 19.0));
    dominant[7] = std::sqrt(0.95);
    const MarkingResult one = mark(dominant, 0.9);
    REQUIRE(one.marked.size() == 1);
    CHECK(one.marked[0] == 7);

    const std::vector<double> squares{std::sqrt(5.0), std::sqrt(3.0), 1.0, 1.0};
    const MarkingResult m = mark(squares, 0.9);
    CHECK(m.marked == std::vector<int>{0, 1, 2});
    CHECK(m.fraction == doctest::Approx(0.9));

    CHECK(mark(std::vector<double>(5, 0.0), 0.5).marked.empty());
    CHECK(mark(squares, 1.0).marked.size() == 4);
    CHECK_THROWS(mark(squares, 0.0));
    CHECK_THROWS(mark(squares, 1.5));
  }

  TEST_CASE("bulk marking is minimal and scale invariant") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::uniform_int_distribution<int> size(1, 200);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> eta(size(rng));
      for (double& x : eta) x = d(rng);
      const double theta = 0.05 + 0.95 * d(rng);
      const MarkingResult r = mark(eta, theta);
      double total = 0.0, covered = 0.0;
      for (double x : eta) total += x * x;
      for (int k : r.marked) covered += eta[k] * eta[k];
      CHECK(covered >= theta * total * (1.0 - 1e-12));
      // Dropping the smallest marked indicator must fall short of theta.
      double smallest = std::numeric_limits<double>::infinity();
      for (int k : r.marked) smallest = std::min(smallest, eta[k] * eta[k]);
      CHECK(covered - smallest < theta * total);
      // Every unmarked indicator is at most every marked one.
      std::vector<bool> in(eta.size(), false);
      for (int k : r.marked) in[k] = true;
      for (std::size_t k = 0; k < eta.size(); ++k) {
        if (!in[k]) CHECK(eta[k] * eta[k] <= smallest);
      }
      std::vector<double> scaled = eta;
      const double s = std::exp(8.0 * (d(rng) - 0.5));
      for (double& x : scaled) x *= s;
      CHECK(mark(scaled, theta).marked == r.marked);
    }
  }

  TEST_CASE("data oscillation") {
    const Mesh m = generate_disk_mesh(2.0, 0.5);
    CHECK(oscillation(m, constant_data(-1.0, 0.0)).total == 0.0);

    const Mesh ref = reference_triangle();
    ProblemData linear = constant_data(0.0, 0.0);
    linear.load = [](Point x) { return x.x; };
    CHECK(oscillation(ref, linear).total == doctest::Approx(std::sqrt(2.0) / 6.0).epsilon(1e-13));
  }
}
