#include <netpot/families.hpp>
#include <netpot/solvers.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace netpot;

namespace {

// grounded potential with unit source at the root of the doubling half-line:
// g(x_k) = 2^-k - 2^-depth, with the cut vertex x_depth at zero
double halfline_green(std::int64_t k, std::int64_t depth) {
  return std::pow(2.0, -static_cast<double>(k)) -
         std::pow(2.0, -static_cast<double>(depth));
}

VertexFunction unit_source(const FiniteWeightedGraph& g, const VertexId& o) {
  VertexFunction rhs(g);
  const auto i = g.require_index(o);
  rhs[i] = 1.0 / g.measure(i);
  return rhs;
}

}  // namespace

TEST_CASE("direct solve reproduces the half-line potential closed form") {
  const auto line = families::doubling_halfline();
  for (std::int64_t depth : {8, 30, 80, 200}) {
    const auto g = line.truncate(depth);
    DirichletOperator op(g, line.ray_cut_vertices(depth));
    const auto sol = solve(op, unit_source(g, VertexId::core(1)));
    CHECK(sol.flux_certificate <= 1e-12);
    CHECK(sol.values.at(VertexId::core(1)) ==
          Catch::Approx(halfline_green(0, depth)).epsilon(1e-11));
    for (std::int64_t k : {std::int64_t{1}, depth / 2, depth - 1}) {
      const double expect = halfline_green(k, depth);
      CHECK(sol.values.at(VertexId::ray(0, k)) ==
            Catch::Approx(expect).epsilon(1e-11));
    }
  }
}

TEST_CASE("conjugate gradient agrees with the direct factorization") {
  GraphData data;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  const int n = 40;
  for (int i = 0; i < n; ++i) data.vertex(VertexId::core(i), unif(rng));
  for (int i = 0; i + 1 < n; ++i)
    data.edge(VertexId::core(i), VertexId::core(i + 1), unif(rng));
  for (int i = 0; i + 7 < n; i += 5)
    data.edge(VertexId::core(i), VertexId::core(i + 7), unif(rng));
  const auto g = FiniteWeightedGraph::from_data(data);
  DirichletOperator op(g, {VertexId::core(0), VertexId::core(n - 1)});

  VertexFunction rhs(g);
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(g.size()); ++i)
    rhs[i] = unif(rng) - 1.2;

  SolveOptions direct;
  direct.method = SolveOptions::Method::Direct;
  SolveOptions cg;
  cg.method = SolveOptions::Method::ConjugateGradient;
  const auto a = solve(op, rhs, direct);
  const auto b = solve(op, rhs, cg);
  CHECK(b.iterations > 0);
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.values.values.size(); ++i) {
    diff = std::max(diff, std::abs(a.values.values[i] - b.values.values[i]));
    norm = std::max(norm, std::abs(a.values.values[i]));
  }
  CHECK(diff <= 1e-8 * std::max(norm, 1.0));
}

TEST_CASE("solver rejects structurally singular problems") {
  const auto p = families::path(3);
  DirichletOperator ungrounded(p, {});
  VertexFunction rhs(p, 1.0);
  CHECK_THROWS_AS(solve(ungrounded, rhs), std::invalid_argument);

  GraphData data;
  data.vertex(VertexId::core(0), 1.0)
      .vertex(VertexId::core(1), 1.0)
      .vertex(VertexId::core(2), 1.0)
      .edge(VertexId::core(0), VertexId::core(1), 1.0);
  const auto g = FiniteWeightedGraph::from_data(data);
  DirichletOperator partial(g, {VertexId::core(0)});
  VertexFunction r2(g, 1.0);
  CHECK_THROWS_AS(solve(partial, r2), std::invalid_argument);
}

TEST_CASE("inverse power iteration finds the grounded bottom eigenvalue") {
  // path on 4 unit vertices grounded at one end: 2 - 2 cos(pi/7)
  const auto p = families::path(4);
  DirichletOperator op(p, {VertexId::core(0)});
  const auto pair = smallest_eigenvalue(op);
  const double expect = 2.0 - 2.0 * std::cos(std::numbers::pi / 7.0);
  CHECK(std::abs(pair.value - expect) <= 1e-12);
  CHECK(std::abs(smallest_eigenvalue_dense(op) - expect) <= 1e-12);

  // the eigenvector is positive on the interior and m-normalized
  double nrm = 0.0;
  for (std::int32_t i = 0; i < 4; ++i) {
    if (op.is_ground(i)) {
      CHECK(pair.vector[i] == 0.0);
    } else {
      CHECK(pair.vector[i] > 0.0);
      nrm += pair.vector[i] * pair.vector[i] * p.measure(i);
    }
  }
  CHECK(nrm == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("iterative and dense bottom eigenvalues agree on a mild truncation") {
  const auto line = families::doubling_halfline();
  const auto g = line.truncate(12);
  DirichletOperator op(g, line.ray_cut_vertices(12));
  const auto pair = smallest_eigenvalue(op);
  const double dense = smallest_eigenvalue_dense(op);
  CHECK(std::abs(pair.value - dense) <= 1e-9 * dense);
  // the quotient of the root indicator bounds it from above by 4
  CHECK(pair.value < 4.0);
  CHECK(pair.value > 0.0);
}

TEST_CASE("full spectrum exposes the cycle gap") {
  const auto spec = full_spectrum_dense(families::cycle(7));
  REQUIRE(spec.size() == 7);
  CHECK(std::abs(spec[0]) <= 1e-12);
  const double gap = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / 7.0);
  CHECK(spec[1] == Catch::Approx(gap).epsilon(1e-12));
  CHECK(spec[2] == Catch::Approx(gap).epsilon(1e-12));
}

TEST_CASE("heat integral matches the one vertex closed form") {
  GraphData data;
  data.vertex(VertexId::core("o"), 1.0)
      .vertex(VertexId::core("z"), 1.0)
      .edge(VertexId::core("o"), VertexId::core("z"), 2.0);
  const auto g = FiniteWeightedGraph::from_data(data);
  DirichletOperator op(g, {VertexId::core("z")});
  for (double T : {0.0, 0.7, 3.0}) {
    const auto h = heat_integral(op, VertexId::core("o"), T);
    CHECK(h.at(VertexId::core("o")) ==
          Catch::Approx((1.0 - std::exp(-2.0 * T)) / 2.0).margin(1e-14));
  }
  CHECK_THROWS(heat_integral(op, VertexId::core("z"), 1.0));
}

TEST_CASE("heat integral converges to the grounded potential") {
  const auto line = families::doubling_halfline();
  const auto g = line.truncate(8);
  DirichletOperator op(g, line.ray_cut_vertices(8));
  const auto sol = solve(op, unit_source(g, VertexId::core(1)));
  const auto h = heat_integral(op, VertexId::core(1), 60.0);
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    diff = std::max(diff, std::abs(h.values[i] - sol.values.values[i]));
    scale = std::max(scale, std::abs(sol.values.values[i]));
  }
  CHECK(diff <= 1e-12 * scale);
}
