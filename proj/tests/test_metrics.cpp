#include <netpot/families.hpp>
#include <netpot/metrics.hpp>
#include <netpot/potential.hpp>
#include <netpot/surgery.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <vector>

using namespace netpot;
using namespace netpot::families;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

// The excision demonstration graph after removing its recurrent-side vertex:
// the remaining core vertex keeps its old doubling ray and gains a
// quadrupling replacement ray, so the result is a tree with two rays.
SurgeredGraph surgered_excision() {
  auto e = excision_base();
  const auto center = VertexId::core("o");
  auto g = green_function(e, center, 1e-8, 64);
  auto part = partition_neighbors(e, center, g, 1e-6);
  std::map<VertexId, NewRayRule> rules{
      {VertexId::core("a"),
       NewRayRule{SequenceRule::table({2.0}, Geometric{4.0, 4.0})}}};
  return excise_and_attach(e, part, rules);
}

}  // namespace

TEST_CASE("minimum-degree lengths on the doubling half-line have the closed "
          "form") {
  auto e = doubling_halfline();
  auto lf = degree_length(e);
  REQUIRE(lf.core.empty());
  REQUIRE(lf.rays.size() == 1);

  // Deg(x_k) = (2^k + 2^{k+1}) / 2^{-k-1} = 3 * 2^{2k+1}, and the attach
  // vertex has degree 2 / 0.5 = 4, so every edge takes its length from the
  // deeper endpoint: sigma(k) = 2^{-k-1} / sqrt(6).
  const double root6 = std::sqrt(6.0);
  for (std::int64_t k = 0; k <= 20; ++k)
    CHECK(lf.rays[0].value(k) ==
          Approx(std::pow(0.5, static_cast<double>(k + 1)) / root6)
              .epsilon(1e-14));

  auto total = ray_length(lf, 0);
  REQUIRE(total.finite());
  CHECK(total.value == Approx(1.0 / root6).epsilon(1e-13));
  CHECK(total.error <= 1e-12);

  // Finite-graph variant: unit path degrees are 1 at the ends and 2 in the
  // middle, so the end edges ride the middle vertex.
  auto two = degree_length(path(2));
  REQUIRE(two.values.size() == 1);
  CHECK(two.values[0] == Approx(1.0));
  auto three = degree_length(path(3));
  REQUIRE(three.values.size() == 2);
  CHECK(three.values[0] == Approx(1.0 / std::sqrt(2.0)));
  CHECK(three.values[1] == Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("minimum-degree lengths satisfy the vertex condition everywhere") {
  const ExtendedGraph graphs[] = {
      doubling_halfline(),        unit_halfline(), quadrupling_halfline(),
      heavy_transient_halfline(), excision_base(), two_sided_line(),
      two_ray_star()};
  for (const auto& e : graphs) {
    auto chk = check_intrinsic(e, degree_length(e));
    CHECK(chk.pass);
    CHECK(chk.worst_ratio <= 1.0 + 1e-12);
  }

  SECTION("the supremum sits at the first ray vertex of the doubling line") {
    auto e = doubling_halfline();
    auto chk = check_intrinsic(e, degree_length(e));
    CHECK(chk.worst_ratio == Approx(0.5).epsilon(1e-13));
    CHECK(chk.worst_vertex == VertexId::ray(0, 1));
    CHECK(chk.worst_slack == Approx(0.125).epsilon(1e-12));
  }

  SECTION("equality counts as passing") {
    // On the unit half-line the degree lengths give exactly
    // w sigma^2 + w sigma^2 = 1/2 + 1/2 = m at every interior vertex.
    auto e = unit_halfline();
    auto chk = check_intrinsic(e, degree_length(e));
    CHECK(chk.pass);
    CHECK(chk.worst_ratio == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("combinatorial lengths fail the vertex condition where degrees "
          "blow up") {
  auto e = doubling_halfline();
  auto ones = constant_length(e, 1.0);

  // At the first ray vertex the unit lengths give 2 + 4 = 6 against
  // measure 1/4, and the ratio keeps quadrupling outward.
  CHECK(intrinsic_ratio(e, ones, VertexId::ray(0, 1)) == Approx(24.0));
  CHECK(intrinsic_ratio(e, ones, VertexId::core(1)) == Approx(4.0));

  auto chk = check_intrinsic(e, ones);
  CHECK_FALSE(chk.pass);
  CHECK(std::isinf(chk.worst_ratio));
  CHECK(chk.worst_vertex == VertexId::ray(0, 1));
  CHECK_THAT(chk.note, ContainsSubstring("ray 0"));

  SECTION("a bounded overshoot reports its attained supremum") {
    auto u = unit_halfline();
    auto flat = constant_length(u, 1.0);
    auto c = check_intrinsic(u, flat);
    CHECK_FALSE(c.pass);
    CHECK(c.worst_ratio == Approx(2.0));
    CHECK(c.worst_vertex == VertexId::ray(0, 1));
    CHECK(c.worst_slack == Approx(-1.0));
  }

  SECTION("scaling the lengths down scales the ratio quadratically") {
    auto u = unit_halfline();
    auto half = constant_length(u, 0.5);
    auto c = check_intrinsic(u, half);
    CHECK(c.pass);
    CHECK(c.worst_ratio == Approx(0.5));
    CHECK(c.worst_slack == Approx(0.5));
  }
}

TEST_CASE("shortest path distances obey the metric axioms") {
  SECTION("a long edge loses to a two-step detour") {
    GraphData data;
    data.vertex(VertexId::core("a"), 1.0);
    data.vertex(VertexId::core("b"), 1.0);
    data.vertex(VertexId::core("c"), 1.0);
    data.edge(VertexId::core("a"), VertexId::core("b"), 1.0);
    data.edge(VertexId::core("b"), VertexId::core("c"), 1.0);
    data.edge(VertexId::core("a"), VertexId::core("c"), 1.0);
    auto g = FiniteWeightedGraph::from_data(data);
    // edges() is sorted (a,b), (a,c), (b,c)
    EdgeLengths sigma{g, {1.0, 3.0, 1.0}};
    CHECK(path_metric(sigma, VertexId::core("a"), VertexId::core("c")) ==
          Approx(2.0));
    CHECK(path_metric(sigma, VertexId::core("a"), VertexId::core("b")) ==
          Approx(1.0));
    CHECK(path_metric(sigma, VertexId::core("a"), VertexId::core("a")) == 0.0);
  }

  SECTION("random graphs agree with an all-pairs oracle") {
    std::mt19937 rng(20240817);
    for (int round = 0; round < 6; ++round) {
      std::uniform_int_distribution<int> size_dist(5, 40);
      const int n = size_dist(rng);
      GraphData data;
      for (int i = 0; i < n; ++i) data.vertex(VertexId::core(i), 1.0);
      std::vector<std::pair<int, int>> pairs;
      for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> parent_dist(0, i - 1);
        pairs.push_back({parent_dist(rng), i});
      }
      std::uniform_int_distribution<int> any(0, n - 1);
      for (int extra = 0; extra < n / 2; ++extra) {
        int u = any(rng), v = any(rng);
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (std::find(pairs.begin(), pairs.end(), std::make_pair(u, v)) !=
            pairs.end())
          continue;
        pairs.push_back({u, v});
      }
      for (auto [u, v] : pairs)
        data.edge(VertexId::core(u), VertexId::core(v), 1.0);
      auto g = FiniteWeightedGraph::from_data(data);

      std::uniform_real_distribution<double> len_dist(0.1, 2.0);
      EdgeLengths sigma{g, {}};
      for (std::size_t i = 0; i < g.edge_count(); ++i)
        sigma.values.push_back(len_dist(rng));

      // Floyd-Warshall oracle
      const double inf = std::numeric_limits<double>::infinity();
      std::vector<std::vector<double>> d(
          static_cast<std::size_t>(n),
          std::vector<double>(static_cast<std::size_t>(n), inf));
      for (int i = 0; i < n; ++i) d[i][i] = 0.0;
      const auto& es = g.edges();
      for (std::size_t i = 0; i < es.size(); ++i) {
        const auto u = static_cast<std::size_t>(es[i].u);
        const auto v = static_cast<std::size_t>(es[i].v);
        d[u][v] = std::min(d[u][v], sigma.values[i]);
        d[v][u] = d[u][v];
      }
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);

      for (int i = 0; i < n; ++i) {
        auto row = shortest_paths(sigma, g.vertex(i));
        for (int j = 0; j < n; ++j) {
          CHECK(row[j] == Approx(d[i][j]).epsilon(1e-10).margin(1e-12));
          CHECK(d[i][j] == Approx(d[j][i]).margin(1e-14));
          for (int k = 0; k < n; ++k)
            CHECK(d[i][j] <= d[i][k] + d[k][j] + 1e-12);
        }
      }
    }
  }

  SECTION("vertices in different components are infinitely far apart") {
    GraphData data;
    for (int i = 0; i < 6; ++i) data.vertex(VertexId::core(i), 1.0);
    data.edge(VertexId::core(0), VertexId::core(1), 1.0);
    data.edge(VertexId::core(1), VertexId::core(2), 1.0);
    data.edge(VertexId::core(3), VertexId::core(4), 1.0);
    data.edge(VertexId::core(4), VertexId::core(5), 1.0);
    auto g = FiniteWeightedGraph::from_data(data);
    auto sigma = constant_length(g, 1.0);
    CHECK(std::isinf(path_metric(sigma, VertexId::core(0), VertexId::core(5))));
    CHECK(path_metric(sigma, VertexId::core(0), VertexId::core(2)) ==
          Approx(2.0));
  }
}

TEST_CASE("ray lengths add up: head plus certified tail equals the whole") {
  const SequenceRule rules[] = {
      SequenceRule::geometric(0.7, 0.6), SequenceRule::power(2.0, -2.0),
      SequenceRule::table({1.0, 2.0, 3.0}, Geometric{1.0, 0.5}),
      degree_length(doubling_halfline()).rays[0]};
  for (const auto& rule : rules) {
    const auto total = rule.tail_sum(0);
    REQUIRE(total.finite());
    for (std::int64_t n : {1, 5, 17}) {
      double head = 0.0;
      for (std::int64_t k = 0; k < n; ++k) head += rule.value(k);
      const auto tail = rule.tail_sum(n);
      REQUIRE(tail.finite());
      CHECK(std::abs(head + tail.value - total.value) <=
            1e-12 * std::max(1.0, total.value) + tail.error + total.error);
    }
  }

  SECTION("inverse-square lengths sum to the Basel value") {
    auto len = ray_length(SequenceRule::power(1.0, -2.0));
    REQUIRE(len.finite());
    const double basel = std::numbers::pi * std::numbers::pi / 6.0;
    CHECK(std::abs(len.value - basel) <= len.error + 1e-9);
  }

  SECTION("non-summable lengths are reported divergent, never truncated") {
    CHECK(ray_length(SequenceRule::constant(1.0)).divergent());
    CHECK(ray_length(SequenceRule::power(1.0, -1.0)).divergent());
    CHECK(ray_length(SequenceRule::power(3.0, -0.5)).divergent());
    CHECK(ray_length(SequenceRule::geometric(0.125, 1.5)).divergent());
  }
}

TEST_CASE("completeness verdicts separate finite from infinite ray lengths") {
  SECTION("unit lengths make every ray infinitely long") {
    auto e = doubling_halfline();
    auto v = completeness_verdict(e, constant_length(e, 1.0));
    CHECK(v.complete);
    CHECK_FALSE(v.witness_ray.has_value());
    REQUIRE(v.ray_lengths.size() == 1);
    CHECK(v.ray_lengths[0].divergent());
    // The same lengths violate the vertex condition: the two properties are
    // independent and both are reported.
    CHECK_FALSE(v.intrinsic_check.pass);
  }

  SECTION("the degree metric leaves the doubling half-line incomplete") {
    auto e = doubling_halfline();
    auto v = completeness_verdict(e, degree_length(e));
    CHECK_FALSE(v.complete);
    REQUIRE(v.witness_ray.has_value());
    CHECK(*v.witness_ray == 0);
    CHECK(v.witness_length == Approx(1.0 / std::sqrt(6.0)).epsilon(1e-13));
    CHECK(v.intrinsic_check.pass);
  }

  SECTION("both rays of the star are finite in the degree metric") {
    auto e = two_ray_star();
    auto v = completeness_verdict(e, degree_length(e));
    CHECK_FALSE(v.complete);
    REQUIRE(v.witness_ray.has_value());
    CHECK(*v.witness_ray == 0);
    REQUIRE(v.ray_lengths.size() == 2);
    // Interior degrees dominate at every edge of both rays, so each ray sums
    // to 1/sqrt(6) exactly as on the standalone doubling line.
    CHECK(v.ray_lengths[0].value == Approx(1.0 / std::sqrt(6.0)).epsilon(1e-13));
    CHECK(v.ray_lengths[1].value == Approx(1.0 / std::sqrt(6.0)).epsilon(1e-13));
  }

  SECTION("the recurrent half-line stays complete in the degree metric") {
    auto e = unit_halfline();
    auto v = completeness_verdict(e, degree_length(e));
    CHECK(v.complete);
    CHECK(v.ray_lengths[0].divergent());
    CHECK(v.intrinsic_check.pass);
  }

  SECTION("a graph without rays is complete outright") {
    ExtendedGraph e(path(3), {});
    auto v = completeness_verdict(e, degree_length(e));
    CHECK(v.complete);
    CHECK(v.ray_lengths.empty());
    CHECK(v.intrinsic_check.pass);
  }
}

TEST_CASE("the excised graph is incomplete in its own degree metric") {
  auto s = surgered_excision();
  auto lf = degree_length(s.graph);
  REQUIRE(lf.rays.size() == 2);

  // New-ray degrees: Deg(a) = (2 + 2)/0.5 = 8, Deg(x_1) = (2 + 4)/0.5 = 12,
  // Deg(x_2) = (4 + 16)/0.25 = 80, then a pure geometric cascade with edge
  // ratio 1/(2 sqrt 2).
  CHECK(lf.rays[1].value(0) == Approx(1.0 / std::sqrt(12.0)).epsilon(1e-14));
  CHECK(lf.rays[1].value(1) == Approx(1.0 / std::sqrt(80.0)).epsilon(1e-14));
  CHECK(lf.rays[1].value(2) == Approx(1.0 / std::sqrt(640.0)).epsilon(1e-14));
  CHECK(lf.rays[1].value(3) / lf.rays[1].value(2) ==
        Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-13));

  auto v = completeness_verdict(s.graph, lf);
  CHECK_FALSE(v.complete);
  REQUIRE(v.witness_ray.has_value());
  CHECK(*v.witness_ray == 0);
  CHECK(v.witness_length == Approx(1.0 / std::sqrt(6.0)).epsilon(1e-13));
  CHECK(v.intrinsic_check.pass);

  SECTION("certified lengths match long partial sums") {
    for (std::size_t ri = 0; ri < 2; ++ri) {
      double partial = 0.0;
      for (std::int64_t k = 0; k < 200; ++k) partial += lf.rays[ri].value(k);
      REQUIRE(v.ray_lengths[ri].finite());
      CHECK(std::abs(partial - v.ray_lengths[ri].value) <=
            v.ray_lengths[ri].error + 1e-10);
    }
  }

  SECTION("distances through the cut vertex add edge by edge") {
    auto sigma = materialize_lengths(s.graph, lf, 6);
    const auto a = VertexId::core("a");
    CHECK(path_metric(sigma, a, VertexId::ray(1, 3)) ==
          Approx(lf.rays[1].value(0) + lf.rays[1].value(1) +
                 lf.rays[1].value(2))
              .epsilon(1e-13));
    CHECK(path_metric(sigma, VertexId::ray(0, 2), VertexId::ray(1, 1)) ==
          Approx(lf.rays[0].value(1) + lf.rays[0].value(0) +
                 lf.rays[1].value(0))
              .epsilon(1e-13));
  }
}

TEST_CASE("length machinery refuses what it cannot certify") {
  SECTION("degree lengths need geometric weight and measure tails") {
    GraphData core;
    core.vertex(VertexId::core(1), 1.0);
    ExtendedGraph e(FiniteWeightedGraph::from_data(core),
                    {RaySpec{VertexId::core(1), SequenceRule::power(1.0, 2.0),
                             SequenceRule::constant(1.0)}});
    CHECK_THROWS_WITH(degree_length(e), ContainsSubstring("geometric tails"));
  }

  SECTION("balanced drifting power tails have no certified comparison") {
    GraphData core;
    core.vertex(VertexId::core(1), 1.0);
    ExtendedGraph e(FiniteWeightedGraph::from_data(core),
                    {RaySpec{VertexId::core(1), SequenceRule::power(1.0, 2.0),
                             SequenceRule::power(1.0, 2.0)}});
    CHECK_THROWS_WITH(check_intrinsic(e, constant_length(e, 1.0)),
                      ContainsSubstring("certified tail comparison"));
  }

  SECTION("size and positivity of the inputs are validated") {
    auto e = excision_base();
    LengthFunction missing_ray;
    missing_ray.core = {1.0};
    CHECK_THROWS_WITH(check_intrinsic(e, missing_ray),
                      ContainsSubstring("one length rule per ray"));

    LengthFunction bad_core;
    bad_core.core = {-1.0};
    bad_core.rays = {SequenceRule::constant(1.0)};
    CHECK_THROWS_WITH(completeness_verdict(e, bad_core),
                      ContainsSubstring("positive and finite"));

    auto g = path(3);
    EdgeLengths short_list{g, {1.0}};
    CHECK_THROWS_WITH(
        shortest_paths(short_list, VertexId::core(0)),
        ContainsSubstring("edge lengths do not match"));
    CHECK_THROWS(constant_length(g, 0.0));
    CHECK_THROWS_WITH(
        path_metric(constant_length(g, 1.0), VertexId::core(0),
                    VertexId::core(99)),
        ContainsSubstring("not in the graph"));
    CHECK_THROWS_WITH(
        materialize_lengths(e, degree_length(e), 0),
        ContainsSubstring("depth"));
  }
}
