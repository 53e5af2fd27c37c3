#include <catch2/catch_amalgamated.hpp>

#include <netpot/families.hpp>
#include <netpot/potential.hpp>

#include <cmath>

using namespace netpot;

namespace {
double ipow2(int k) { return std::ldexp(1.0, k); }
}  // namespace

TEST_CASE("transience verdict is structural") {
  CHECK(is_transient(families::doubling_halfline()));
  CHECK(is_transient(families::quadrupling_halfline()));
  CHECK(is_transient(families::heavy_transient_halfline()));
  CHECK(is_transient(families::two_sided_line()));
  CHECK(is_transient(families::two_ray_star()));
  CHECK_FALSE(is_transient(families::unit_halfline()));
}

TEST_CASE("equilibrium potential on the doubling half line") {
  const auto e = families::doubling_halfline();
  const auto phi = equilibrium_potential(e, {VertexId::core(1)}, 4);

  // resistances 1/2, 1/4, 1/8, 1/16 in series; values are affine in the
  // accumulated resistance between the set and the cut
  CHECK(phi.values.at(VertexId::core(1)) == 1.0);
  CHECK(phi.values.at(VertexId::ray(0, 1)) == Catch::Approx(7.0 / 15.0).epsilon(1e-13));
  CHECK(phi.values.at(VertexId::ray(0, 2)) == Catch::Approx(3.0 / 15.0).epsilon(1e-13));
  CHECK(phi.values.at(VertexId::ray(0, 3)) == Catch::Approx(1.0 / 15.0).epsilon(1e-13));
  CHECK(phi.values.at(VertexId::ray(0, 4)) == 0.0);

  CHECK(energy(phi.values) == Catch::Approx(16.0 / 15.0).epsilon(1e-13));

  CHECK_THROWS_AS(equilibrium_potential(e, {}, 4), std::invalid_argument);
  CHECK_THROWS_AS(equilibrium_potential(e, {VertexId::ray(0, 2)}, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(equilibrium_potential(e, {VertexId::core(99)}, 4),
                  std::invalid_argument);
}

TEST_CASE("capacity of the root on the doubling half line") {
  const auto e = families::doubling_halfline();
  const auto cap = capacity(e, {VertexId::core(1)}, 1e-8, 64);

  CHECK(cap.transient);
  CHECK(cap.value == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(cap.certified_error < 1e-10);
  CHECK(cap.trace.verdict == ConvergenceTrace::Verdict::Converged);

  // truncated capacities are 1/(1 - 2^-n), strictly decreasing to 1
  REQUIRE(cap.trace.depths.size() == cap.trace.values.size());
  for (std::size_t i = 0; i < cap.trace.depths.size(); ++i) {
    const auto n = static_cast<int>(cap.trace.depths[i]);
    const double expected = 1.0 / (1.0 - ipow2(-n));
    CHECK(cap.trace.values[i] == Catch::Approx(expected).epsilon(1e-12));
    if (i > 0) CHECK(cap.trace.values[i] < cap.trace.values[i - 1]);
    CHECK(cap.trace.values[i] >= cap.value - 1e-12);
  }
}

TEST_CASE("recurrent capacity is exactly zero") {
  const auto e = families::unit_halfline();
  const auto cap = capacity(e, {VertexId::core(1)}, 1e-8, 64);

  CHECK_FALSE(cap.transient);
  CHECK(cap.value == 0.0);
  CHECK(cap.certified_error == 0.0);
  CHECK(cap.trace.limit == 0.0);
  // truncated capacities 1/n decrease to zero but never reach it, so the
  // trace itself stays unconverged while the limit is structurally exact
  CHECK(cap.trace.verdict == ConvergenceTrace::Verdict::MonotoneUnconverged);
  for (std::size_t i = 0; i < cap.trace.depths.size(); ++i) {
    const double expected = 1.0 / static_cast<double>(cap.trace.depths[i]);
    CHECK(cap.trace.values[i] == Catch::Approx(expected).epsilon(1e-12));
  }
  CHECK(cap.trace.certified_error == Catch::Approx(1.0 / 64.0).epsilon(1e-12));
}

TEST_CASE("slow exhaustion still yields an exact limit capacity") {
  // one transient and one recurrent ray: the truncated capacities converge
  // only at rate 1/depth, so the trace cannot certify convergence, yet the
  // limit problem gives the exact value 1
  const auto e = families::two_sided_line();
  const auto cap = capacity(e, {VertexId::core(1)}, 1e-8, 64);

  CHECK(cap.transient);
  CHECK(cap.value == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(cap.trace.verdict == ConvergenceTrace::Verdict::MonotoneUnconverged);
  // cap_n = 1/(1 - 2^-n) + 1/(1 + n): both escape routes in parallel
  const double expected_last = 1.0 / (1.0 - ipow2(-64)) + 1.0 / 65.0;
  CHECK(cap.trace.values.back() == Catch::Approx(expected_last).epsilon(1e-12));
}

TEST_CASE("grounded potential on the doubling half line") {
  const auto e = families::doubling_halfline();
  const auto est = green_function(e, VertexId::core(1), 1e-8, 40);

  CHECK(est.transient);
  CHECK(est.trace.verdict == ConvergenceTrace::Verdict::Converged);
  CHECK(est.trace.limit == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(est.certified_error < 1e-10);

  // exhaustion values g_n(x_k) = 2^-k - 2^-n
  for (std::size_t i = 0; i < est.trace.depths.size(); ++i) {
    const auto n = static_cast<int>(est.trace.depths[i]);
    CHECK(est.trace.values[i] == Catch::Approx(1.0 - ipow2(-n)).epsilon(1e-12));
  }

  // limit values 2^-k along the ray, 1 at the root
  CHECK(est.limit_values.at(VertexId::core(1)) == Catch::Approx(1.0).epsilon(1e-12));
  for (int k = 1; k <= 40; ++k)
    CHECK(est.limit_values.at(VertexId::ray(0, k)) ==
          Catch::Approx(ipow2(-k)).epsilon(1e-12));

  // the defect g - g_n is constant 2^-n here, and the sup bound is tight
  CHECK(est.sup_gap == Catch::Approx(ipow2(-40)).epsilon(1e-12));
  for (std::size_t i = 0; i < est.limit_values.values.size(); ++i) {
    const double defect = est.limit_values.values[i] -
                          est.exhaustion_values.values[i];
    CHECK(defect >= -1e-13);
    CHECK(defect <= est.sup_gap * (1.0 + 1e-9) + 1e-13);
  }

  REQUIRE(est.ray_tails.size() == 1);
  CHECK(est.ray_tails[0].current == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(est.ray_tails[0].resistance_total == Catch::Approx(1.0).epsilon(1e-12));

  // square integrability: 1^2 * (1/2) at the root plus 1/14 along the ray
  const auto l2 = green_l2(e, est);
  REQUIRE(l2.finite());
  CHECK(l2.value == Catch::Approx(4.0 / 7.0).epsilon(1e-11));

  CHECK_THROWS_AS(green_function(e, VertexId::ray(0, 3), 1e-8, 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(green_function(e, VertexId::core(2), 1e-8, 8),
                  std::invalid_argument);
}

TEST_CASE("grounded potential diverges on the recurrent half line") {
  const auto e = families::unit_halfline();
  const auto est = green_function(e, VertexId::core(1), 1e-8, 64);

  CHECK_FALSE(est.transient);
  CHECK(est.trace.verdict == ConvergenceTrace::Verdict::DivergentTail);
  CHECK(std::isinf(est.sup_gap));
  // g_n(1) equals the resistance to the cut, which is the depth
  for (std::size_t i = 0; i < est.trace.depths.size(); ++i)
    CHECK(est.trace.values[i] ==
          Catch::Approx(static_cast<double>(est.trace.depths[i])).epsilon(1e-11));
}

TEST_CASE("grounded potential on the two ray star") {
  const auto e = families::two_ray_star();
  const auto est = green_function(e, VertexId::core("c"), 1e-8, 32);

  // series resistances 1 + 1 and 1/2 + 1 from the center, in parallel
  CHECK(est.trace.limit == Catch::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(est.core_limit.at(VertexId::core("u")) ==
        Catch::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(est.core_limit.at(VertexId::core("v")) ==
        Catch::Approx(4.0 / 7.0).epsilon(1e-12));

  // all source current escapes through the two rays
  REQUIRE(est.ray_tails.size() == 2);
  CHECK(est.ray_tails[0].current + est.ray_tails[1].current ==
        Catch::Approx(1.0).epsilon(1e-12));
  CHECK(est.ray_tails[0].current == Catch::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(est.ray_tails[1].current == Catch::Approx(4.0 / 7.0).epsilon(1e-12));

  // capacity and the potential at the pole are reciprocal
  const auto cap = capacity(e, {VertexId::core("c")}, 1e-8, 32);
  CHECK(cap.value * est.trace.limit == Catch::Approx(1.0).epsilon(1e-11));
  CHECK(cap.value == Catch::Approx(7.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("mixed transience: constant extension on the recurrent side") {
  const auto e = families::two_sided_line();
  const auto est = green_function(e, VertexId::core(1), 1e-8, 24);

  CHECK(est.transient);
  CHECK(est.trace.limit == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(est.core_limit.at(VertexId::core(-1)) ==
        Catch::Approx(1.0).epsilon(1e-12));

  // ray 0 is the doubling ray, ray 1 the recurrent one
  REQUIRE(est.ray_tails.size() == 2);
  CHECK(est.ray_tails[0].current == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(est.ray_tails[1].current == 0.0);
  CHECK(std::isinf(est.ray_tails[1].resistance_total));

  // the limit extends constantly along the recurrent ray ...
  CHECK(est.limit_values.at(VertexId::ray(1, 5)) ==
        Catch::Approx(1.0).epsilon(1e-12));
  // ... so the sup defect against the grounded exhaustion never shrinks
  CHECK(est.sup_gap == Catch::Approx(1.0).epsilon(1e-12));

  // the constant tail carries infinite mass: the limit is not square
  // integrable even though the graph is transient
  CHECK(green_l2(e, est).divergent());
}

TEST_CASE("potential with unit measures and fast weights is square integrable") {
  const auto e = families::heavy_transient_halfline();
  const auto est = green_function(e, VertexId::core(1), 1e-8, 24);

  CHECK(est.trace.limit == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(est.ray_tails[0].current == Catch::Approx(1.0).epsilon(1e-12));

  const auto l2 = green_l2(e, est);
  REQUIRE(l2.finite());
  // (1/3)^2 at the core plus sum of (4^-r / 3)^2 over the ray
  CHECK(l2.value == Catch::Approx(16.0 / 135.0).epsilon(1e-11));
}

TEST_CASE("norm of the limit potential obeys the capacity bound") {
  const auto omega = std::vector<VertexId>{VertexId::core(1)};
  for (const auto depth : {8, 16, 24}) {
    const auto check = greens_l2_bound_check(families::doubling_halfline(),
                                             VertexId::core(1), omega, depth);
    REQUIRE(check.applicable);
    CHECK(check.holds);
    CHECK(check.lambda0 > 0.0);
    CHECK(check.C == Catch::Approx(1.0).epsilon(1e-11));
    CHECK(check.cap == Catch::Approx(1.0).epsilon(1e-11));
    // off {1} the limit values are 2^-r against measure 2^-(r+1)
    CHECK(check.lhs_with_tails ==
          Catch::Approx(std::sqrt(1.0 / 14.0)).epsilon(1e-10));
    CHECK(check.lhs <= check.lhs_with_tails);
    // the bottom of the spectrum is at most the Rayleigh quotient 4 of the
    // point mass at the root, so the right side is at least 1/2
    CHECK(check.rhs >= 0.5);
  }

  const auto rec = greens_l2_bound_check(families::unit_halfline(),
                                         VertexId::core(1), omega, 16);
  CHECK_FALSE(rec.applicable);
  CHECK_THAT(rec.reason, Catch::Matchers::ContainsSubstring("recurrent"));

  const auto mixed = greens_l2_bound_check(families::two_sided_line(),
                                           VertexId::core(1), omega, 16);
  CHECK_FALSE(mixed.applicable);
  CHECK_THAT(mixed.reason, Catch::Matchers::ContainsSubstring("vanishing"));

  CHECK_THROWS_AS(greens_l2_bound_check(families::two_ray_star(),
                                        VertexId::core("c"),
                                        {VertexId::core("u")}, 8),
                  std::invalid_argument);
}

TEST_CASE("heat integral agrees with the grounded solve") {
  const auto e = families::doubling_halfline();
  const auto probe = heat_green_crosscheck(e, VertexId::core(1), 6, 1.0);
  REQUIRE(probe.lambda0 > 0.0);
  const double T = 40.0 / probe.lambda0;
  const auto check = heat_green_crosscheck(e, VertexId::core(1), 6, T);
  CHECK(check.discrepancy <= check.certified_bound * (1.0 + 1e-9));
  CHECK(check.certified_bound < 1e-8);
  CHECK(check.discrepancy < 1e-8);
}

TEST_CASE("pendant labels avoid core collisions") {
  GraphData core;
  core.vertex(VertexId::core("zeta0"), 1.0);
  core.vertex(VertexId::core("o"), 1.0);
  core.edge(VertexId::core("zeta0"), VertexId::core("o"), 1.0);
  const auto e = ExtendedGraph::from_data(
      core, {RaySpec{VertexId::core("zeta0"), SequenceRule::geometric(2, 2),
                     SequenceRule::geometric(0.5, 0.5)}});
  const auto est = green_function(e, VertexId::core("o"), 1e-8, 8);
  CHECK(est.core_limit.graph.index_of(VertexId::core("zeta0_")).has_value());
  // series resistance 1 from o to the attach, then 1 to infinity
  CHECK(est.trace.limit == Catch::Approx(2.0).epsilon(1e-12));
}
