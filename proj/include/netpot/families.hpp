#pragma once

// Ready-made graphs used across tests, scenarios, and documentation. Closed
// forms for their potentials and tail sums are known, which makes them the
// reference fixtures for everything downstream.

#include <netpot/graph.hpp>

namespace netpot::families {

// Half-line 1, 2, 3, ... with b(n, n+1) = 2^n and m(n) = 2^-n. Transient,
// finite total measure 1; the potential with pole at 1 is 2^(1-n).
inline ExtendedGraph doubling_halfline() {
  GraphData core;
  core.vertex(VertexId::core(1), 0.5);
  return ExtendedGraph::from_data(
      core, {RaySpec{VertexId::core(1), SequenceRule::geometric(2, 2),
                     SequenceRule::geometric(0.5, 0.5)}});
}

// Half-line with unit weights and unit measures. Recurrent, infinite measure.
inline ExtendedGraph unit_halfline() {
  GraphData core;
  core.vertex(VertexId::core(1), 1.0);
  return ExtendedGraph::from_data(
      core, {RaySpec{VertexId::core(1), SequenceRule::constant(1),
                     SequenceRule::constant(1)}});
}

// Half-line 1, 2, 3, ... with b(n, n+1) = 4^n and m(n) = 2^-n; the resistance
// tail against the measure sums to 9/217.
inline ExtendedGraph quadrupling_halfline() {
  GraphData core;
  core.vertex(VertexId::core(1), 0.5);
  return ExtendedGraph::from_data(
      core, {RaySpec{VertexId::core(1), SequenceRule::geometric(4, 4),
                     SequenceRule::geometric(0.5, 0.5)}});
}

// Transient half-line with unit measures: infinite total measure, weights
// 4^(n+1) along the ray, core vertex measure 1.
inline ExtendedGraph heavy_transient_halfline() {
  GraphData core;
  core.vertex(VertexId::core(1), 1.0);
  return ExtendedGraph::from_data(
      core, {RaySpec{VertexId::core(1), SequenceRule::geometric(4, 4),
                     SequenceRule::constant(1)}});
}

// Two-vertex core o - a with unit edge, m(o) = 1, m(a) = 1/2, and a doubling
// ray at a. The excision demonstration removes o from this graph.
inline ExtendedGraph excision_base() {
  GraphData core;
  core.vertex(VertexId::core("o"), 1.0);
  core.vertex(VertexId::core("a"), 0.5);
  core.edge(VertexId::core("o"), VertexId::core("a"), 1.0);
  return ExtendedGraph::from_data(
      core, {RaySpec{VertexId::core("a"), SequenceRule::geometric(2, 2),
                     SequenceRule::geometric(0.5, 0.5)}});
}

// Two-sided line: a unit-weight, unit-measure ray on one side of the edge
// (-1, 1) and a doubling ray with summable measure on the other.
inline ExtendedGraph two_sided_line() {
  GraphData core;
  core.vertex(VertexId::core(-1), 1.0);
  core.vertex(VertexId::core(1), 0.5);
  core.edge(VertexId::core(-1), VertexId::core(1), 1.0);
  return ExtendedGraph::from_data(
      core, {RaySpec{VertexId::core(1), SequenceRule::geometric(2, 2),
                     SequenceRule::geometric(0.5, 0.5)},
             RaySpec{VertexId::core(-1), SequenceRule::constant(1),
                     SequenceRule::constant(1)}});
}

// Star with a three-vertex core c - u, c - v and one doubling ray at u and v
// each.
inline ExtendedGraph two_ray_star() {
  GraphData core;
  core.vertex(VertexId::core("c"), 1.0);
  core.vertex(VertexId::core("u"), 0.5);
  core.vertex(VertexId::core("v"), 0.5);
  core.edge(VertexId::core("c"), VertexId::core("u"), 1.0);
  core.edge(VertexId::core("c"), VertexId::core("v"), 2.0);
  return ExtendedGraph::from_data(
      core, {RaySpec{VertexId::core("u"), SequenceRule::geometric(2, 2),
                     SequenceRule::geometric(0.5, 0.5)},
             RaySpec{VertexId::core("v"), SequenceRule::geometric(2, 2),
                     SequenceRule::geometric(0.5, 0.5)}});
}

// Cycle on n unit vertices, unit weights.
inline FiniteWeightedGraph cycle(int n) {
  GraphData data;
  for (int i = 0; i < n; ++i) data.vertex(VertexId::core(i), 1.0);
  for (int i = 0; i < n; ++i)
    data.edge(VertexId::core(i), VertexId::core((i + 1) % n), 1.0);
  return FiniteWeightedGraph::from_data(data);
}

// Path on n unit vertices, unit weights.
inline FiniteWeightedGraph path(int n) {
  GraphData data;
  for (int i = 0; i < n; ++i) data.vertex(VertexId::core(i), 1.0);
  for (int i = 0; i + 1 < n; ++i)
    data.edge(VertexId::core(i), VertexId::core(i + 1), 1.0);
  return FiniteWeightedGraph::from_data(data);
}

}  // namespace netpot::families
