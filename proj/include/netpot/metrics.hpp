#pragma once

// Path metrics from edge-length assignments: shortest-path distances on
// finite graphs, certified total lengths of infinite rays, the vertex
// non-expansion condition sum_y b(x,y) sigma(x,y)^2 <= m(x), and
// completeness verdicts that decide whether every ray has infinite
// sigma-length. Tail questions are settled from the closed-form rule shapes,
// never by silent truncation.

#include <netpot/graph.hpp>
#include <netpot/sequence.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netpot {

// ---------------------------------------------------------------------------
// Length assignments

// Strictly positive lengths on the edges of a finite graph, stored in the
// same order as graph.edges().
struct EdgeLengths {
  FiniteWeightedGraph graph;
  std::vector<double> values;
};

inline void check_edge_lengths(const EdgeLengths& sigma) {
  if (sigma.values.size() != sigma.graph.edge_count())
    throw std::invalid_argument("edge lengths do not match the edge list");
  for (double v : sigma.values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("edge lengths must be positive and finite");
}

// Lengths on a graph with rays: explicit values on core edges (aligned with
// core().edges()) plus one rule per ray, following the weight convention:
// rays[ri].value(0) is the length of the attach edge and rays[ri].value(k)
// the length of the edge (x_k, x_{k+1}).
struct LengthFunction {
  std::vector<double> core;
  std::vector<SequenceRule> rays;
};

inline void check_length_function(const ExtendedGraph& e,
                                  const LengthFunction& sigma) {
  if (sigma.core.size() != e.core().edge_count())
    throw std::invalid_argument("core lengths do not match the core edge list");
  if (sigma.rays.size() != e.ray_count())
    throw std::invalid_argument("one length rule per ray is required");
  for (double v : sigma.core)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("edge lengths must be positive and finite");
}

inline EdgeLengths constant_length(const FiniteWeightedGraph& g, double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("edge lengths must be positive and finite");
  return {g, std::vector<double>(g.edge_count(), c)};
}

inline LengthFunction constant_length(const ExtendedGraph& e, double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("edge lengths must be positive and finite");
  LengthFunction out;
  out.core.assign(e.core().edge_count(), c);
  out.rays.assign(e.ray_count(), SequenceRule::constant(c));
  return out;
}

// ---------------------------------------------------------------------------
// Minimum-degree lengths sigma(x, y) = min(Deg(x), Deg(y))^{-1/2}

inline EdgeLengths degree_length(const FiniteWeightedGraph& g) {
  EdgeLengths out{g, {}};
  out.values.reserve(g.edge_count());
  for (const auto& ed : g.edges())
    out.values.push_back(std::min(1.0 / std::sqrt(g.weighted_degree(ed.u)),
                                  1.0 / std::sqrt(g.weighted_degree(ed.v))));
  return out;
}

// Minimum-degree lengths on a graph with rays. Core degrees include the
// attach edges of the rays. Along a ray whose weight and measure rules both
// have geometric tails, Deg(x_k) is eventually a pure geometric sequence, so
// the per-edge lengths are emitted as an exact closed-form rule: a table of
// explicit head values followed by a geometric tail with ratio
// sqrt(measure ratio / weight ratio). Rays with genuine power tails have no
// such closed form and are refused.
inline LengthFunction degree_length(const ExtendedGraph& e) {
  const auto& core = e.core();
  std::vector<double> degree(core.size(), 0.0);
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(core.size()); ++i) {
    for (const auto& n : core.neighbors(i)) degree[static_cast<std::size_t>(i)] += n.weight;
  }
  for (const auto& ray : e.rays())
    degree[static_cast<std::size_t>(core.require_index(ray.attach))] +=
        ray.weights.value(0);
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(core.size()); ++i)
    degree[static_cast<std::size_t>(i)] /= core.measure(i);

  LengthFunction out;
  out.core.reserve(core.edge_count());
  for (const auto& ed : core.edges())
    out.core.push_back(
        std::min(1.0 / std::sqrt(degree[static_cast<std::size_t>(ed.u)]),
                 1.0 / std::sqrt(degree[static_cast<std::size_t>(ed.v)])));

  out.rays.reserve(e.ray_count());
  for (std::size_t ri = 0; ri < e.ray_count(); ++ri) {
    const auto& ray = e.rays()[ri];
    const auto gw = ray.weights.geometric_tail();
    const auto gm = ray.measures.geometric_tail();
    if (!gw || !gm)
      throw std::invalid_argument(
          "minimum-degree ray lengths have a closed form only when the "
          "weight and measure rules both have geometric tails (ray " +
          std::to_string(ri) + ")");
    const double attach_degree =
        degree[static_cast<std::size_t>(core.require_index(ray.attach))];
    auto inv_sqrt_degree = [&](std::int64_t k) {
      if (k == 0) return 1.0 / std::sqrt(attach_degree);
      return 1.0 / std::sqrt((ray.weights.value(k - 1) + ray.weights.value(k)) /
                             ray.measures.value(k));
    };
    // Deg(x_k) = (w(k-1) + w(k)) / m(k) steps by exactly rho_w / rho_m once
    // k - 1 clears the weight rule's table and k clears the measure rule's.
    const std::int64_t head_len =
        std::max<std::int64_t>({gw->offset + 1, gm->offset, 1});
    const double q = std::sqrt(gm->ratio / gw->ratio);
    std::vector<double> head;
    head.reserve(static_cast<std::size_t>(head_len));
    for (std::int64_t k = 0; k < head_len; ++k)
      head.push_back(std::min(inv_sqrt_degree(k), inv_sqrt_degree(k + 1)));
    out.rays.push_back(SequenceRule::table(
        std::move(head),
        Geometric{inv_sqrt_degree(head_len) * std::min(1.0, q), q}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite shortest-path distances

// Distances from one source to every vertex; unreachable vertices carry
// +infinity.
inline VertexFunction shortest_paths(const EdgeLengths& sigma,
                                     const VertexId& source) {
  check_edge_lengths(sigma);
  const auto& g = sigma.graph;
  const auto s = g.require_index(source);
  std::vector<std::vector<std::pair<std::int32_t, double>>> adjacency(g.size());
  const auto& es = g.edges();
  for (std::size_t i = 0; i < es.size(); ++i) {
    adjacency[static_cast<std::size_t>(es[i].u)].push_back(
        {es[i].v, sigma.values[i]});
    adjacency[static_cast<std::size_t>(es[i].v)].push_back(
        {es[i].u, sigma.values[i]});
  }
  VertexFunction dist(g, std::numeric_limits<double>::infinity());
  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[s] = 0.0;
  queue.push({0.0, s});
  while (!queue.empty()) {
    const auto [d, x] = queue.top();
    queue.pop();
    if (d > dist[x]) continue;
    for (const auto& [y, len] : adjacency[static_cast<std::size_t>(x)]) {
      if (dist[x] + len < dist[y]) {
        dist[y] = dist[x] + len;
        queue.push({dist[y], y});
      }
    }
  }
  return dist;
}

// Shortest-path distance between two vertices; +infinity when they lie in
// different components.
inline double path_metric(const EdgeLengths& sigma, const VertexId& x,
                          const VertexId& y) {
  return shortest_paths(sigma, x).at(y);
}

// Lengths on the depth-d truncation of a graph with rays, edge for edge.
inline EdgeLengths materialize_lengths(const ExtendedGraph& e,
                                       const LengthFunction& sigma,
                                       std::int64_t depth) {
  check_length_function(e, sigma);
  auto truncation = e.truncate(depth);
  // std::minmax would hand back dangling references to temporaries here, so
  // order the endpoints into an owned pair instead.
  auto ordered = [](VertexId a, VertexId b) {
    if (b < a) std::swap(a, b);
    return std::pair<VertexId, VertexId>(std::move(a), std::move(b));
  };
  std::map<std::pair<VertexId, VertexId>, double> by_pair;
  const auto& ces = e.core().edges();
  for (std::size_t i = 0; i < ces.size(); ++i)
    by_pair[ordered(e.core().vertex(ces[i].u), e.core().vertex(ces[i].v))] =
        sigma.core[i];
  for (std::size_t ri = 0; ri < e.ray_count(); ++ri) {
    const auto rid = static_cast<std::int32_t>(ri);
    by_pair[ordered(e.rays()[ri].attach, VertexId::ray(rid, 1))] =
        sigma.rays[ri].value(0);
    for (std::int64_t k = 1; k < depth; ++k)
      by_pair[{VertexId::ray(rid, k), VertexId::ray(rid, k + 1)}] =
          sigma.rays[ri].value(k);
  }
  EdgeLengths out{truncation, {}};
  out.values.reserve(truncation.edge_count());
  for (const auto& ed : truncation.edges()) {
    auto it = by_pair.find(
        ordered(truncation.vertex(ed.u), truncation.vertex(ed.v)));
    if (it == by_pair.end())
      throw std::logic_error("truncation edge without a length");
    out.values.push_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ray lengths

// Certified total length sum_{k>=0} sigma(k) of one ray, attach edge
// included.
inline TailSum ray_length(const SequenceRule& sigma_ray) {
  return sigma_ray.tail_sum(0);
}

inline TailSum ray_length(const LengthFunction& sigma, std::size_t ray_index) {
  if (ray_index >= sigma.rays.size())
    throw std::invalid_argument("no such ray");
  return ray_length(sigma.rays[ray_index]);
}

// ---------------------------------------------------------------------------
// The vertex non-expansion condition

// Outcome of testing sum_y b(x,y) sigma(x,y)^2 <= m(x) at every vertex,
// including all vertices of every infinite ray. worst_ratio is the supremum
// of the left side over m(x); on ray tails it is resolved in closed form
// from the step ratio of consecutive terms. When the ratios grow without
// bound along some ray, worst_ratio is infinite and worst_vertex is the
// first vertex where the bound fails; otherwise worst_vertex attains the
// supremum and worst_slack is m - sum there. Equality passes: the comparison
// allows 64 eps for the rounding of the squares.
struct IntrinsicCheck {
  bool pass = false;
  double worst_ratio = 0.0;
  double worst_slack = 0.0;
  VertexId worst_vertex;
  std::string note;
};

namespace detail {

// Asymptotic shape of a rule: indices k >= offset follow
// value(k) = c * ratio^k * (k - offset + 1)^exponent with one of the two
// factors trivial. Every rule has such a shape.
struct TailShape {
  std::int64_t offset = 0;
  double ratio = 1.0;
  double exponent = 0.0;
};

inline TailShape tail_shape(const SequenceRule& r) {
  if (const auto g = r.geometric_tail()) return {g->offset, g->ratio, 0.0};
  const auto p = r.power_tail();
  return {p->offset, 1.0, p->exponent};
}

struct RaySupOutcome {
  bool unbounded = false;
  double sup = 0.0;       // attained supremum when bounded
  std::int64_t arg = 1;   // attaining index, or first index past 1 when unbounded
};

inline constexpr std::int64_t kIntrinsicScanCap = 1 << 20;

// sup over k >= 1 of t(k) = (w(k-1) s(k-1)^2 + w(k) s(k)^2) / m(k) for one
// ray with weight rule w, measure rule m, and length rule s. Both summands
// of t are products of rule values, so beyond every table prefix their step
// factor is L * (polynomial drift), L = rho_w rho_s^2 / rho_m, and the drift
// of a factor (k - N + 1)^E lies within exp(|E| / (k - N)) of one. The scan
// horizon below is chosen so that past it the sign of log(step) is decided,
// which pins the supremum to the scanned range or certifies divergence.
inline RaySupOutcome ray_intrinsic_sup(const RaySpec& ray,
                                       const SequenceRule& s,
                                       std::size_t ray_index) {
  auto t_at = [&](std::int64_t k) {
    const double sa = s.value(k - 1);
    const double sb = s.value(k);
    // Left-to-right grouping (w * s) * s keeps huge weights paired with tiny
    // lengths before squaring, so deep indices overflow to infinity rather
    // than produce inf * 0.
    const double t = (ray.weights.value(k - 1) * sa * sa +
                      ray.weights.value(k) * sb * sb) /
                     ray.measures.value(k);
    if (std::isnan(t))
      throw std::runtime_error("vertex condition overflowed along ray " +
                               std::to_string(ray_index));
    return t;
  };
  const TailShape ws = tail_shape(ray.weights);
  const TailShape ss = tail_shape(s);
  const TailShape ms = tail_shape(ray.measures);
  const std::int64_t nstar = std::max({ws.offset, ss.offset, ms.offset}) + 1;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // The combined ratio and exponent decide whether the tail grows. Their
  // evaluation carries a few units of rounding (lengths such as
  // sqrt(rho_m / rho_w) are themselves rounded), so a result within 16 eps
  // of exact balance is balance: a genuine drift that small is below what
  // the double inputs can express, and taking it literally would send the
  // first-failure search into the overflow range of the rules.
  const double raw_growth = ws.ratio * ss.ratio * ss.ratio / ms.ratio;
  const double growth =
      std::abs(raw_growth - 1.0) <= 16.0 * eps ? 1.0 : raw_growth;
  const double exponent_mass = std::abs(ws.exponent) +
                               2.0 * std::abs(ss.exponent) +
                               std::abs(ms.exponent);
  const double raw_net = ws.exponent + 2.0 * ss.exponent - ms.exponent;
  const double net_exponent =
      std::abs(raw_net) <= 16.0 * eps * exponent_mass ? 0.0 : raw_net;

  std::int64_t horizon = nstar + 1;
  if (exponent_mass > 0.0) {
    if (growth != 1.0) {
      // |log step - log L| <= exponent_mass / (k - nstar): past this horizon
      // the drift cannot flip the sign of log L.
      horizon = nstar +
                static_cast<std::int64_t>(std::ceil(
                    2.0 * exponent_mass / std::abs(std::log(growth)))) +
                1;
    } else if (net_exponent != 0.0) {
      // Pure polynomial drift: the per-factor rates 1/(k - N_r) agree to
      // O(nstar / k^2), so the net exponent rules the sign once k clears a
      // horizon proportional to exponent_mass * nstar / |net_exponent|.
      horizon = 2 * nstar + 3 +
                static_cast<std::int64_t>(
                    std::ceil(4.0 * exponent_mass *
                              static_cast<double>(nstar + 3) /
                              std::abs(net_exponent)));
    } else {
      throw std::runtime_error(
          "no certified tail comparison for ray " + std::to_string(ray_index) +
          ": the weight, measure, and length rules balance to drifting power "
          "tails; supply lengths with geometric tails");
    }
  }
  if (horizon > kIntrinsicScanCap)
    throw std::runtime_error("no certified tail comparison for ray " +
                             std::to_string(ray_index) +
                             " within the scan budget");

  RaySupOutcome out;
  double best = -1.0;
  std::int64_t best_arg = 1;
  std::int64_t first_violation = 0;
  for (std::int64_t k = 1; k <= horizon; ++k) {
    const double t = t_at(k);
    if (t > best) {
      best = t;
      best_arg = k;
    }
    if (first_violation == 0 && t > 1.0) first_violation = k;
  }
  const bool tail_grows =
      growth > 1.0 || (growth == 1.0 && net_exponent > 0.0);
  if (!tail_grows) {
    // Beyond the horizon t never increases, so the scan saw the supremum.
    out.sup = best;
    out.arg = best_arg;
    return out;
  }
  out.unbounded = true;
  if (first_violation != 0) {
    out.arg = first_violation;
    return out;
  }
  // t increases strictly past the horizon; bracket the first index with
  // t > 1 geometrically, then bisect inside the monotone range.
  std::int64_t lo = horizon;
  std::int64_t step = 1;
  std::int64_t hi = horizon + step;
  while (t_at(hi) <= 1.0) {
    lo = hi;
    step *= 2;
    if (step > (std::int64_t{1} << 56))
      throw std::runtime_error("vertex condition diverges too slowly to "
                               "locate the first failure along ray " +
                               std::to_string(ray_index));
    hi = horizon + step;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (t_at(mid) <= 1.0 ? lo : hi) = mid;
  }
  out.arg = hi;
  return out;
}

}  // namespace detail

// sum_y b(x,y) sigma(x,y)^2 / m(x) at a single vertex, core or ray.
inline double intrinsic_ratio(const ExtendedGraph& e,
                              const LengthFunction& sigma, const VertexId& x) {
  check_length_function(e, sigma);
  if (const auto* rv = x.as_ray()) {
    const auto ri = static_cast<std::size_t>(rv->ray);
    if (ri >= e.ray_count()) throw std::invalid_argument("no such ray");
    const auto& ray = e.rays()[ri];
    const auto& s = sigma.rays[ri];
    const double sa = s.value(rv->index - 1);
    const double sb = s.value(rv->index);
    return (ray.weights.value(rv->index - 1) * sa * sa +
            ray.weights.value(rv->index) * sb * sb) /
           ray.measures.value(rv->index);
  }
  const auto& core = e.core();
  const auto i = core.require_index(x);
  double sum = 0.0;
  const auto& ces = core.edges();
  for (std::size_t k = 0; k < ces.size(); ++k)
    if (ces[k].u == i || ces[k].v == i)
      sum += ces[k].weight * sigma.core[k] * sigma.core[k];
  for (std::size_t ri = 0; ri < e.ray_count(); ++ri)
    if (e.rays()[ri].attach == x) {
      const double s0 = sigma.rays[ri].value(0);
      sum += e.rays()[ri].weights.value(0) * s0 * s0;
    }
  return sum / core.measure(i);
}

inline IntrinsicCheck check_intrinsic(const ExtendedGraph& e,
                                      const LengthFunction& sigma) {
  check_length_function(e, sigma);
  const auto& core = e.core();
  if (core.size() == 0)
    throw std::invalid_argument("graph has no vertices");
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double inf = std::numeric_limits<double>::infinity();

  double best = -1.0;
  VertexId best_vertex;
  double best_sum = 0.0;
  double best_measure = 1.0;

  std::vector<double> sums(core.size(), 0.0);
  const auto& ces = core.edges();
  for (std::size_t i = 0; i < ces.size(); ++i) {
    const double c = ces[i].weight * sigma.core[i] * sigma.core[i];
    sums[static_cast<std::size_t>(ces[i].u)] += c;
    sums[static_cast<std::size_t>(ces[i].v)] += c;
  }
  for (std::size_t ri = 0; ri < e.ray_count(); ++ri) {
    const double s0 = sigma.rays[ri].value(0);
    sums[static_cast<std::size_t>(core.require_index(e.rays()[ri].attach))] +=
        e.rays()[ri].weights.value(0) * s0 * s0;
  }
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(core.size()); ++i) {
    const double ratio = sums[static_cast<std::size_t>(i)] / core.measure(i);
    if (ratio > best) {
      best = ratio;
      best_vertex = core.vertex(i);
      best_sum = sums[static_cast<std::size_t>(i)];
      best_measure = core.measure(i);
    }
  }

  for (std::size_t ri = 0; ri < e.ray_count(); ++ri) {
    const auto outcome =
        detail::ray_intrinsic_sup(e.rays()[ri], sigma.rays[ri], ri);
    const auto rid = static_cast<std::int32_t>(ri);
    if (outcome.unbounded) {
      IntrinsicCheck out;
      out.pass = false;
      out.worst_ratio = inf;
      out.worst_slack = -inf;
      out.worst_vertex = VertexId::ray(rid, outcome.arg);
      out.note = "the ratios grow without bound along ray " +
                 std::to_string(ri) + "; first failure at " +
                 out.worst_vertex.str();
      return out;
    }
    if (outcome.sup > best) {
      best = outcome.sup;
      best_vertex = VertexId::ray(rid, outcome.arg);
      best_measure = e.rays()[ri].measures.value(outcome.arg);
      best_sum = outcome.sup * best_measure;
    }
  }

  IntrinsicCheck out;
  out.worst_ratio = best;
  out.worst_vertex = best_vertex;
  out.worst_slack = best_measure - best_sum;
  out.pass = best <= 1.0 + 64.0 * eps;
  out.note = (out.pass ? "largest ratio " : "the vertex condition fails with ratio ") +
             std::to_string(best) + " at " + best_vertex.str();
  return out;
}

// ---------------------------------------------------------------------------
// Completeness

// Per-ray certified lengths and the resulting verdict: the metric space is
// complete exactly when every ray has infinite total sigma-length. When some
// ray is finite, the smallest such index is reported as the witness together
// with its certified length. The vertex condition for the same lengths is
// carried along.
struct CompletenessVerdict {
  std::vector<TailSum> ray_lengths;
  bool complete = false;
  std::optional<int> witness_ray;
  double witness_length = std::numeric_limits<double>::quiet_NaN();
  IntrinsicCheck intrinsic_check;
};

inline CompletenessVerdict completeness_verdict(const ExtendedGraph& e,
                                                const LengthFunction& sigma) {
  check_length_function(e, sigma);
  CompletenessVerdict out;
  out.intrinsic_check = check_intrinsic(e, sigma);
  out.complete = true;
  out.ray_lengths.reserve(e.ray_count());
  for (std::size_t ri = 0; ri < e.ray_count(); ++ri) {
    TailSum length = ray_length(sigma, ri);
    if (length.kind == TailSum::Kind::NotComputable)
      throw std::runtime_error("length of ray " + std::to_string(ri) +
                               " is not computable: " + length.reason);
    if (length.finite() && out.complete) {
      out.complete = false;
      out.witness_ray = static_cast<int>(ri);
      out.witness_length = length.value;
    }
    out.ray_lengths.push_back(std::move(length));
  }
  return out;
}

}  // namespace netpot
