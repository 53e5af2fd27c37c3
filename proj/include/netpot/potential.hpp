#pragma once

// Potentials on graphs with ray extensions: equilibrium potentials and
// capacities of finite sets, grounded point-source potentials, and their
// exhaustion limits.
//
// Verdicts that only depend on the asymptotic class of the ray rules
// (transience, zero capacity, divergence of the exhaustion) are decided
// structurally from certified tail sums, never from eyeballing whether a
// numeric sequence looks converged. Numeric limits come from a finite
// "limit core" problem in which every transient ray is replaced by a
// grounded pendant edge carrying the ray's total conductance; recurrent rays
// carry no current in the limit and extend constantly.

#include <netpot/graph.hpp>
#include <netpot/solvers.hpp>
#include <netpot/spectral.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netpot {

struct ConvergenceTrace {
  enum class Verdict { Converged, MonotoneUnconverged, DivergentTail };
  std::vector<std::int64_t> depths;
  std::vector<double> values;
  Verdict verdict = Verdict::MonotoneUnconverged;
  double limit = std::numeric_limits<double>::quiet_NaN();
  double certified_error = std::numeric_limits<double>::infinity();
};

// A graph with ray extensions is transient exactly when some ray has finite
// resistance to infinity; all current escaping to infinity runs through a ray.
inline bool is_transient(const ExtendedGraph& e) {
  for (const auto& ray : e.rays())
    if (ray.weights.inverted().tail_sum(0).finite()) return true;
  return false;
}

namespace detail {

struct LimitCore {
  FiniteWeightedGraph graph;  // core plus one grounded pendant per transient ray
  std::vector<VertexId> pendant_ids;    // aligned with transient_rays
  std::vector<int> transient_rays;      // ray indices with finite resistance
  std::vector<TailSum> resistances;     // total ray resistance, attach to infinity
};

inline LimitCore build_limit_core(const ExtendedGraph& e) {
  LimitCore out;
  GraphData data;
  const auto& core = e.core();
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(core.size()); ++i)
    data.vertex(core.vertex(i), core.measure(i));
  for (const auto& edge : core.edges())
    data.edge(core.vertex(edge.u), core.vertex(edge.v), edge.weight);
  for (std::size_t ri = 0; ri < e.rays().size(); ++ri) {
    const auto& ray = e.rays()[ri];
    const auto resistance = ray.weights.inverted().tail_sum(0);
    if (!resistance.finite()) continue;
    std::string label = "zeta" + std::to_string(ri);
    while (core.index_of(VertexId::core(label))) label += "_";
    const auto pendant = VertexId::core(label);
    data.vertex(pendant, 1.0);
    data.edge(ray.attach, pendant, 1.0 / resistance.value);
    out.pendant_ids.push_back(pendant);
    out.transient_rays.push_back(static_cast<int>(ri));
    out.resistances.push_back(resistance);
  }
  out.graph = FiniteWeightedGraph::from_data(data);
  return out;
}

inline std::vector<std::int64_t> trace_depths(std::int64_t final_depth) {
  std::vector<std::int64_t> depths;
  for (std::int64_t d = 4; d < final_depth; d *= 2) depths.push_back(d);
  depths.push_back(final_depth);
  return depths;
}

}  // namespace detail

// Equilibrium potential of a core vertex set at one truncation depth:
// 1 on omega, 0 on the ray cut vertices, harmonic in between.
inline Solution equilibrium_potential(const ExtendedGraph& e,
                                      const std::vector<VertexId>& omega,
                                      std::int64_t depth) {
  if (omega.empty())
    throw std::invalid_argument("equilibrium potential needs a nonempty set");
  for (const auto& id : omega) {
    if (id.is_ray())
      throw std::invalid_argument("equilibrium sets live in the core");
    e.core().require_index(id);
  }
  const auto g = e.truncate(depth);
  std::vector<std::pair<VertexId, double>> boundary;
  for (const auto& id : omega) boundary.emplace_back(id, 1.0);
  for (const auto& cut : e.ray_cut_vertices(depth)) boundary.emplace_back(cut, 0.0);
  return solve_boundary(g, boundary);
}

struct CapacityEstimate {
  bool transient;          // structural verdict from the ray resistances
  double value;            // limit capacity; exactly zero when recurrent
  double certified_error;  // first-order error budget of the limit value
  ConvergenceTrace trace;  // capacities of the truncations, decreasing
};

// Capacity of a finite core set: energy of the equilibrium potential, driven
// to its exhaustion limit. On recurrent graphs the limit is exactly zero; on
// transient graphs it is computed from the limit-core problem, and the
// envelope theorem turns resistance-tail errors into a certified capacity
// error (the derivative of the minimal energy in a pendant conductance is the
// squared potential at its attach vertex).
inline CapacityEstimate capacity(const ExtendedGraph& e,
                                 const std::vector<VertexId>& omega,
                                 double tol = 1e-8,
                                 std::int64_t max_depth = 64) {
  CapacityEstimate out;
  out.transient = is_transient(e);
  if (e.rays().empty()) {
    // A finite graph needs no exhaustion: one direct solve settles the
    // capacity (zero on a connected graph, where the constant one competes).
    const auto phi = equilibrium_potential(e, omega, 1);
    const double cap = energy(phi.values);
    out.value = cap;
    out.certified_error = 16.0 * std::numeric_limits<double>::epsilon() * cap;
    out.trace.depths = {0};
    out.trace.values = {cap};
    out.trace.limit = cap;
    out.trace.certified_error = out.certified_error;
    out.trace.verdict = ConvergenceTrace::Verdict::Converged;
    return out;
  }
  out.trace.depths = detail::trace_depths(max_depth);
  for (const auto d : out.trace.depths) {
    const auto phi = equilibrium_potential(e, omega, d);
    out.trace.values.push_back(energy(phi.values));
  }
  // The truncation capacities are nonincreasing, so convergence is declared
  // when successive values differ by less than tol relative to the value,
  // and the last iterate is always a certified upper bound.
  const auto n = out.trace.values.size();
  const double step = n >= 2 ? std::abs(out.trace.values[n - 2] - out.trace.values[n - 1])
                             : std::numeric_limits<double>::infinity();
  if (!out.transient) {
    out.value = 0.0;
    out.certified_error = 0.0;
    out.trace.limit = 0.0;
    out.trace.verdict = step < tol ? ConvergenceTrace::Verdict::Converged
                                   : ConvergenceTrace::Verdict::MonotoneUnconverged;
    out.trace.certified_error = out.trace.values.back();
    return out;
  }
  const auto limit_core = detail::build_limit_core(e);
  std::vector<std::pair<VertexId, double>> boundary;
  for (const auto& id : omega) boundary.emplace_back(id, 1.0);
  for (const auto& pid : limit_core.pendant_ids) boundary.emplace_back(pid, 0.0);
  const auto phi = solve_boundary(limit_core.graph, boundary);
  const double cap = energy(phi.values);

  double err = 16.0 * std::numeric_limits<double>::epsilon() * cap;
  for (std::size_t i = 0; i < limit_core.pendant_ids.size(); ++i) {
    const auto att =
        phi.values.at(e.rays()[static_cast<std::size_t>(limit_core.transient_rays[i])].attach);
    const auto& R = limit_core.resistances[i];
    const double conductance_err = R.error / (R.value * R.value);
    err += att * att * conductance_err;
  }
  out.value = cap;
  out.certified_error = err;
  out.trace.limit = cap;
  const double gap = out.trace.values.back() - cap;
  out.trace.certified_error = std::abs(gap) + err;
  out.trace.verdict = step < tol * std::max(1.0, cap)
                          ? ConvergenceTrace::Verdict::Converged
                          : ConvergenceTrace::Verdict::MonotoneUnconverged;
  return out;
}

// Limit behavior of one ray under a grounded potential: a constant current
// flows along the ray and the values are affine in the remaining resistance.
struct RayTail {
  int ray;
  double current;           // current flowing into the ray; zero on recurrent rays
  double value_at_attach;
  double resistance_total;  // attach to infinity; infinite on recurrent rays
  double value(const RaySpec& spec, std::int64_t r) const {
    if (current == 0.0) return value_at_attach;
    const auto s = spec.weights.inverted().tail_sum(r);
    return current * s.value;
  }
};

struct GreenEstimate {
  VertexId pole;
  bool transient;
  std::int64_t depth;
  VertexFunction exhaustion_values;  // grounded solve on truncate(depth)
  VertexFunction limit_values;       // exact limit on the same truncation
  double sup_gap;     // sup over the truncation of (limit - exhaustion);
                      // equals the largest limit value on a cut vertex
  VertexFunction core_limit;         // limit values on the limit-core graph
  std::vector<RayTail> ray_tails;
  ConvergenceTrace trace;            // exhaustion values at the pole
  double certified_error;            // error budget of the limit values
};

// Grounded potential with a unit source at a core vertex, along the
// exhaustion and in the limit. The exhaustion solves ground the cut
// vertices; the limit solves the finite limit-core problem and extends along
// each ray in closed form.
inline GreenEstimate green_function(const ExtendedGraph& e, const VertexId& pole,
                                    double tol = 1e-8,
                                    std::int64_t depth = 64) {
  if (e.rays().empty())
    throw std::invalid_argument(
        "the grounded potential needs at least one ray; a finite graph "
        "offers no escape to infinity");
  if (pole.is_ray())
    throw std::invalid_argument("pole must be a core vertex");
  e.core().require_index(pole);
  GreenEstimate out;
  out.pole = pole;
  out.transient = is_transient(e);
  out.depth = depth;

  auto unit_source = [&](const FiniteWeightedGraph& g) {
    VertexFunction rhs(g);
    const auto i = g.require_index(pole);
    rhs[i] = 1.0 / g.measure(i);
    return rhs;
  };

  out.trace.depths = detail::trace_depths(depth);
  for (const auto d : out.trace.depths) {
    const auto g = e.truncate(d);
    DirichletOperator op(g, e.ray_cut_vertices(d));
    const auto sol = solve(op, unit_source(g));
    out.trace.values.push_back(sol.values.at(pole));
    if (d == depth) out.exhaustion_values = sol.values;
  }

  if (!out.transient) {
    out.sup_gap = std::numeric_limits<double>::infinity();
    out.certified_error = std::numeric_limits<double>::infinity();
    out.trace.verdict = ConvergenceTrace::Verdict::DivergentTail;
    return out;
  }

  const auto limit_core = detail::build_limit_core(e);
  DirichletOperator op(limit_core.graph, limit_core.pendant_ids);
  const auto sol = solve(op, unit_source(limit_core.graph));
  out.core_limit = sol.values;

  double err = 0.0;
  for (std::size_t i = 0; i < limit_core.pendant_ids.size(); ++i) {
    // envelope bound: d(g(pole))/d(c_i) = -phi_i(att)^2-style sensitivity is
    // bounded by the attach value squared over the source strength
    const auto att_value = sol.values.at(
        e.rays()[static_cast<std::size_t>(limit_core.transient_rays[i])].attach);
    const auto& R = limit_core.resistances[i];
    err += att_value * att_value * R.error / (R.value * R.value);
  }
  err += 64.0 * std::numeric_limits<double>::epsilon() *
         std::abs(sol.values.at(pole));
  out.certified_error = err;

  out.ray_tails.reserve(e.rays().size());
  for (std::size_t ri = 0; ri < e.rays().size(); ++ri) {
    const auto& ray = e.rays()[ri];
    RayTail tail;
    tail.ray = static_cast<int>(ri);
    tail.value_at_attach = sol.values.at(ray.attach);
    const auto R = ray.weights.inverted().tail_sum(0);
    if (R.finite()) {
      tail.resistance_total = R.value;
      tail.current = tail.value_at_attach / R.value;
    } else {
      tail.resistance_total = std::numeric_limits<double>::infinity();
      tail.current = 0.0;
    }
    out.ray_tails.push_back(tail);
  }

  // limit values on the truncation: core values from the limit solve, ray
  // values affine in the remaining resistance
  const auto trunc = e.truncate(depth);
  out.limit_values = VertexFunction(trunc);
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(trunc.size()); ++i) {
    const auto& id = trunc.vertex(i);
    if (const auto* rv = id.as_ray()) {
      out.limit_values[i] =
          out.ray_tails[static_cast<std::size_t>(rv->ray)].value(
              e.rays()[static_cast<std::size_t>(rv->ray)], rv->index);
    } else {
      out.limit_values[i] = sol.values.at(id);
    }
  }

  // the defect g - g_n is harmonic on the whole interior and equals the limit
  // value at each cut vertex, so its sup is the largest cut value
  double gap = 0.0;
  for (const auto& tail : out.ray_tails) {
    const auto& ray = e.rays()[static_cast<std::size_t>(tail.ray)];
    gap = std::max(gap, tail.value(ray, depth));
  }
  out.sup_gap = gap;

  out.trace.limit = sol.values.at(pole);
  const double pole_gap = out.trace.limit - out.trace.values.back();
  out.trace.certified_error = std::abs(pole_gap) + err;
  // convergence is monitored at the pole: declared when the last two
  // exhaustion values there differ by less than tol relative to the limit
  const auto n = out.trace.values.size();
  const double step = n >= 2 ? std::abs(out.trace.values[n - 2] - out.trace.values[n - 1])
                             : std::numeric_limits<double>::infinity();
  out.trace.verdict = step < tol * std::max(1.0, std::abs(out.trace.limit))
                          ? ConvergenceTrace::Verdict::Converged
                          : ConvergenceTrace::Verdict::MonotoneUnconverged;
  return out;
}

// Square integrability of the limit potential over the whole extended graph:
// core part summed directly, ray parts as certified tail sums carrying the
// constant ray current.
inline TailSum green_l2(const ExtendedGraph& e, const GreenEstimate& est) {
  if (!est.transient)
    return TailSum::make_divergent();
  double core_part = 0.0;
  const auto& core = e.core();
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(core.size()); ++i) {
    const double v = est.core_limit.at(core.vertex(i));
    core_part += v * v * core.measure(i);
  }
  double total = core_part;
  double err = 16.0 * std::numeric_limits<double>::epsilon() * core_part;
  for (const auto& tail : est.ray_tails) {
    const auto& ray = e.rays()[static_cast<std::size_t>(tail.ray)];
    const double v1 = tail.value(ray, 1);
    const auto t = ray_l2_tail(ray.weights, ray.measures, v1, tail.current, 1);
    if (!t.finite()) return t;
    total += t.value;
    err += t.error;
  }
  err += 4.0 * est.certified_error * std::sqrt(total);
  return TailSum::make_finite(total, err);
}

// Norm bound for the limit potential: with pole p inside a finite core set
// Omega, the potential g = g(p, .) satisfies
//   ||g||_{l2(X \ Omega, m)}  <=  C sqrt(cap(Omega)) / sqrt(lambda_0)
// with C the largest g-value on the inner vertex boundary of Omega. The
// comparison function C * phi_n dominates g_n off Omega by the maximum
// principle, and its norm is controlled through the bottom of the spectrum.
struct GreenBoundCheck {
  bool applicable = false;
  std::string reason;      // why not applicable, when it is not
  std::int64_t depth = 0;
  double lambda0 = std::numeric_limits<double>::quiet_NaN();
  double cap = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
  // l2 norm of the limit potential off Omega, over the truncation alone and
  // with certified ray tails added (NaN when a tail is not computable)
  double lhs = std::numeric_limits<double>::quiet_NaN();
  double lhs_with_tails = std::numeric_limits<double>::quiet_NaN();
  double rhs = std::numeric_limits<double>::quiet_NaN();
  bool holds = false;
};

inline GreenBoundCheck greens_l2_bound_check(const ExtendedGraph& e,
                                             const VertexId& pole,
                                             const std::vector<VertexId>& omega,
                                             std::int64_t depth,
                                             double tol = 1e-7) {
  GreenBoundCheck out;
  out.depth = depth;
  if (omega.empty())
    throw std::invalid_argument("the bound needs a nonempty core set");
  for (const auto& id : omega) {
    if (id.is_ray())
      throw std::invalid_argument("the set must consist of core vertices");
    e.core().require_index(id);
  }
  auto in_omega = [&](const VertexId& id) {
    return std::find(omega.begin(), omega.end(), id) != omega.end();
  };
  if (!in_omega(pole))
    throw std::invalid_argument("the pole must belong to the set");

  // empty exterior: nothing to bound
  const auto& core = e.core();
  if (e.rays().empty() &&
      omega.size() == static_cast<std::size_t>(core.size())) {
    out.applicable = true;
    out.lhs = out.lhs_with_tails = 0.0;
    out.cap = 0.0;
    out.C = 0.0;
    out.rhs = 0.0;
    out.holds = true;
    return out;
  }

  if (!is_transient(e)) {
    out.reason = "graph is recurrent; no finite limit potential";
    return out;
  }
  for (const auto& ray : e.rays()) {
    if (detail::vanishing_segment_certificate(ray)) {
      out.reason =
          "a ray carries a vanishing witness family; the bottom of the "
          "spectrum is zero and the bound is vacuous";
      return out;
    }
  }
  {
    const auto g = e.truncate(depth);
    DirichletOperator op(g, e.ray_cut_vertices(depth));
    out.lambda0 = smallest_eigenvalue(op).value;
  }
  if (!(out.lambda0 > tol)) {
    out.reason = "bottom-of-spectrum estimate below tolerance; bound vacuous";
    return out;
  }
  out.applicable = true;

  const auto est = green_function(e, pole, tol, depth);
  out.cap = capacity(e, omega, tol, depth).value;

  // inner vertex boundary of Omega: members with an edge leaving the set
  double C = 0.0;
  for (const auto& id : omega) {
    bool boundary = false;
    for (const auto& n : core.neighbors(core.require_index(id)))
      if (!in_omega(core.vertex(n.index))) boundary = true;
    for (const auto& ray : e.rays())
      if (ray.attach == id) boundary = true;
    if (boundary) C = std::max(C, est.core_limit.at(id));
  }
  out.C = C;

  double sq = 0.0;
  const auto& trunc = est.limit_values.graph;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(trunc.size()); ++i) {
    const auto& id = trunc.vertex(i);
    if (!id.is_ray() && in_omega(id)) continue;
    sq += est.limit_values[i] * est.limit_values[i] * trunc.measure(i);
  }
  out.lhs = std::sqrt(sq);

  double sq_tails = sq;
  bool tails_ok = true;
  for (const auto& tail : est.ray_tails) {
    const auto& ray = e.rays()[static_cast<std::size_t>(tail.ray)];
    const auto t = ray_l2_tail(ray.weights, ray.measures,
                               tail.value(ray, depth + 1), tail.current,
                               depth + 1);
    if (!t.finite()) {
      tails_ok = false;
      break;
    }
    sq_tails += t.value + t.error;
  }
  if (tails_ok) out.lhs_with_tails = std::sqrt(sq_tails);

  out.rhs = C * std::sqrt(out.cap) / std::sqrt(out.lambda0);
  const double lhs_final = tails_ok ? out.lhs_with_tails : out.lhs;
  out.holds = lhs_final <= out.rhs * (1.0 + 1e-9);
  return out;
}

// Heat-integral consistency: integrating the semigroup against a unit point
// source over [0, T] approaches the grounded potential; the spectral defect
// is bounded by e^(-lambda_0 T) / lambda_0 over the measure scale.
struct HeatCrosscheck {
  double discrepancy;      // max |heat - solve| / max |solve|
  double certified_bound;  // spectral bound on that discrepancy
  double lambda0;
};

inline HeatCrosscheck heat_green_crosscheck(const ExtendedGraph& e,
                                            const VertexId& pole,
                                            std::int64_t depth, double T) {
  const auto g = e.truncate(depth);
  DirichletOperator op(g, e.ray_cut_vertices(depth));
  const auto src = g.require_index(pole);
  VertexFunction rhs(g);
  rhs[src] = 1.0 / g.measure(src);
  const auto sol = solve(op, rhs);
  const auto h = heat_integral(op, pole, T);
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    diff = std::max(diff, std::abs(h.values[i] - sol.values.values[i]));
    scale = std::max(scale, std::abs(sol.values.values[i]));
  }
  const double lambda0 = smallest_eigenvalue(op).value;
  double inv_sqrt_m = 0.0;
  for (const auto x : op.interior())
    inv_sqrt_m = std::max(
        inv_sqrt_m, 1.0 / std::sqrt(g.measure(src) * g.measure(x)));
  HeatCrosscheck out;
  out.discrepancy = diff / std::max(scale, 1e-300);
  // spectral defect bound plus a rounding floor for the dense factorization;
  // for any T of interest the spectral term dominates by orders of magnitude
  out.certified_bound = std::exp(-lambda0 * T) / lambda0 * inv_sqrt_m /
                            std::max(scale, 1e-300) +
                        1e4 * std::numeric_limits<double>::epsilon();
  out.lambda0 = lambda0;
  return out;
}

}  // namespace netpot
