#pragma once

// Bottom-of-spectrum estimation for graphs with ray extensions.
//
// Truncation eigenvalues approach the bottom of the spectrum from above
// (Dirichlet domain monotonicity), so a "strictly positive" verdict rests on
// stabilization of that sequence and carries its stabilization gap. A
// "vanishing" verdict is structural: a witness family of finitely supported
// functions whose Rayleigh quotients provably tend to zero — segment
// indicators along a ray with bounded weights and divergent measure, exactly
// the pattern that makes the quotient (coupling + cut weight) / mass.

#include <netpot/graph.hpp>
#include <netpot/solvers.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace netpot {

// Rayleigh quotient Q(f) / ||f||_m^2 of a nonzero function.
inline double rayleigh(const VertexFunction& f) {
  const double denom = m_norm_sq(f);
  if (denom == 0.0)
    throw std::invalid_argument("rayleigh quotient needs a nonzero function");
  return energy(f) / denom;
}

// Indicator of {attach} + the first k ray vertices of one ray, realized on
// truncate(k+1) so that every edge leaving the support is present. As a
// finitely supported function on the infinite graph its energy is the
// core coupling of the attach vertex plus the single cut edge w(k); its mass
// is m(attach) + sum_{r<=k} m(r).
inline VertexFunction ray_segment_indicator(const ExtendedGraph& e, int ray,
                                            std::int64_t k) {
  if (ray < 0 || ray >= static_cast<int>(e.rays().size()))
    throw std::invalid_argument("no such ray");
  if (k < 1) throw std::invalid_argument("segment needs k >= 1");
  const auto g = e.truncate(k + 1);
  VertexFunction f(g);
  f.at(e.rays()[static_cast<std::size_t>(ray)].attach) = 1.0;
  for (std::int64_t r = 1; r <= k; ++r) f.at(VertexId::ray(ray, r)) = 1.0;
  return f;
}

// Tent profile along one ray: 1 at the attach vertex, decreasing linearly to
// zero at ray index k, zero elsewhere; realized on truncate(k + 1).
inline VertexFunction ray_tent(const ExtendedGraph& e, int ray,
                               std::int64_t k) {
  if (ray < 0 || ray >= static_cast<int>(e.rays().size()))
    throw std::invalid_argument("no such ray");
  if (k < 1) throw std::invalid_argument("tent needs k >= 1");
  const auto g = e.truncate(k + 1);
  VertexFunction f(g);
  f.at(e.rays()[static_cast<std::size_t>(ray)].attach) = 1.0;
  for (std::int64_t r = 1; r < k; ++r)
    f.at(VertexId::ray(ray, r)) =
        1.0 - static_cast<double>(r) / static_cast<double>(k);
  return f;
}

enum class SpectralVerdict { StrictlyPositive, Vanishing, Undetermined };

struct WitnessReport {
  int ray;
  std::string family;                 // "segment-indicator" or "tent"
  std::vector<std::int64_t> sizes;    // segment lengths probed
  std::vector<double> quotients;      // Rayleigh quotients, tending to zero
  std::string certificate;            // why the quotients provably vanish
};

struct SpectralEstimate {
  std::vector<std::int64_t> depths;
  std::vector<double> lambda0;  // Dirichlet values per truncation, nonincreasing
  double estimate = std::numeric_limits<double>::quiet_NaN();  // last value
  double stabilization_gap = std::numeric_limits<double>::infinity();
  bool limit_from_above = true;  // truncations bound the bottom from above
  SpectralVerdict verdict = SpectralVerdict::Undetermined;
  std::vector<WitnessReport> witnesses;
};

// Dirichlet bottom eigenvalue of each truncation. The sequence decreases
// toward the bottom of the spectrum because finitely supported functions
// exhaust the form domain through truncations.
inline SpectralEstimate lambda0_truncations(const ExtendedGraph& e,
                                            const std::vector<std::int64_t>& depths) {
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (depths[i] <= depths[i - 1])
      throw std::invalid_argument("depths must be increasing");
  SpectralEstimate out;
  for (const auto d : depths) {
    const auto g = e.truncate(d);
    DirichletOperator op(g, e.ray_cut_vertices(d));
    out.depths.push_back(d);
    out.lambda0.push_back(smallest_eigenvalue(op).value);
  }
  if (!out.lambda0.empty()) {
    out.estimate = out.lambda0.back();
    out.stabilization_gap =
        out.lambda0.size() >= 2
            ? out.lambda0[out.lambda0.size() - 2] - out.lambda0.back()
            : std::numeric_limits<double>::infinity();
  }
  return out;
}

namespace detail {

// A ray supports a vanishing witness family when its weights stay bounded
// while its measure tail diverges: the segment-indicator quotient is then
// (core coupling + w(k)) / (m(attach) + sum m) -> 0.
inline bool vanishing_segment_certificate(const RaySpec& ray) {
  if (!ray.measures.tail_sum(1).divergent()) return false;
  if (const auto g = ray.weights.geometric_tail())
    return g->ratio <= 1.0;
  if (const auto p = ray.weights.power_tail())
    return p->exponent <= 0.0;
  return false;
}

inline double core_coupling(const FiniteWeightedGraph& core,
                            const VertexId& attach) {
  double s = 0.0;
  for (const auto& n : core.neighbors(core.require_index(attach)))
    s += n.weight;
  return s;
}

}  // namespace detail

// Verdict on strict positivity of the bottom of the spectrum.
//
// Order of decision: a structural vanishing certificate on any ray wins
// (quotients of the witness family tend to zero by closed form, regardless
// of how slowly); otherwise stabilization of the truncation sequence above
// tol yields strictly-positive with an explicit stabilization gap; otherwise
// undetermined.
inline SpectralEstimate strict_positivity_verdict(const ExtendedGraph& e,
                                                  double tol = 1e-7,
                                                  std::int64_t max_depth = 64) {
  std::vector<std::int64_t> depths;
  for (std::int64_t d = 4; d < max_depth; d *= 2) depths.push_back(d);
  depths.push_back(max_depth);
  auto out = lambda0_truncations(e, depths);

  const std::int64_t probes[4] = {max_depth / 8, max_depth / 4, max_depth / 2,
                                  max_depth};
  for (std::size_t ri = 0; ri < e.rays().size(); ++ri) {
    const auto& ray = e.rays()[ri];
    if (!detail::vanishing_segment_certificate(ray)) continue;
    WitnessReport w;
    w.ray = static_cast<int>(ri);
    w.family = "segment-indicator";
    w.certificate =
        "weights bounded along the ray while the measure tail diverges; the "
        "quotient (coupling + cut weight) / mass tends to zero";
    for (const auto k : probes) {
      if (k < 1) continue;
      w.sizes.push_back(k);
      w.quotients.push_back(rayleigh(ray_segment_indicator(
          e, static_cast<int>(ri), k)));
    }
    out.witnesses.push_back(std::move(w));
  }
  if (!out.witnesses.empty()) {
    out.verdict = SpectralVerdict::Vanishing;
    return out;
  }
  if (out.estimate > tol && out.stabilization_gap < tol)
    out.verdict = SpectralVerdict::StrictlyPositive;
  return out;
}

}  // namespace netpot
