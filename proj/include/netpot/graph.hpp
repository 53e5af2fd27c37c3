#pragma once

// Weighted graph core: vertex identities, validated immutable finite graphs,
// the Laplacian and energy forms, and infinite ray extensions described by
// closed-form weight and measure rules.

#include <netpot/sequence.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace netpot {

// A vertex is either a finite-core label (integer or string) or the k-th
// vertex along an attached ray. Ordering groups integer labels first, then
// string labels, then ray vertices by (ray, index); this is the canonical
// vertex order everywhere.
class VertexId {
 public:
  struct RayVertex {
    std::int32_t ray;
    std::int64_t index;
    auto operator<=>(const RayVertex&) const = default;
  };

  VertexId() : rep_(std::int64_t{0}) {}

  static VertexId core(std::int64_t label) { return VertexId(label); }
  static VertexId core(std::string label) { return VertexId(std::move(label)); }
  static VertexId ray(std::int32_t ray_index, std::int64_t position) {
    if (position < 1)
      throw std::invalid_argument("ray vertex positions start at 1");
    return VertexId(RayVertex{ray_index, position});
  }

  bool is_ray() const { return std::holds_alternative<RayVertex>(rep_); }
  const RayVertex* as_ray() const { return std::get_if<RayVertex>(&rep_); }
  const std::int64_t* as_int() const { return std::get_if<std::int64_t>(&rep_); }
  const std::string* as_string() const { return std::get_if<std::string>(&rep_); }

  std::string str() const {
    if (const auto* i = std::get_if<std::int64_t>(&rep_))
      return std::to_string(*i);
    if (const auto* s = std::get_if<std::string>(&rep_)) return *s;
    const auto& r = std::get<RayVertex>(rep_);
    return "r" + std::to_string(r.ray) + ":" + std::to_string(r.index);
  }

  auto operator<=>(const VertexId&) const = default;

 private:
  explicit VertexId(std::int64_t v) : rep_(v) {}
  explicit VertexId(std::string v) : rep_(std::move(v)) {}
  explicit VertexId(RayVertex v) : rep_(v) {}
  std::variant<std::int64_t, std::string, RayVertex> rep_;
};

// Raw graph input before validation: a measure entry per vertex and an
// undirected edge entry list. May contain any kind of inconsistency.
struct GraphData {
  struct MeasureEntry {
    VertexId vertex;
    double measure;
  };
  struct EdgeEntry {
    VertexId u;
    VertexId v;
    double weight;
  };
  std::vector<MeasureEntry> measures;
  std::vector<EdgeEntry> edges;

  GraphData& vertex(VertexId id, double m) {
    measures.push_back({std::move(id), m});
    return *this;
  }
  GraphData& edge(VertexId u, VertexId v, double w) {
    edges.push_back({std::move(u), std::move(v), w});
    return *this;
  }
};

struct ValidationReport {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
  std::string joined() const {
    std::string out;
    for (const auto& p : problems) {
      if (!out.empty()) out += "; ";
      out += p;
    }
    return out;
  }
};

// Lists every violation, not just the first.
inline ValidationReport validate(const GraphData& data) {
  ValidationReport report;
  std::map<VertexId, std::size_t> seen_vertex;
  for (std::size_t i = 0; i < data.measures.size(); ++i) {
    const auto& entry = data.measures[i];
    auto [it, inserted] = seen_vertex.emplace(entry.vertex, i);
    if (!inserted) {
      report.problems.push_back("vertex " + entry.vertex.str() +
                                " has measure entries at positions " +
                                std::to_string(it->second) + " and " +
                                std::to_string(i));
    }
    if (!(entry.measure > 0.0) || !std::isfinite(entry.measure)) {
      report.problems.push_back("vertex " + entry.vertex.str() +
                                " has nonpositive or nonfinite measure " +
                                std::to_string(entry.measure));
    }
  }
  std::map<std::pair<VertexId, VertexId>, std::size_t> seen_edge;
  for (std::size_t i = 0; i < data.edges.size(); ++i) {
    const auto& e = data.edges[i];
    if (e.u == e.v) {
      report.problems.push_back("edge entry " + std::to_string(i) +
                                " is a self loop at " + e.u.str());
      continue;
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      report.problems.push_back("edge " + e.u.str() + "-" + e.v.str() +
                                " has nonpositive or nonfinite weight " +
                                std::to_string(e.weight));
    }
    for (const auto* endpoint : {&e.u, &e.v}) {
      if (!seen_vertex.contains(*endpoint)) {
        report.problems.push_back("edge " + e.u.str() + "-" + e.v.str() +
                                  " references unknown vertex " +
                                  endpoint->str());
      }
    }
    auto key = std::minmax(e.u, e.v);
    auto [it, inserted] = seen_edge.emplace(key, i);
    if (!inserted) {
      report.problems.push_back("edge " + key.first.str() + "-" +
                                key.second.str() +
                                " appears at entry positions " +
                                std::to_string(it->second) + " and " +
                                std::to_string(i));
    }
  }
  return report;
}

// Immutable weighted graph with strictly positive vertex measures and edge
// weights. Value type; copies share the representation.
class FiniteWeightedGraph {
 public:
  struct Neighbor {
    std::int32_t index;
    double weight;
  };
  struct Edge {
    std::int32_t u;
    std::int32_t v;
    double weight;
  };

  FiniteWeightedGraph() : rep_(std::make_shared<Rep>()) {}

  static FiniteWeightedGraph from_data(const GraphData& data) {
    auto report = validate(data);
    if (!report.ok())
      throw std::invalid_argument("invalid graph data: " + report.joined());
    auto rep = std::make_shared<Rep>();
    rep->vertices.reserve(data.measures.size());
    for (const auto& m : data.measures) rep->vertices.push_back(m.vertex);
    std::sort(rep->vertices.begin(), rep->vertices.end());
    rep->measures.resize(rep->vertices.size());
    for (const auto& m : data.measures) {
      const auto idx = index_in(rep->vertices, m.vertex);
      rep->measures[static_cast<std::size_t>(*idx)] = m.measure;
    }
    std::vector<std::vector<Neighbor>> adj(rep->vertices.size());
    rep->edges.reserve(data.edges.size());
    for (const auto& e : data.edges) {
      const auto ui = *index_in(rep->vertices, e.u);
      const auto vi = *index_in(rep->vertices, e.v);
      adj[static_cast<std::size_t>(ui)].push_back({vi, e.weight});
      adj[static_cast<std::size_t>(vi)].push_back({ui, e.weight});
      rep->edges.push_back({std::min(ui, vi), std::max(ui, vi), e.weight});
    }
    std::sort(rep->edges.begin(), rep->edges.end(),
              [](const Edge& a, const Edge& b) {
                return std::tie(a.u, a.v) < std::tie(b.u, b.v);
              });
    rep->offsets.assign(rep->vertices.size() + 1, 0);
    for (std::size_t i = 0; i < adj.size(); ++i) {
      std::sort(adj[i].begin(), adj[i].end(),
                [](const Neighbor& a, const Neighbor& b) {
                  return a.index < b.index;
                });
      rep->offsets[i + 1] =
          rep->offsets[i] + static_cast<std::int64_t>(adj[i].size());
    }
    rep->neighbors.reserve(static_cast<std::size_t>(rep->offsets.back()));
    for (auto& list : adj)
      rep->neighbors.insert(rep->neighbors.end(), list.begin(), list.end());
    FiniteWeightedGraph g;
    g.rep_ = std::move(rep);
    return g;
  }

  std::size_t size() const { return rep_->vertices.size(); }
  const std::vector<VertexId>& vertices() const { return rep_->vertices; }
  const VertexId& vertex(std::int32_t i) const {
    return rep_->vertices[static_cast<std::size_t>(i)];
  }
  std::optional<std::int32_t> index_of(const VertexId& id) const {
    return index_in(rep_->vertices, id);
  }
  std::int32_t require_index(const VertexId& id) const {
    auto idx = index_of(id);
    if (!idx)
      throw std::invalid_argument("vertex " + id.str() + " is not in the graph");
    return *idx;
  }
  double measure(std::int32_t i) const {
    return rep_->measures[static_cast<std::size_t>(i)];
  }
  double total_measure() const {
    double s = 0.0;
    for (double m : rep_->measures) s += m;
    return s;
  }
  std::span<const Neighbor> neighbors(std::int32_t i) const {
    const auto a = static_cast<std::size_t>(rep_->offsets[static_cast<std::size_t>(i)]);
    const auto b =
        static_cast<std::size_t>(rep_->offsets[static_cast<std::size_t>(i) + 1]);
    return {rep_->neighbors.data() + a, b - a};
  }
  const std::vector<Edge>& edges() const { return rep_->edges; }
  std::size_t edge_count() const { return rep_->edges.size(); }
  double edge_weight(std::int32_t u, std::int32_t v) const {
    for (const auto& n : neighbors(u))
      if (n.index == v) return n.weight;
    return 0.0;
  }
  // sum of incident edge weights over the vertex measure
  double weighted_degree(std::int32_t i) const {
    double s = 0.0;
    for (const auto& n : neighbors(i)) s += n.weight;
    return s / measure(i);
  }

  bool same_rep(const FiniteWeightedGraph& other) const {
    return rep_ == other.rep_;
  }

 private:
  struct Rep {
    std::vector<VertexId> vertices;  // sorted
    std::vector<double> measures;
    std::vector<std::int64_t> offsets;
    std::vector<Neighbor> neighbors;
    std::vector<Edge> edges;  // u < v, sorted
  };

  static std::optional<std::int32_t> index_in(
      const std::vector<VertexId>& sorted, const VertexId& id) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
    if (it == sorted.end() || *it != id) return std::nullopt;
    return static_cast<std::int32_t>(it - sorted.begin());
  }

  std::shared_ptr<const Rep> rep_;
};

// A function on the vertices of a fixed graph, stored in vertex index order.
struct VertexFunction {
  FiniteWeightedGraph graph;
  std::vector<double> values;

  VertexFunction() = default;
  explicit VertexFunction(FiniteWeightedGraph g, double fill = 0.0)
      : graph(std::move(g)), values(graph.size(), fill) {}

  double& operator[](std::int32_t i) {
    return values[static_cast<std::size_t>(i)];
  }
  double operator[](std::int32_t i) const {
    return values[static_cast<std::size_t>(i)];
  }
  double at(const VertexId& id) const {
    return values[static_cast<std::size_t>(graph.require_index(id))];
  }
  double& at(const VertexId& id) {
    return values[static_cast<std::size_t>(graph.require_index(id))];
  }
};

// Measure-free net flux at a vertex: sum_y b(x,y) (f(x) - f(y)).
inline double laplacian_flux(const VertexFunction& f, std::int32_t x) {
  double s = 0.0;
  for (const auto& n : f.graph.neighbors(x))
    s += n.weight * (f[x] - f[n.index]);
  return s;
}

// Pointwise Laplacian (1/m(x)) sum_y b(x,y) (f(x) - f(y)).
inline VertexFunction apply_laplacian(const VertexFunction& f) {
  VertexFunction out(f.graph);
  for (std::int32_t x = 0; x < static_cast<std::int32_t>(f.graph.size()); ++x)
    out[x] = laplacian_flux(f, x) / f.graph.measure(x);
  return out;
}

// Energy form Q(f, g) = (1/2) sum_{x,y} b(x,y)(f(x)-f(y))(g(x)-g(y)),
// accumulated over undirected edges.
inline double energy(const VertexFunction& f, const VertexFunction& g) {
  if (!f.graph.same_rep(g.graph))
    throw std::invalid_argument("energy form requires functions on one graph");
  double s = 0.0;
  for (const auto& e : f.graph.edges())
    s += e.weight * (f[e.u] - f[e.v]) * (g[e.u] - g[e.v]);
  return s;
}
inline double energy(const VertexFunction& f) { return energy(f, f); }

// <f, g>_m = sum_x f(x) g(x) m(x)
inline double m_inner(const VertexFunction& f, const VertexFunction& g) {
  if (!f.graph.same_rep(g.graph))
    throw std::invalid_argument("inner product requires functions on one graph");
  double s = 0.0;
  for (std::int32_t x = 0; x < static_cast<std::int32_t>(f.graph.size()); ++x)
    s += f[x] * g[x] * f.graph.measure(x);
  return s;
}
inline double m_norm_sq(const VertexFunction& f) { return m_inner(f, f); }

inline std::pair<int, std::vector<std::int32_t>> connected_components(
    const FiniteWeightedGraph& g) {
  std::vector<std::int32_t> label(g.size(), -1);
  int count = 0;
  std::vector<std::int32_t> stack;
  for (std::int32_t start = 0; start < static_cast<std::int32_t>(g.size());
       ++start) {
    if (label[static_cast<std::size_t>(start)] != -1) continue;
    stack.push_back(start);
    label[static_cast<std::size_t>(start)] = count;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      for (const auto& n : g.neighbors(x)) {
        if (label[static_cast<std::size_t>(n.index)] == -1) {
          label[static_cast<std::size_t>(n.index)] = count;
          stack.push_back(n.index);
        }
      }
    }
    ++count;
  }
  return {count, std::move(label)};
}

// One infinite ray: x_1, x_2, ... attached to a core vertex.
// weights.value(0) is the attach edge (attach, x_1); weights.value(k) is the
// edge (x_k, x_{k+1}); measures.value(r) is the measure of x_r for r >= 1.
struct RaySpec {
  VertexId attach;
  SequenceRule weights;
  SequenceRule measures;
};

// Finite core plus infinite rays. All computations on it go through finite
// truncations; the rules make tail quantities certifiable in closed form.
class ExtendedGraph {
 public:
  ExtendedGraph(FiniteWeightedGraph core, std::vector<RaySpec> rays)
      : core_(std::move(core)), rays_(std::move(rays)) {
    for (const auto& r : rays_) {
      if (!core_.index_of(r.attach))
        throw std::invalid_argument("ray attaches at unknown vertex " +
                                    r.attach.str());
      if (r.attach.is_ray())
        throw std::invalid_argument("rays attach to core vertices only");
    }
  }
  static ExtendedGraph from_data(const GraphData& core,
                                 std::vector<RaySpec> rays) {
    return ExtendedGraph(FiniteWeightedGraph::from_data(core), std::move(rays));
  }

  const FiniteWeightedGraph& core() const { return core_; }
  const std::vector<RaySpec>& rays() const { return rays_; }
  std::size_t ray_count() const { return rays_.size(); }

  // Truncation at depth d: the core plus ray vertices x_1..x_d on each ray.
  // The outermost vertex x_d is the cut vertex where exhaustion solves
  // ground to zero; the edge (x_d, x_{d+1}) is dropped.
  FiniteWeightedGraph truncate(std::int64_t depth) const {
    if (depth < 1) throw std::invalid_argument("truncation depth must be >= 1");
    GraphData data;
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(core_.size()); ++i)
      data.vertex(core_.vertex(i), core_.measure(i));
    for (const auto& e : core_.edges())
      data.edge(core_.vertex(e.u), core_.vertex(e.v), e.weight);
    for (std::size_t ri = 0; ri < rays_.size(); ++ri) {
      const auto& ray = rays_[ri];
      const auto rid = static_cast<std::int32_t>(ri);
      for (std::int64_t k = 1; k <= depth; ++k)
        data.vertex(VertexId::ray(rid, k), ray.measures.value(k));
      data.edge(ray.attach, VertexId::ray(rid, 1), ray.weights.value(0));
      for (std::int64_t k = 1; k < depth; ++k)
        data.edge(VertexId::ray(rid, k), VertexId::ray(rid, k + 1),
                  ray.weights.value(k));
    }
    return FiniteWeightedGraph::from_data(data);
  }

  std::vector<VertexId> ray_cut_vertices(std::int64_t depth) const {
    std::vector<VertexId> cuts;
    cuts.reserve(rays_.size());
    for (std::size_t ri = 0; ri < rays_.size(); ++ri)
      cuts.push_back(VertexId::ray(static_cast<std::int32_t>(ri), depth));
    return cuts;
  }

  // Total measure of core plus all ray tails; divergent when any ray carries
  // infinite measure.
  TailSum total_measure() const {
    double core_sum = core_.total_measure();
    double err = 0.0;
    for (const auto& ray : rays_) {
      auto t = ray.measures.tail_sum(1);
      if (!t.finite()) return t;
      core_sum += t.value;
      err += t.error;
    }
    return TailSum::make_finite(core_sum, err + 16.0 *
                                                    std::numeric_limits<double>::epsilon() *
                                                    core_sum);
  }

 private:
  FiniteWeightedGraph core_;
  std::vector<RaySpec> rays_;
};

}  // namespace netpot
