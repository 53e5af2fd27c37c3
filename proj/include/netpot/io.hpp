#pragma once

// Graph documents: a structured text format for graphs with ray extensions.
//
// A document is a JSON object
//   {"vertices": [{"id": .., "m": ..}, ...],
//    "edges":    [{"u": .., "v": .., "b": ..}, ...],
//    "rays":     [{"id": .., "attach": .., "weights": RULE, "measures": RULE}]}
// where a RULE is one of
//   {"kind": "geometric", "first": F, "ratio": R}        value(k) = F R^k
//   {"kind": "power", "coeff": C, "exponent": E}         value(k) = C (k+1)^E
//   {"kind": "table", "values": [..], "tail": RULE}      prefix, then the tail
// (table tails do not nest). Vertex ids are integers or strings; ray ids are
// positional. Checking a document lists every violation, not just the first.
//
// Serialization is canonical: vertices sorted by id, edges oriented and
// sorted with u < v, rays in positional order, two-space indentation, and
// shortest round-trip number formatting — so saving a loaded canonical
// document reproduces it byte for byte.

#include <netpot/graph.hpp>
#include <netpot/sequence.hpp>

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netpot {

namespace detail {

inline nlohmann::ordered_json vertex_id_json(const VertexId& id) {
  if (const auto* i = id.as_int()) return *i;
  if (const auto* s = id.as_string()) return *s;
  throw std::logic_error("ray vertices never appear in graph documents");
}

}  // namespace detail

// Canonical JSON encoding of a rule. Geometric-tailed rules serialize from
// their exact tail data, power-tailed rules from theirs; a table prefix is
// written out explicitly. Rules that merely alias a geometric sequence
// (constant tables, exponent-zero powers) normalize to the geometric form.
inline nlohmann::ordered_json rule_to_json(const SequenceRule& rule) {
  using json = nlohmann::ordered_json;
  json tail;
  std::int64_t prefix = 0;
  if (const auto g = rule.geometric_tail()) {
    prefix = g->offset;
    tail = json{{"kind", "geometric"}, {"first", g->first}, {"ratio", g->ratio}};
  } else {
    const auto p = rule.power_tail();  // every rule has one of the two tails
    prefix = p->offset;
    tail = json{{"kind", "power"},
                {"coeff", p->coeff},
                {"exponent", p->exponent}};
  }
  if (prefix == 0) return tail;
  json values = json::array();
  for (std::int64_t k = 0; k < prefix; ++k) values.push_back(rule.value(k));
  return json{{"kind", "table"}, {"values", std::move(values)}, {"tail", std::move(tail)}};
}

// Canonical JSON encoding of a whole graph with its rays.
inline nlohmann::ordered_json graph_to_json(const ExtendedGraph& e) {
  using json = nlohmann::ordered_json;
  const auto& core = e.core();
  json vertices = json::array();
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(core.size()); ++i)
    vertices.push_back(json{{"id", detail::vertex_id_json(core.vertex(i))},
                            {"m", core.measure(i)}});
  json edges = json::array();
  for (const auto& edge : core.edges())
    edges.push_back(json{{"u", detail::vertex_id_json(core.vertex(edge.u))},
                         {"v", detail::vertex_id_json(core.vertex(edge.v))},
                         {"b", edge.weight}});
  json rays = json::array();
  for (std::size_t ri = 0; ri < e.rays().size(); ++ri) {
    const auto& ray = e.rays()[ri];
    rays.push_back(json{{"id", static_cast<std::int64_t>(ri)},
                        {"attach", detail::vertex_id_json(ray.attach)},
                        {"weights", rule_to_json(ray.weights)},
                        {"measures", rule_to_json(ray.measures)}});
  }
  return json{{"vertices", std::move(vertices)},
              {"edges", std::move(edges)},
              {"rays", std::move(rays)}};
}

inline std::string save_graph(const ExtendedGraph& e) {
  return graph_to_json(e).dump(2) + "\n";
}

// Outcome of checking a document: either a graph, or every problem found.
struct DocumentCheck {
  std::vector<std::string> problems;
  std::optional<ExtendedGraph> graph;
  bool ok() const { return problems.empty(); }
};

namespace detail {

inline bool json_is_integer(const nlohmann::json& j) {
  return j.is_number_integer() || j.is_number_unsigned();
}

inline std::optional<VertexId> vertex_id_from_json(
    const nlohmann::json& j, const std::string& where,
    std::vector<std::string>& problems) {
  if (json_is_integer(j)) return VertexId::core(j.get<std::int64_t>());
  if (j.is_string()) return VertexId::core(j.get<std::string>());
  problems.push_back(where + " must be an integer or a string");
  return std::nullopt;
}

inline std::optional<double> number_from_json(const nlohmann::json& j,
                                              const std::string& where,
                                              std::vector<std::string>& problems) {
  if (j.is_number()) return j.get<double>();
  problems.push_back(where + " must be a number");
  return std::nullopt;
}

inline void flag_unknown_keys(const nlohmann::json& obj,
                              std::initializer_list<const char*> known,
                              const std::string& where,
                              std::vector<std::string>& problems) {
  for (const auto& item : obj.items()) {
    bool found = false;
    for (const char* k : known)
      if (item.key() == k) found = true;
    if (!found)
      problems.push_back(where + " carries an unexpected key \"" + item.key() +
                         "\"");
  }
}

inline std::optional<SequenceRule> rule_from_json(
    const nlohmann::json& j, const std::string& where,
    std::vector<std::string>& problems, bool allow_table = true) {
  const auto before = problems.size();
  auto fail = [&](const std::string& msg) {
    problems.push_back(where + ": " + msg);
    return std::optional<SequenceRule>{};
  };
  if (!j.is_object()) return fail("a rule is an object carrying a \"kind\"");
  if (!j.contains("kind") || !j.at("kind").is_string())
    return fail("a rule carries a string \"kind\"");
  const auto kind = j.at("kind").get<std::string>();
  try {
    if (kind == "geometric") {
      flag_unknown_keys(j, {"kind", "first", "ratio"}, where, problems);
      if (!j.contains("first") || !j.contains("ratio"))
        return fail("a geometric rule carries \"first\" and \"ratio\"");
      const auto first = number_from_json(j.at("first"), where + ": first", problems);
      const auto ratio = number_from_json(j.at("ratio"), where + ": ratio", problems);
      if (problems.size() != before) return std::nullopt;
      return SequenceRule::geometric(*first, *ratio);
    }
    if (kind == "power") {
      flag_unknown_keys(j, {"kind", "coeff", "exponent"}, where, problems);
      if (!j.contains("coeff") || !j.contains("exponent"))
        return fail("a power rule carries \"coeff\" and \"exponent\"");
      const auto coeff = number_from_json(j.at("coeff"), where + ": coeff", problems);
      const auto exponent =
          number_from_json(j.at("exponent"), where + ": exponent", problems);
      if (problems.size() != before) return std::nullopt;
      return SequenceRule::power(*coeff, *exponent);
    }
    if (kind == "table") {
      if (!allow_table) return fail("table tails do not nest");
      flag_unknown_keys(j, {"kind", "values", "tail"}, where, problems);
      if (!j.contains("values") || !j.at("values").is_array())
        return fail("a table rule carries a \"values\" list");
      if (!j.contains("tail"))
        return fail("a table rule carries a \"tail\" rule");
      std::vector<double> values;
      for (std::size_t i = 0; i < j.at("values").size(); ++i) {
        const auto v = number_from_json(
            j.at("values")[i], where + ": values[" + std::to_string(i) + "]",
            problems);
        if (v) values.push_back(*v);
      }
      const auto tail = rule_from_json(j.at("tail"), where + ": tail", problems,
                                       /*allow_table=*/false);
      if (problems.size() != before || !tail) return std::nullopt;
      // re-expressing the parsed tail: it is geometric or power by construction
      if (const auto g = tail->geometric_tail())
        return SequenceRule::table(std::move(values),
                                   Geometric{g->first, g->ratio});
      const auto p = tail->power_tail();
      return SequenceRule::table(std::move(values),
                                 Power{p->coeff, p->exponent});
    }
    return fail("unknown rule kind \"" + kind +
                "\"; use geometric, power, or table");
  } catch (const std::invalid_argument& e) {
    return fail(e.what());
  }
}

}  // namespace detail

// Parses and validates a document, collecting every problem: malformed JSON
// (with the parser's line/column diagnostics), structural mistakes, and every
// graph-level violation (duplicate entries with both positions, nonpositive
// weights or measures, self loops, unknown endpoints, bad ray attachments).
inline DocumentCheck check_document(const std::string& text) {
  DocumentCheck out;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    out.problems.emplace_back(e.what());
    return out;
  }
  if (!doc.is_object()) {
    out.problems.emplace_back("the document root must be an object");
    return out;
  }
  detail::flag_unknown_keys(doc, {"vertices", "edges", "rays"},
                            "the document root", out.problems);

  GraphData data;
  if (!doc.contains("vertices") || !doc.at("vertices").is_array()) {
    out.problems.emplace_back("the document carries a \"vertices\" list");
  } else {
    for (std::size_t i = 0; i < doc.at("vertices").size(); ++i) {
      const auto& vj = doc.at("vertices")[i];
      const std::string where = "vertex entry " + std::to_string(i);
      if (!vj.is_object()) {
        out.problems.push_back(where + " must be an object");
        continue;
      }
      detail::flag_unknown_keys(vj, {"id", "m"}, where, out.problems);
      if (!vj.contains("id") || !vj.contains("m")) {
        out.problems.push_back(where + " carries \"id\" and \"m\"");
        continue;
      }
      const auto id =
          detail::vertex_id_from_json(vj.at("id"), where + ": id", out.problems);
      const auto m =
          detail::number_from_json(vj.at("m"), where + ": m", out.problems);
      if (id && m) data.vertex(*id, *m);
    }
  }
  if (doc.contains("edges")) {
    if (!doc.at("edges").is_array()) {
      out.problems.emplace_back("\"edges\" must be a list");
    } else {
      for (std::size_t i = 0; i < doc.at("edges").size(); ++i) {
        const auto& ej = doc.at("edges")[i];
        const std::string where = "edge entry " + std::to_string(i);
        if (!ej.is_object()) {
          out.problems.push_back(where + " must be an object");
          continue;
        }
        detail::flag_unknown_keys(ej, {"u", "v", "b"}, where, out.problems);
        if (!ej.contains("u") || !ej.contains("v") || !ej.contains("b")) {
          out.problems.push_back(where + " carries \"u\", \"v\", and \"b\"");
          continue;
        }
        const auto u =
            detail::vertex_id_from_json(ej.at("u"), where + ": u", out.problems);
        const auto v =
            detail::vertex_id_from_json(ej.at("v"), where + ": v", out.problems);
        const auto b =
            detail::number_from_json(ej.at("b"), where + ": b", out.problems);
        if (u && v && b) data.edge(*u, *v, *b);
      }
    }
  }
  std::vector<RaySpec> rays;
  bool rays_complete = true;
  if (doc.contains("rays")) {
    if (!doc.at("rays").is_array()) {
      out.problems.emplace_back("\"rays\" must be a list");
      rays_complete = false;
    } else {
      for (std::size_t i = 0; i < doc.at("rays").size(); ++i) {
        const auto& rj = doc.at("rays")[i];
        const std::string where = "ray entry " + std::to_string(i);
        if (!rj.is_object()) {
          out.problems.push_back(where + " must be an object");
          rays_complete = false;
          continue;
        }
        detail::flag_unknown_keys(rj, {"id", "attach", "weights", "measures"},
                                  where, out.problems);
        if (!rj.contains("id") || !rj.contains("attach") ||
            !rj.contains("weights") || !rj.contains("measures")) {
          out.problems.push_back(
              where + " carries \"id\", \"attach\", \"weights\", and \"measures\"");
          rays_complete = false;
          continue;
        }
        if (!detail::json_is_integer(rj.at("id")) ||
            rj.at("id").get<std::int64_t>() != static_cast<std::int64_t>(i)) {
          out.problems.push_back(where + ": ray ids are positional; this entry's id must be " +
                                 std::to_string(i));
        }
        const auto attach = detail::vertex_id_from_json(
            rj.at("attach"), where + ": attach", out.problems);
        const auto weights = detail::rule_from_json(rj.at("weights"),
                                                    where + ": weights",
                                                    out.problems);
        const auto measures = detail::rule_from_json(rj.at("measures"),
                                                     where + ": measures",
                                                     out.problems);
        if (attach && weights && measures) {
          rays.push_back(RaySpec{*attach, *weights, *measures});
        } else {
          rays_complete = false;
        }
      }
    }
  }

  for (const auto& p : validate(data).problems) out.problems.push_back(p);
  if (rays_complete) {
    for (std::size_t i = 0; i < rays.size(); ++i) {
      bool known = false;
      for (const auto& entry : data.measures)
        if (entry.vertex == rays[i].attach) known = true;
      if (!known)
        out.problems.push_back("ray entry " + std::to_string(i) +
                               " attaches at unknown vertex " +
                               rays[i].attach.str());
    }
  }
  if (!out.problems.empty()) return out;

  try {
    out.graph = ExtendedGraph::from_data(data, std::move(rays));
  } catch (const std::invalid_argument& e) {
    out.problems.emplace_back(e.what());
  }
  return out;
}

inline ExtendedGraph load_graph(const std::string& text) {
  auto check = check_document(text);
  if (!check.graph) {
    std::string msg = "invalid graph document:";
    for (const auto& p : check.problems) msg += "\n  - " + p;
    throw std::invalid_argument(msg);
  }
  return *std::move(check.graph);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline ExtendedGraph load_graph_file(const std::string& path) {
  return load_graph(read_text_file(path));
}

inline void save_graph_file(const ExtendedGraph& e, const std::string& path) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw std::invalid_argument("cannot write " + path);
  outf << save_graph(e);
  outf.flush();
  if (!outf) throw std::invalid_argument("cannot write " + path);
}

}  // namespace netpot
