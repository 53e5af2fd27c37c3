#pragma once

// Command line front end. Every analysis subcommand loads a graph document,
// runs one pipeline, and emits a run report (structured JSON or plot-ready
// tabular series). Exit codes: 0 success, 1 validation or input failure,
// 2 non-convergence within the requested budget, 3 usage error.

#include <CLI11.hpp>

#include <netpot/scenarios.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

namespace netpot::cli {
namespace detail {

// Raised when an exhaustion fails to stabilize inside the requested budget;
// mapped to exit code 2.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Core vertex ids on the command line: an integer token is an integer id,
// anything else is a string id.
inline VertexId parse_vertex(const std::string& s) {
  std::int64_t n = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [p, ec] = std::from_chars(first, last, n);
  if (ec == std::errc() && p == last) return VertexId::core(n);
  return VertexId::core(s);
}

inline void emit(const nlohmann::ordered_json& report, const std::string& format,
                 const std::string& out_path, std::ostream& out) {
  const auto text = render_report(report, parse_report_format(format));
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  f << text;
  f.flush();
  if (!f) throw std::invalid_argument("cannot write report to " + out_path);
}

inline void echo_graph(RunReport& r, const std::string& file,
                       const ExtendedGraph& e) {
  r.inputs()["file"] = file;
  r.inputs()["graph_document"] = graph_to_json(e);
}

inline void describe_spectral(const SpectralEstimate& s, RunReport& r) {
  r.verdict("lambda0", netpot::detail::spectral_word(s.verdict));
  if (!s.depths.empty()) {
    r.results()["lambda0"] =
        numeric_claim(s.estimate, s.stabilization_gap, s.depths.back());
    r.trace("lambda0-exhaustion", s.depths, s.lambda0);
  }
  for (const auto& w : s.witnesses) {
    r.trace("rayleigh-ray" + std::to_string(w.ray) + "-" + w.family, w.sizes,
            w.quotients);
    r.note("vanishing witness family on ray " + std::to_string(w.ray) + ": " +
           w.certificate);
  }
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{
      "netpot: potential theory on weighted graphs whose ends are rays — "
      "exhaustion potentials, capacities, spectral gaps, uniqueness "
      "diagnostics, excision surgery, and path metrics"};
  app.require_subcommand(1);

  const std::vector<std::string> formats{"structured", "tabular-series"};

  // --- validate ------------------------------------------------------------
  std::string v_file, v_out;
  auto* v_cmd = app.add_subcommand(
      "validate", "check a graph document and optionally write its canonical form");
  v_cmd->add_option("file", v_file, "graph document")->required();
  v_cmd->add_option("--out", v_out, "write the canonical document here");

  // --- green ---------------------------------------------------------------
  std::string g_file, g_pole, g_out, g_format = "structured";
  double g_tol = 1e-8;
  std::int64_t g_depth = 64;
  auto* g_cmd = app.add_subcommand(
      "green", "grounded potential of a unit source, exhaustion and limit");
  g_cmd->add_option("file", g_file, "graph document")->required();
  g_cmd->add_option("--pole", g_pole, "core vertex carrying the source")->required();
  g_cmd->add_option("--depth", g_depth, "truncation depth")->check(CLI::Range(std::int64_t{1}, std::int64_t{100000}));
  g_cmd->add_option("--tol", g_tol, "convergence tolerance");
  g_cmd->add_option("--format", g_format, "report format")->check(CLI::IsMember(formats));
  g_cmd->add_option("--out", g_out, "write the report here");

  // --- capacity ------------------------------------------------------------
  std::string c_file, c_out, c_format = "structured";
  std::vector<std::string> c_at;
  double c_tol = 1e-8;
  std::int64_t c_max_depth = 64;
  auto* c_cmd = app.add_subcommand(
      "capacity", "capacity of a core vertex set along the exhaustion");
  c_cmd->add_option("file", c_file, "graph document")->required();
  c_cmd->add_option("--at", c_at, "core vertex in the set (repeatable)")->required();
  c_cmd->add_option("--max-depth", c_max_depth, "deepest truncation")->check(CLI::Range(std::int64_t{1}, std::int64_t{100000}));
  c_cmd->add_option("--tol", c_tol, "convergence tolerance");
  c_cmd->add_option("--format", c_format, "report format")->check(CLI::IsMember(formats));
  c_cmd->add_option("--out", c_out, "write the report here");

  // --- lambda0 ---------------------------------------------------------------
  std::string l_file, l_out, l_format = "structured";
  double l_tol = 1e-7;
  std::int64_t l_max_depth = 64;
  auto* l_cmd = app.add_subcommand(
      "lambda0", "bottom of the spectrum: exhaustion estimate and verdict");
  l_cmd->add_option("file", l_file, "graph document")->required();
  l_cmd->add_option("--max-depth", l_max_depth, "deepest truncation")->check(CLI::Range(std::int64_t{2}, std::int64_t{100000}));
  l_cmd->add_option("--tol", l_tol, "stabilization tolerance");
  l_cmd->add_option("--format", l_format, "report format")->check(CLI::IsMember(formats));
  l_cmd->add_option("--out", l_out, "write the report here");

  // --- classify-ray ----------------------------------------------------------
  std::string y_file, y_out, y_format = "structured";
  int y_ray = 0;
  auto* y_cmd = app.add_subcommand(
      "classify-ray", "tail sums and uniqueness-relevant flags of one ray");
  y_cmd->add_option("file", y_file, "graph document")->required();
  y_cmd->add_option("--ray", y_ray, "ray index")->required();
  y_cmd->add_option("--format", y_format, "report format")->check(CLI::IsMember(formats));
  y_cmd->add_option("--out", y_out, "write the report here");

  // --- diagnose --------------------------------------------------------------
  std::string d_file, d_out, d_format = "structured";
  double d_tol = 1e-7, d_lambda = -1.0;
  std::int64_t d_max_depth = 64;
  auto* d_cmd = app.add_subcommand(
      "diagnose",
      "full uniqueness diagnostic: spectrum, measure, Liouville, "
      "self-adjointness, implications");
  d_cmd->add_option("file", d_file, "graph document")->required();
  d_cmd->add_option("--max-depth", d_max_depth, "deepest truncation")->check(CLI::Range(std::int64_t{2}, std::int64_t{100000}));
  d_cmd->add_option("--tol", d_tol, "verdict tolerance");
  d_cmd->add_option("--lambda", d_lambda, "negative eigenvalue probed by the witness")->check(CLI::Range(-1e9, -1e-12));
  d_cmd->add_option("--format", d_format, "report format")->check(CLI::IsMember(formats));
  d_cmd->add_option("--out", d_out, "write the report here");

  // --- surgery ---------------------------------------------------------------
  std::string s_file, s_center, s_out, s_format = "structured";
  double s_tol = 1e-10, s_partition_tol = 1e-6;
  std::int64_t s_depth = 64;
  auto* s_cmd = app.add_subcommand(
      "surgery",
      "excise a core vertex, attach replacement rays (attach weight 2, then "
      "quadrupling, against halving measures), continue the potential, and "
      "certify the square-summable non-constant harmonic function");
  s_cmd->add_option("file", s_file, "graph document")->required();
  s_cmd->add_option("--center", s_center, "core vertex to excise")->required();
  s_cmd->add_option("--depth", s_depth, "truncation depth")->check(CLI::Range(std::int64_t{2}, std::int64_t{100000}));
  s_cmd->add_option("--tol", s_tol, "interior residual tolerance");
  s_cmd->add_option("--partition-tol", s_partition_tol,
                    "potential gap separating ray targets from pendant targets");
  s_cmd->add_option("--format", s_format, "report format")->check(CLI::IsMember(formats));
  s_cmd->add_option("--out", s_out, "write the report here");

  // --- metric ----------------------------------------------------------------
  std::string m_file, m_out, m_format = "structured";
  auto* m_cmd = app.add_subcommand(
      "metric",
      "degree path metric: intrinsic check, ray lengths, completeness verdict");
  m_cmd->add_option("file", m_file, "graph document")->required();
  m_cmd->add_option("--format", m_format, "report format")->check(CLI::IsMember(formats));
  m_cmd->add_option("--out", m_out, "write the report here");

  // --- scenario --------------------------------------------------------------
  std::string n_name, n_out, n_format = "structured";
  ScenarioOptions n_opt;
  auto* n_cmd = app.add_subcommand("scenario", "run a named demonstration pipeline");
  n_cmd->add_option("name", n_name, "scenario name")
      ->required()
      ->check(CLI::IsMember(scenario_names()));
  n_cmd->add_option("--tol", n_opt.tol, "convergence and verdict tolerance");
  n_cmd->add_option("--depth", n_opt.depth, "truncation depth")->check(CLI::Range(std::int64_t{8}, std::int64_t{100000}));
  n_cmd->add_option("--max-depth", n_opt.max_depth, "deepest truncation")->check(CLI::Range(std::int64_t{8}, std::int64_t{100000}));
  n_cmd->add_option("--format", n_format, "report format")->check(CLI::IsMember(formats));
  n_cmd->add_option("--out", n_out, "write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (*v_cmd) {
      const auto chk = check_document(read_text_file(v_file));
      if (!chk.ok()) {
        for (const auto& p : chk.problems) err << p << "\n";
        return 1;
      }
      const auto& e = *chk.graph;
      out << "ok: " << e.core().size() << " vertices, "
          << e.core().edges().size() << " edges, " << e.rays().size()
          << " rays\n";
      if (!v_out.empty()) save_graph_file(e, v_out);
      return 0;
    }

    if (*g_cmd) {
      const auto e = load_graph_file(g_file);
      const auto pole = detail::parse_vertex(g_pole);
      RunReport r("green");
      detail::echo_graph(r, g_file, e);
      r.inputs()["pole"] = pole.str();
      r.inputs()["tol"] = g_tol;
      r.inputs()["depth"] = g_depth;
      const auto g = green_function(e, pole, g_tol, g_depth);
      r.verdict("potential", g.transient ? "finite-limit" : "divergent");
      r.verdict("trace", netpot::detail::trace_word(g.trace.verdict));
      r.trace("green-at-pole", g.trace.depths, g.trace.values);
      if (g.transient) {
        r.results()["value_at_pole"] =
            numeric_claim(g.trace.limit, g.trace.certified_error, g.depth);
        r.results()["sup_gap_at_depth"] =
            numeric_claim(g.sup_gap, g.certified_error, g.depth);
        nlohmann::ordered_json tails = nlohmann::ordered_json::array();
        for (const auto& t : g.ray_tails) {
          nlohmann::ordered_json tj;
          tj["ray"] = t.ray;
          tj["current_into_ray"] = t.current;
          tj["value_at_attach"] =
              numeric_claim(t.value_at_attach, g.certified_error, g.depth);
          tj["resistance_total"] = t.resistance_total;
          tails.push_back(std::move(tj));
        }
        r.results()["ray_tails"] = std::move(tails);
        r.results()["l2_norm_squared"] = tail_claim(green_l2(e, g), g.depth);
      }
      detail::emit(r.finish(), g_format, g_out, out);
      return g.transient &&
                     g.trace.verdict != ConvergenceTrace::Verdict::Converged
                 ? 2
                 : 0;
    }

    if (*c_cmd) {
      const auto e = load_graph_file(c_file);
      std::vector<VertexId> omega;
      for (const auto& s : c_at) omega.push_back(detail::parse_vertex(s));
      RunReport r("capacity");
      detail::echo_graph(r, c_file, e);
      nlohmann::ordered_json set = nlohmann::ordered_json::array();
      for (const auto& id : omega) set.push_back(id.str());
      r.inputs()["at"] = std::move(set);
      r.inputs()["tol"] = c_tol;
      r.inputs()["max_depth"] = c_max_depth;
      const auto c = capacity(e, omega, c_tol, c_max_depth);
      r.verdict("capacity", c.transient ? "positive" : "zero");
      r.verdict("trace", netpot::detail::trace_word(c.trace.verdict));
      r.trace("capacity-exhaustion", c.trace.depths, c.trace.values);
      r.results()["capacity"] =
          numeric_claim(c.value, c.certified_error, c.trace.depths.back());
      detail::emit(r.finish(), c_format, c_out, out);
      return c.transient &&
                     c.trace.verdict != ConvergenceTrace::Verdict::Converged
                 ? 2
                 : 0;
    }

    if (*l_cmd) {
      const auto e = load_graph_file(l_file);
      RunReport r("lambda0");
      detail::echo_graph(r, l_file, e);
      r.inputs()["tol"] = l_tol;
      r.inputs()["max_depth"] = l_max_depth;
      const auto s = strict_positivity_verdict(e, l_tol, l_max_depth);
      detail::describe_spectral(s, r);
      detail::emit(r.finish(), l_format, l_out, out);
      return s.verdict == SpectralVerdict::Undetermined ? 2 : 0;
    }

    if (*y_cmd) {
      const auto e = load_graph_file(y_file);
      if (y_ray < 0 || y_ray >= static_cast<int>(e.rays().size()))
        throw std::invalid_argument(
            "no ray with index " + std::to_string(y_ray) + "; the graph has " +
            std::to_string(e.rays().size()) + " rays");
      RunReport r("classify-ray");
      detail::echo_graph(r, y_file, e);
      r.inputs()["ray"] = y_ray;
      const auto c = classify_ray(e.rays()[static_cast<std::size_t>(y_ray)]);
      r.verdict("weighted_resistance_mass", netpot::detail::measure_word(c.imw));
      r.results()["sum_inverse_weights"] = tail_claim(c.sum_inv_b, 0);
      r.results()["sum_measures"] = tail_claim(c.sum_m, 0);
      r.results()["weighted_resistance_mass"] = tail_claim(c.imw, 0);
      r.results()["bounded_nonconstant_harmonic_possible"] =
          c.bounded_nonconstant_harmonic_possible;
      r.results()["l2_nonconstant_extension_possible"] =
          c.l2_nonconstant_extension_possible;
      r.results()["esa_fails_on_ray"] = c.esa_fails_on_ray;
      detail::emit(r.finish(), y_format, y_out, out);
      return 0;
    }

    if (*d_cmd) {
      const auto e = load_graph_file(d_file);
      RunReport r("diagnose");
      detail::echo_graph(r, d_file, e);
      r.inputs()["tol"] = d_tol;
      r.inputs()["max_depth"] = d_max_depth;
      r.inputs()["lambda"] = d_lambda;
      DiagnoseOptions dopt;
      dopt.tol = d_tol;
      dopt.max_depth = d_max_depth;
      dopt.lambda = d_lambda;
      const auto d = diagnose(e, dopt);
      describe_diagnostic(d, r);
      detail::emit(r.finish(), d_format, d_out, out);
      return 0;
    }

    if (*s_cmd) {
      const auto e = load_graph_file(s_file);
      const auto center = detail::parse_vertex(s_center);
      RunReport r("surgery");
      detail::echo_graph(r, s_file, e);
      r.inputs()["center"] = center.str();
      r.inputs()["tol"] = s_tol;
      r.inputs()["partition_tol"] = s_partition_tol;
      r.inputs()["depth"] = s_depth;
      const auto g = green_function(e, center, 1e-8, s_depth);
      if (g.transient &&
          g.trace.verdict != ConvergenceTrace::Verdict::Converged)
        throw detail::NonConvergence(
            "the potential did not stabilize at depth " +
            std::to_string(s_depth) + "; raise --depth");
      const auto part = partition_neighbors(e, center, g, s_partition_tol);
      std::map<VertexId, NewRayRule> rules;
      for (const auto& target : part.ray_targets)
        rules.emplace(target,
                      NewRayRule{SequenceRule::table({2.0}, Geometric{4.0, 4.0})});
      const auto s = excise_and_attach(e, part, rules);
      r.inputs()["surgered_graph_document"] = graph_to_json(s.graph);
      SurgeredGreen go;
      try {
        go = extend_green(g, s, s_depth);
      } catch (const std::runtime_error& ex) {
        throw detail::NonConvergence(ex.what());
      }
      const auto rep = verify_surgery(s, go, s_depth, s_tol);
      r.verdict("theorem_conclusion", rep.theorem_conclusion ? "true" : "false");
      r.results()["theorem_conclusion"] = rep.theorem_conclusion;
      r.results()["interior_residual"] =
          numeric_claim(rep.max_interior_residual, rep.tol, rep.depth);
      r.results()["l2_norm_with_tail"] =
          tail_claim(rep.l2_norm_with_tail, rep.depth);
      if (rep.nonconstant_component)
        r.results()["nonconstant_component"] = *rep.nonconstant_component;
      r.results()["removed_vertex"] = s.removed.str();
      nlohmann::ordered_json new_rays = nlohmann::ordered_json::array();
      for (const int ri : s.new_rays) new_rays.push_back(ri);
      r.results()["replacement_rays"] = std::move(new_rays);
      nlohmann::ordered_json pendants = nlohmann::ordered_json::array();
      for (const auto& p : s.pendants) pendants.push_back(p.str());
      r.results()["pendants"] = std::move(pendants);
      r.trace("green-at-pole", g.trace.depths, g.trace.values);
      for (const int ri : s.new_rays) {
        const auto& profile = go.rays[static_cast<std::size_t>(ri)];
        const auto along =
            profile_values(s.graph.rays()[static_cast<std::size_t>(ri)], profile,
                           12);
        std::vector<std::int64_t> ds;
        std::vector<double> vs;
        for (std::size_t i = 0; i < along.size(); ++i) {
          ds.push_back(static_cast<std::int64_t>(i) + 1);
          vs.push_back(along[i]);
        }
        r.trace("continued-values-ray" + std::to_string(ri), ds, vs);
      }
      detail::emit(r.finish(), s_format, s_out, out);
      return 0;
    }

    if (*m_cmd) {
      const auto e = load_graph_file(m_file);
      RunReport r("metric");
      detail::echo_graph(r, m_file, e);
      const auto lf = degree_length(e);
      const auto verdict = completeness_verdict(e, lf);
      describe_completeness(e, verdict, r);
      nlohmann::ordered_json rules = nlohmann::ordered_json::array();
      for (const auto& rule : lf.rays) rules.push_back(rule_to_json(rule));
      r.results()["ray_length_rules"] = std::move(rules);
      nlohmann::ordered_json core_lengths = nlohmann::ordered_json::array();
      const auto& core = e.core();
      for (std::size_t i = 0; i < core.edges().size(); ++i) {
        const auto& edge = core.edges()[i];
        nlohmann::ordered_json ej;
        ej["u"] = core.vertex(edge.u).str();
        ej["v"] = core.vertex(edge.v).str();
        ej["length"] = lf.core[i];
        core_lengths.push_back(std::move(ej));
      }
      r.results()["core_edge_lengths"] = std::move(core_lengths);
      detail::emit(r.finish(), m_format, m_out, out);
      return 0;
    }

    if (*n_cmd) {
      const auto rep = run_scenario(n_name, n_opt);
      detail::emit(rep, n_format, n_out, out);
      return 0;
    }
  } catch (const detail::NonConvergence& ex) {
    err << "netpot: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    err << "netpot: " << ex.what() << "\n";
    return 1;
  }
  return 3;
}

}  // namespace netpot::cli
