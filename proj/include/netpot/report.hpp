#pragma once

// Run reports: the structured record of one command run. A report carries an
// echo of the inputs, named results, verdict strings, convergence traces as
// (depth, value) pairs, the list of applied implications, free-form notes,
// and the wall-clock time, under a versioned schema.
//
// Every numeric claim in a report travels as {"value", "tolerance", "depth"}:
// the tolerance is the certified uncertainty of the value (or the threshold
// it was checked against, when the value is itself a defect measure), and the
// depth is the truncation it was computed at (0 for closed forms and direct
// finite solves).
//
// Two renderings: "structured" is the whole report; "tabular-series" emits
// one plot-ready block per trace, a "# name" header followed by tab-separated
// depth/value rows. A direct finite solve contributes a single-row trace.

#include <netpot/sequence.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netpot {

inline nlohmann::ordered_json numeric_claim(double value, double tolerance,
                                            std::int64_t depth) {
  return nlohmann::ordered_json{{"value", value},
                                {"tolerance", tolerance},
                                {"depth", depth}};
}

// Claim form of a certified tail sum: finite sums carry their value with the
// certified error as the tolerance; divergent and not-computable sums carry
// their kind (and reason) instead of a number.
inline nlohmann::ordered_json tail_claim(const TailSum& t, std::int64_t depth) {
  using json = nlohmann::ordered_json;
  if (t.finite()) {
    auto claim = numeric_claim(t.value, t.error, depth);
    claim["kind"] = "finite";
    return claim;
  }
  if (t.divergent()) return json{{"kind", "divergent"}};
  return json{{"kind", "not-computable"}, {"reason", t.reason}};
}

class RunReport {
 public:
  explicit RunReport(std::string operation)
      : start_(std::chrono::steady_clock::now()) {
    doc_["schema"] = 1;
    doc_["operation"] = std::move(operation);
    doc_["inputs"] = nlohmann::ordered_json::object();
    doc_["results"] = nlohmann::ordered_json::object();
    doc_["verdicts"] = nlohmann::ordered_json::object();
    doc_["traces"] = nlohmann::ordered_json::array();
    doc_["implications_applied"] = nlohmann::ordered_json::array();
    doc_["notes"] = nlohmann::ordered_json::array();
  }

  nlohmann::ordered_json& inputs() { return doc_["inputs"]; }
  nlohmann::ordered_json& results() { return doc_["results"]; }

  void verdict(const std::string& name, const std::string& value) {
    doc_["verdicts"][name] = value;
  }
  void implication(const std::string& name) {
    doc_["implications_applied"].push_back(name);
  }
  void note(const std::string& text) { doc_["notes"].push_back(text); }

  void trace(const std::string& name, const std::vector<std::int64_t>& depths,
             const std::vector<double>& values) {
    if (depths.size() != values.size())
      throw std::invalid_argument("trace columns must have equal length");
    if (depths.empty())
      throw std::invalid_argument(
          "a trace carries at least one row; direct solves contribute a "
          "single row at depth 0");
    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < depths.size(); ++i)
      points.push_back(nlohmann::ordered_json{{"depth", depths[i]},
                                              {"value", values[i]}});
    doc_["traces"].push_back(
        nlohmann::ordered_json{{"name", name}, {"points", std::move(points)}});
  }

  // Single-row trace for a quantity obtained by one direct solve.
  void direct_trace(const std::string& name, double value) {
    trace(name, {0}, {value});
  }

  // Stamps the elapsed wall-clock time and hands out the finished report.
  nlohmann::ordered_json finish() {
    const auto elapsed = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - start_);
    doc_["wall_clock_ms"] = elapsed.count();
    return doc_;
  }

 private:
  nlohmann::ordered_json doc_;
  std::chrono::steady_clock::time_point start_;
};

enum class ReportFormat { Structured, TabularSeries };

inline ReportFormat parse_report_format(const std::string& name) {
  if (name == "structured") return ReportFormat::Structured;
  if (name == "tabular-series") return ReportFormat::TabularSeries;
  throw std::invalid_argument("unknown report format \"" + name +
                              "\"; use structured or tabular-series");
}

inline std::string render_report(const nlohmann::ordered_json& report,
                                 ReportFormat format) {
  if (format == ReportFormat::Structured) return report.dump(2) + "\n";
  std::string out;
  for (const auto& t : report.at("traces")) {
    if (!out.empty()) out += "\n";
    out += "# " + t.at("name").get<std::string>() + "\n";
    for (const auto& p : t.at("points")) {
      out += std::to_string(p.at("depth").get<std::int64_t>());
      out += "\t";
      // shortest round-trip formatting, same as the structured rendering
      out += nlohmann::ordered_json(p.at("value").get<double>()).dump();
      out += "\n";
    }
  }
  return out;
}

}  // namespace netpot
