#include <netpot/families.hpp>
#include <netpot/io.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace netpot;
using namespace netpot::families;
using Catch::Matchers::ContainsSubstring;

namespace {

std::vector<ExtendedGraph> document_corpus() {
  std::vector<ExtendedGraph> out;
  out.push_back(doubling_halfline());
  out.push_back(unit_halfline());
  out.push_back(quadrupling_halfline());
  out.push_back(heavy_transient_halfline());
  out.push_back(excision_base());
  out.push_back(two_sided_line());
  out.push_back(two_ray_star());
  // every rule shape in one document: table prefixes over both tail kinds,
  // power rules, and string ids next to integer ids
  GraphData data;
  data.vertex(VertexId::core("hub"), 2.0)
      .vertex(VertexId::core(-3), 0.25)
      .vertex(VertexId::core(10), 1.0)
      .edge(VertexId::core("hub"), VertexId::core(-3), 3.5)
      .edge(VertexId::core(-3), VertexId::core(10), 0.125);
  std::vector<RaySpec> rays;
  rays.push_back(RaySpec{VertexId::core("hub"),
                         SequenceRule::table({3.0, 1.0}, Power{2.0, -2.0}),
                         SequenceRule::table({0.25}, Geometric{1.0, 0.5})});
  rays.push_back(RaySpec{VertexId::core(10), SequenceRule::power(1.5, 2.0),
                         SequenceRule::power(2.0, -3.0)});
  out.push_back(ExtendedGraph::from_data(data, rays));
  return out;
}

}  // namespace

TEST_CASE("documents round trip to graphs and back to identical bytes") {
  for (const auto& e : document_corpus()) {
    const auto text = save_graph(e);
    const auto loaded = load_graph(text);
    CHECK(save_graph(loaded) == text);

    // structural identity, not just textual
    REQUIRE(loaded.core().size() == e.core().size());
    for (std::int32_t i = 0; i < e.core().size(); ++i) {
      CHECK(loaded.core().vertex(i) == e.core().vertex(i));
      CHECK(loaded.core().measure(i) == e.core().measure(i));
    }
    REQUIRE(loaded.core().edges().size() == e.core().edges().size());
    for (std::size_t i = 0; i < e.core().edges().size(); ++i) {
      CHECK(loaded.core().edges()[i].u == e.core().edges()[i].u);
      CHECK(loaded.core().edges()[i].v == e.core().edges()[i].v);
      CHECK(loaded.core().edges()[i].weight == e.core().edges()[i].weight);
    }
    REQUIRE(loaded.rays().size() == e.rays().size());
    for (std::size_t r = 0; r < e.rays().size(); ++r) {
      CHECK(loaded.rays()[r].attach == e.rays()[r].attach);
      for (std::int64_t k = 0; k <= 25; ++k) {
        CHECK(loaded.rays()[r].weights.value(k) == e.rays()[r].weights.value(k));
        if (k >= 1)
          CHECK(loaded.rays()[r].measures.value(k) ==
                e.rays()[r].measures.value(k));
      }
    }
  }
}

TEST_CASE("rule encodings normalize to one canonical form") {
  // a power rule with exponent zero is the constant rule, which the
  // canonical form writes as a ratio-one geometric rule
  const auto j = rule_to_json(SequenceRule::power(5.0, 0.0));
  CHECK(j["kind"] == "geometric");
  CHECK(double(j["first"]) == 5.0);
  CHECK(double(j["ratio"]) == 1.0);

  // a table whose prefix is empty collapses to its tail
  const auto k = rule_to_json(SequenceRule::table({}, Geometric{2.0, 3.0}));
  CHECK(k["kind"] == "geometric");

  // genuine tables keep their prefix and tail
  const auto t = rule_to_json(SequenceRule::table({3.0, 1.0}, Power{2.0, -2.0}));
  REQUIRE(t["kind"] == "table");
  REQUIRE(t["values"].size() == 2);
  CHECK(t["tail"]["kind"] == "power");
}

TEST_CASE("a minimal document loads without a rays entry") {
  const std::string text = R"({
    "vertices": [{"id": 0, "m": 1.0}, {"id": 1, "m": 2.0}],
    "edges": [{"u": 0, "v": 1, "b": 3.0}]
  })";
  const auto e = load_graph(text);
  CHECK(e.core().size() == 2);
  CHECK(e.rays().empty());
  REQUIRE(e.core().edges().size() == 1);
  CHECK(e.core().edges()[0].weight == 3.0);
}

TEST_CASE("loading collects every violation, each with its location") {
  const std::string text = R"({
    "vertices": [
      {"id": 1, "m": -0.5},
      {"id": 1, "m": 2.0},
      {"id": 2, "m": 1.0}
    ],
    "edges": [
      {"u": 1, "v": 2, "b": 1.0},
      {"u": 1, "v": 1, "b": 1.0},
      {"u": 2, "v": 1, "b": 4.0},
      {"u": 1, "v": 9, "b": 1.0}
    ],
    "rays": [
      {"id": 0, "attach": 77,
       "weights": {"kind": "geometric", "first": 1.0, "ratio": 1.0},
       "measures": {"kind": "geometric", "first": 1.0, "ratio": 1.0}}
    ]
  })";
  const auto chk = check_document(text);
  REQUIRE_FALSE(chk.ok());
  auto has = [&](const std::string& fragment) {
    for (const auto& p : chk.problems)
      if (p.find(fragment) != std::string::npos) return true;
    return false;
  };
  CHECK(has("measure entries at positions 0 and 1"));
  CHECK(has("nonpositive or nonfinite measure"));
  CHECK(has("self loop"));
  CHECK(has("appears at entry positions 0 and 2"));
  CHECK(has("references unknown vertex 9"));
  CHECK(has("attaches at unknown vertex 77"));
  CHECK(chk.problems.size() >= 6);
}

TEST_CASE("parse errors carry the line of the defect") {
  const auto chk = check_document("{ \"vertices\": [\n  { broken\n]}");
  REQUIRE_FALSE(chk.ok());
  REQUIRE(chk.problems.size() == 1);
  CHECK_THAT(chk.problems[0], ContainsSubstring("line 2"));
}

TEST_CASE("documents reject malformed entries with precise complaints") {
  auto problems_of = [](const std::string& text) {
    return check_document(text).problems;
  };

  SECTION("ray ids must be positional") {
    const auto p = problems_of(R"({
      "vertices": [{"id": 0, "m": 1.0}],
      "rays": [{"id": 5, "attach": 0,
                "weights": {"kind": "geometric", "first": 1.0, "ratio": 1.0},
                "measures": {"kind": "geometric", "first": 1.0, "ratio": 1.0}}]
    })");
    REQUIRE_FALSE(p.empty());
    CHECK_THAT(p[0], ContainsSubstring("positional"));
  }

  SECTION("table tails do not nest") {
    const auto p = problems_of(R"({
      "vertices": [{"id": 0, "m": 1.0}],
      "rays": [{"id": 0, "attach": 0,
                "weights": {"kind": "table", "values": [1.0],
                            "tail": {"kind": "table", "values": [1.0],
                                     "tail": {"kind": "geometric", "first": 1.0, "ratio": 1.0}}},
                "measures": {"kind": "geometric", "first": 1.0, "ratio": 1.0}}]
    })");
    REQUIRE_FALSE(p.empty());
    bool found = false;
    for (const auto& s : p)
      if (s.find("do not nest") != std::string::npos) found = true;
    CHECK(found);
  }

  SECTION("unknown keys are flagged") {
    const auto p = problems_of(R"({
      "vertices": [{"id": 0, "m": 1.0, "color": "red"}],
      "edges": [],
      "banner": true
    })");
    REQUIRE(p.size() >= 2);
    bool root = false, entry = false;
    for (const auto& s : p) {
      if (s.find("\"banner\"") != std::string::npos) root = true;
      if (s.find("\"color\"") != std::string::npos) entry = true;
    }
    CHECK(root);
    CHECK(entry);
  }

  SECTION("rule constructor rules carry through") {
    const auto p = problems_of(R"({
      "vertices": [{"id": 0, "m": 1.0}],
      "rays": [{"id": 0, "attach": 0,
                "weights": {"kind": "geometric", "first": -1.0, "ratio": 2.0},
                "measures": {"kind": "power", "coeff": 1.0, "exponent": 1.0}}]
    })");
    REQUIRE_FALSE(p.empty());
    CHECK_THAT(p[0], ContainsSubstring("geometric first must be positive"));
  }

  SECTION("ids must be integers or strings") {
    const auto p = problems_of(R"({
      "vertices": [{"id": 1.5, "m": 1.0}]
    })");
    REQUIRE_FALSE(p.empty());
    CHECK_THAT(p[0], ContainsSubstring("integer or a string"));
  }
}

TEST_CASE("load_graph throws with the full problem list") {
  CHECK_THROWS_WITH(
      load_graph(R"({"vertices": [{"id": 0, "m": -1.0}], "edges": []})"),
      ContainsSubstring("nonpositive or nonfinite measure"));
}

TEST_CASE("documents travel through files") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "netpot_io_test";
  fs::create_directories(dir);
  const auto path = (dir / "doc.json").string();
  const auto e = two_sided_line();
  save_graph_file(e, path);
  const auto loaded = load_graph_file(path);
  CHECK(save_graph(loaded) == save_graph(e));
  CHECK_THROWS_WITH(load_graph_file((dir / "absent.json").string()),
                    ContainsSubstring("cannot read"));
  CHECK_THROWS_WITH(save_graph_file(e, (dir / "no_dir" / "x.json").string()),
                    ContainsSubstring("cannot write"));
  fs::remove_all(dir);
}
