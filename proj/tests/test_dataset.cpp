#include "hmg/dataset.hpp"

#include <fstream>

#include "doctest.h"
#include "testutil.hpp"

using namespace hmg;
using test::TempDir;
using test::write_file;

namespace {

// two graphs: a triangle (labels 0,1,2) and a single edge (labels 0,0)
void write_tiny_dataset(const std::filesystem::path& dir,
                        const std::string& name, bool edge_labels = false) {
  std::filesystem::create_directories(dir);
  write_file(dir / (name + "_A.txt"),
             "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n");
  write_file(dir / (name + "_graph_indicator.txt"), "1\n1\n1\n2\n2\n");
  write_file(dir / (name + "_graph_labels.txt"), "-1\n1\n");
  write_file(dir / (name + "_node_labels.txt"), "0\n1\n2\n0\n0\n");
  if (edge_labels) {
    write_file(dir / (name + "_edge_labels.txt"), "0\n0\n1\n1\n2\n2\n0\n0\n");
  }
}

}  // namespace

TEST_CASE("parse_tudataset remaps ids and deduplicates directed listings") {
  TempDir tmp("dataset_tiny");
  write_tiny_dataset(tmp.path(), "TINY");
  const auto bundle = graphio::parse_tudataset(tmp.path(), "TINY");

  CHECK(bundle.num_graphs() == 2);
  CHECK(bundle.num_node_label_values == 3);
  CHECK(bundle.num_classes == 2);

  const auto& triangle = bundle.graphs[0];
  CHECK(triangle.num_nodes() == 3);
  CHECK(triangle.num_edges() == 3);  // each edge listed in both directions
  CHECK(triangle.edges ==
        std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(triangle.class_label == 0);  // -1 -> 0

  const auto& pair = bundle.graphs[1];
  CHECK(pair.num_nodes() == 2);
  CHECK(pair.edges == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(pair.class_label == 1);
}

TEST_CASE("edge listed in both directions yields exactly one edge") {
  TempDir tmp("dataset_dedup");
  write_file(tmp.path() / "D_A.txt", "1, 2\n2, 1\n");
  write_file(tmp.path() / "D_graph_indicator.txt", "1\n1\n");
  write_file(tmp.path() / "D_graph_labels.txt", "1\n");
  write_file(tmp.path() / "D_node_labels.txt", "0\n0\n");
  const auto bundle = graphio::parse_tudataset(tmp.path(), "D");
  REQUIRE(bundle.num_graphs() == 1);
  CHECK(bundle.graphs[0].num_edges() == 1);
}

TEST_CASE("parse_tudataset keeps edge labels aligned after dedup") {
  TempDir tmp("dataset_elabels");
  write_tiny_dataset(tmp.path(), "TINY", true);
  const auto bundle = graphio::parse_tudataset(tmp.path(), "TINY");
  REQUIRE(bundle.has_edge_labels());
  const auto& triangle = bundle.graphs[0];
  REQUIRE(triangle.edge_labels.has_value());
  // edges sorted (0,1),(0,2),(1,2) with labels 0,2,1
  CHECK(*triangle.edge_labels == std::vector<int>{0, 2, 1});
}

TEST_CASE("parse errors carry file and line context") {
  TempDir tmp("dataset_errors");

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(graphio::parse_tudataset(tmp.path(), "NOPE"),
                         doctest::Contains("missing file"),
                         std::runtime_error);
  }
  SUBCASE("dangling node id") {
    write_tiny_dataset(tmp.path(), "BAD");
    write_file(tmp.path() / "BAD_A.txt", "1, 9\n");
    try {
      graphio::parse_tudataset(tmp.path(), "BAD");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(std::string(e.what()).find("dangling") != std::string::npos);
    }
  }
  SUBCASE("edge crossing graph boundary") {
    write_tiny_dataset(tmp.path(), "BAD");
    write_file(tmp.path() / "BAD_A.txt", "1, 4\n");
    CHECK_THROWS_AS(graphio::parse_tudataset(tmp.path(), "BAD"), ParseError);
  }
  SUBCASE("malformed line reports file and line number") {
    write_tiny_dataset(tmp.path(), "BAD");
    write_file(tmp.path() / "BAD_A.txt", "1, 2\nnot an edge\n");
    try {
      graphio::parse_tudataset(tmp.path(), "BAD");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.file().find("BAD_A.txt") != std::string::npos);
    }
  }
}

TEST_CASE("parsing is deterministic and node counts match the indicator") {
  const auto a = graphio::parse_tudataset(test::data_dir() / "MUTAG", "MUTAG");
  const auto b = graphio::parse_tudataset(test::data_dir() / "MUTAG", "MUTAG");
  CHECK(a == b);

  std::size_t total_nodes = 0;
  for (const auto& g : a.graphs) total_nodes += g.num_nodes();
  std::ifstream indicator(test::data_dir() / "MUTAG" /
                          "MUTAG_graph_indicator.txt");
  std::size_t newline_count = 0;
  for (char c; indicator.get(c);) {
    if (c == '\n') ++newline_count;
  }
  CHECK(total_nodes == newline_count);
}

TEST_CASE("MUTAG and PTC parse to the documented sizes") {
  const auto mutag =
      graphio::parse_tudataset(test::data_dir() / "MUTAG", "MUTAG");
  CHECK(mutag.num_graphs() == 188);
  CHECK(mutag.num_node_label_values == 7);
  CHECK(mutag.has_edge_labels());

  const auto ptc = graphio::parse_tudataset(test::data_dir() / "PTC", "PTC");
  CHECK(ptc.num_graphs() == 344);
}

TEST_CASE("roundtrip_canonical is the identity") {
  SUBCASE("real dataset") {
    const auto mutag =
        graphio::parse_tudataset(test::data_dir() / "MUTAG", "MUTAG");
    CHECK(graphio::roundtrip_canonical(mutag) == mutag);
  }
  SUBCASE("single-node zero-edge graph") {
    DatasetBundle bundle;
    bundle.name = "degenerate";
    bundle.num_node_label_values = 1;
    bundle.num_classes = 1;
    bundle.graphs.push_back(test::make_graph({0}, {}));
    CHECK(graphio::roundtrip_canonical(bundle) == bundle);
  }
  SUBCASE("edge labels preserved exactly") {
    DatasetBundle bundle;
    bundle.name = "labeled";
    bundle.num_node_label_values = 2;
    bundle.num_classes = 1;
    bundle.graphs.push_back(test::make_graph({0, 1}, {{0, 1}}, {3}));
    const auto back = graphio::roundtrip_canonical(bundle);
    REQUIRE(back.graphs[0].edge_labels.has_value());
    CHECK(*back.graphs[0].edge_labels == std::vector<int>{3});
  }
}

TEST_CASE("schema version mismatch is rejected") {
  TempDir tmp("dataset_schema");
  const auto file = tmp.path() / "bad.json";
  write_file(file, R"({"schema_version": 999, "name": "x",
                      "num_node_label_values": 1, "num_classes": 1,
                      "graphs": []})");
  CHECK_THROWS_WITH_AS(graphio::read_canonical(file),
                       doctest::Contains("schema version"),
                       std::runtime_error);
}
