#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hmg {

/// Thrown for malformed dataset files; carries file and line context.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// One molecule as a labeled undirected graph. Node indices are 0-based and
/// local to the graph. Each undirected edge is stored once, lower index first.
struct AtomGraph {
  int graph_id = 0;
  std::vector<int> node_labels;
  std::vector<std::pair<int, int>> edges;
  // Aligned with `edges` when the dataset provides edge labels.
  std::optional<std::vector<int>> edge_labels;
  int class_label = 0;

  int num_nodes() const { return static_cast<int>(node_labels.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  bool has_edge_labels() const { return edge_labels.has_value(); }

  friend bool operator==(const AtomGraph&, const AtomGraph&) = default;
};

struct DatasetBundle {
  std::string name;
  std::vector<AtomGraph> graphs;
  int num_node_label_values = 0;
  int num_classes = 0;

  int num_graphs() const { return static_cast<int>(graphs.size()); }
  bool has_edge_labels() const {
    return !graphs.empty() && graphs.front().has_edge_labels();
  }

  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

namespace graphio {

/// Parses the TUDataset text format from `directory` (files `NAME_A.txt`,
/// `NAME_graph_indicator.txt`, `NAME_graph_labels.txt`, `NAME_node_labels.txt`,
/// optional `NAME_edge_labels.txt`). Node ids are remapped from global
/// 1-based to per-graph 0-based; duplicate directed listings of an
/// undirected edge are merged; class labels are remapped to [0, num_classes).
DatasetBundle parse_tudataset(const std::filesystem::path& directory,
                              const std::string& name);

/// Canonical JSON serialization of a bundle (single UTF-8 document,
/// integers only, schema-versioned).
void write_canonical(const DatasetBundle& bundle,
                     const std::filesystem::path& file);
DatasetBundle read_canonical(const std::filesystem::path& file);

/// write_canonical followed by read_canonical; the result compares equal
/// field-for-field with the input.
DatasetBundle roundtrip_canonical(const DatasetBundle& bundle);

}  // namespace graphio
}  // namespace hmg
