#include "hmg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hmg::graphio {
namespace {

constexpr int kSchemaVersion = 1;

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("missing file: " + file.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // trailing blank lines are common in these files
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

int parse_int(std::string_view text, const std::filesystem::path& file,
              std::size_t line_no) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  int value = 0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(file.string(), line_no,
                     "malformed integer '" + std::string(text) + "'");
  }
  return value;
}

std::pair<int, int> parse_edge_line(const std::string& line,
                                    const std::filesystem::path& file,
                                    std::size_t line_no) {
  auto comma = line.find(',');
  if (comma == std::string::npos) {
    throw ParseError(file.string(), line_no, "expected 'i, j'");
  }
  int u = parse_int(std::string_view(line).substr(0, comma), file, line_no);
  int v = parse_int(std::string_view(line).substr(comma + 1), file, line_no);
  return {u, v};
}

}  // namespace

DatasetBundle parse_tudataset(const std::filesystem::path& directory,
                              const std::string& name) {
  const auto path_of = [&](const std::string& suffix) {
    return directory / (name + "_" + suffix + ".txt");
  };

  const auto indicator_file = path_of("graph_indicator");
  const auto node_label_file = path_of("node_labels");
  const auto graph_label_file = path_of("graph_labels");
  const auto edge_file = path_of("A");

  const auto indicator_lines = read_lines(indicator_file);
  const auto node_label_lines = read_lines(node_label_file);
  const auto graph_label_lines = read_lines(graph_label_file);
  const auto edge_lines = read_lines(edge_file);

  if (indicator_lines.size() != node_label_lines.size()) {
    throw ParseError(node_label_file.string(), node_label_lines.size(),
                     "node label count does not match graph indicator count");
  }

  const int num_graphs = static_cast<int>(graph_label_lines.size());
  if (num_graphs == 0) {
    throw ParseError(graph_label_file.string(), 0, "no graphs");
  }

  // graph id and local index per global node id (both 1-based in files)
  std::vector<int> node_graph(indicator_lines.size());
  std::vector<int> node_local(indicator_lines.size());
  std::vector<int> graph_sizes(num_graphs, 0);
  for (std::size_t i = 0; i < indicator_lines.size(); ++i) {
    int gid = parse_int(indicator_lines[i], indicator_file, i + 1);
    if (gid < 1 || gid > num_graphs) {
      throw ParseError(indicator_file.string(), i + 1,
                       "graph id " + std::to_string(gid) + " out of range");
    }
    node_graph[i] = gid - 1;
    node_local[i] = graph_sizes[gid - 1]++;
  }

  std::vector<AtomGraph> graphs(num_graphs);
  for (int g = 0; g < num_graphs; ++g) {
    graphs[g].graph_id = g;
    graphs[g].node_labels.resize(graph_sizes[g]);
  }
  int max_node_label = -1;
  for (std::size_t i = 0; i < node_label_lines.size(); ++i) {
    int label = parse_int(node_label_lines[i], node_label_file, i + 1);
    if (label < 0) {
      throw ParseError(node_label_file.string(), i + 1, "negative node label");
    }
    graphs[node_graph[i]].node_labels[node_local[i]] = label;
    max_node_label = std::max(max_node_label, label);
  }

  // optional edge labels, aligned with A.txt
  std::optional<std::vector<std::string>> edge_label_lines;
  const auto edge_label_file = path_of("edge_labels");
  if (std::filesystem::exists(edge_label_file)) {
    edge_label_lines = read_lines(edge_label_file);
    if (edge_label_lines->size() != edge_lines.size()) {
      throw ParseError(edge_label_file.string(), edge_label_lines->size(),
                       "edge label count does not match edge count");
    }
    for (auto& g : graphs) g.edge_labels.emplace();
  }

  // undirected dedup: remember the first label seen per (graph, u, v), u < v
  std::vector<std::map<std::pair<int, int>, int>> seen(num_graphs);
  for (std::size_t i = 0; i < edge_lines.size(); ++i) {
    auto [gu, gv] = parse_edge_line(edge_lines[i], edge_file, i + 1);
    if (gu < 1 || gu > static_cast<int>(node_graph.size()) || gv < 1 ||
        gv > static_cast<int>(node_graph.size())) {
      throw ParseError(edge_file.string(), i + 1, "dangling node id");
    }
    if (gu == gv) {
      throw ParseError(edge_file.string(), i + 1, "self-loop");
    }
    const int g = node_graph[gu - 1];
    if (node_graph[gv - 1] != g) {
      throw ParseError(edge_file.string(), i + 1, "edge crosses graph boundary");
    }
    int u = node_local[gu - 1];
    int v = node_local[gv - 1];
    if (u > v) std::swap(u, v);
    int label = 0;
    if (edge_label_lines) {
      label = parse_int((*edge_label_lines)[i], edge_label_file, i + 1);
    }
    auto [it, inserted] = seen[g].emplace(std::make_pair(u, v), label);
    if (!inserted && edge_label_lines && it->second != label) {
      throw ParseError(edge_label_file.string(), i + 1,
                       "conflicting labels for one undirected edge");
    }
  }
  for (int g = 0; g < num_graphs; ++g) {
    for (const auto& [edge, label] : seen[g]) {
      graphs[g].edges.push_back(edge);
      if (edge_label_lines) graphs[g].edge_labels->push_back(label);
    }
  }

  // class labels remapped to contiguous [0, num_classes) by sorted raw value
  std::set<int> raw_classes;
  std::vector<int> raw_graph_labels(num_graphs);
  for (int g = 0; g < num_graphs; ++g) {
    raw_graph_labels[g] =
        parse_int(graph_label_lines[g], graph_label_file, g + 1);
    raw_classes.insert(raw_graph_labels[g]);
  }
  std::map<int, int> class_map;
  for (int raw : raw_classes) {
    class_map.emplace(raw, static_cast<int>(class_map.size()));
  }
  for (int g = 0; g < num_graphs; ++g) {
    graphs[g].class_label = class_map.at(raw_graph_labels[g]);
  }

  DatasetBundle bundle;
  bundle.name = name;
  bundle.graphs = std::move(graphs);
  bundle.num_node_label_values = max_node_label + 1;
  bundle.num_classes = static_cast<int>(class_map.size());
  return bundle;
}

void write_canonical(const DatasetBundle& bundle,
                     const std::filesystem::path& file) {
  nlohmann::json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = bundle.name;
  doc["num_node_label_values"] = bundle.num_node_label_values;
  doc["num_classes"] = bundle.num_classes;
  nlohmann::json graphs = nlohmann::json::array();
  for (const auto& g : bundle.graphs) {
    nlohmann::json jg;
    jg["graph_id"] = g.graph_id;
    jg["node_labels"] = g.node_labels;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [u, v] : g.edges) edges.push_back({u, v});
    jg["edges"] = std::move(edges);
    if (g.edge_labels) jg["edge_labels"] = *g.edge_labels;
    jg["class_label"] = g.class_label;
    graphs.push_back(std::move(jg));
  }
  doc["graphs"] = std::move(graphs);

  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

DatasetBundle read_canonical(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("missing file: " + file.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::runtime_error("schema version mismatch in " + file.string());
  }
  DatasetBundle bundle;
  bundle.name = doc.at("name").get<std::string>();
  bundle.num_node_label_values = doc.at("num_node_label_values").get<int>();
  bundle.num_classes = doc.at("num_classes").get<int>();
  for (const auto& jg : doc.at("graphs")) {
    AtomGraph g;
    g.graph_id = jg.at("graph_id").get<int>();
    g.node_labels = jg.at("node_labels").get<std::vector<int>>();
    for (const auto& e : jg.at("edges")) {
      g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    if (jg.contains("edge_labels")) {
      g.edge_labels = jg.at("edge_labels").get<std::vector<int>>();
    }
    g.class_label = jg.at("class_label").get<int>();
    bundle.graphs.push_back(std::move(g));
  }
  return bundle;
}

DatasetBundle roundtrip_canonical(const DatasetBundle& bundle) {
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("hmg_roundtrip_" + bundle.name + ".json");
  write_canonical(bundle, tmp);
  DatasetBundle result = read_canonical(tmp);
  std::filesystem::remove(tmp);
  return result;
}

}  // namespace hmg::graphio
