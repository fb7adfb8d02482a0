#include "hmg/hetgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "json.hpp"

namespace hmg::hetgraph {
namespace {

struct MoleculeIncidence {
  std::map<int, int> counts;  // vocab index -> C(i)_j over kept motifs
  std::set<std::pair<int, int>> shared_pairs;
};

// kept-motif counts and atom-sharing pairs for one molecule
MoleculeIncidence collect_incidence(const AtomGraph& graph,
                                    const motif::MotifVocabulary& vocab) {
  MoleculeIncidence out;
  const auto occurrences = motif::extract_occurrences(graph);
  std::vector<int> motif_of;  // per occurrence; -1 when unknown or dropped
  motif_of.reserve(occurrences.size());
  for (const auto& occ : occurrences) {
    const auto key = motif::canonicalize(occ, graph);
    auto it = vocab.index.find(key);
    if (it == vocab.index.end() || !vocab.kept[it->second]) {
      motif_of.push_back(-1);
      continue;
    }
    motif_of.push_back(it->second);
    ++out.counts[it->second];
  }
  // two motifs are linked when any pair of their occurrences shares an atom
  std::vector<std::set<int>> node_sets;
  node_sets.reserve(occurrences.size());
  for (const auto& occ : occurrences) {
    node_sets.emplace_back(occ.node_ids.begin(), occ.node_ids.end());
  }
  for (std::size_t a = 0; a < occurrences.size(); ++a) {
    if (motif_of[a] < 0) continue;
    for (std::size_t b = a + 1; b < occurrences.size(); ++b) {
      if (motif_of[b] < 0 || motif_of[a] == motif_of[b]) continue;
      const auto& small = node_sets[a].size() <= node_sets[b].size()
                              ? node_sets[a]
                              : node_sets[b];
      const auto& large = node_sets[a].size() <= node_sets[b].size()
                              ? node_sets[b]
                              : node_sets[a];
      const bool intersects =
          std::any_of(small.begin(), small.end(),
                      [&](int node) { return large.count(node) > 0; });
      if (intersects) {
        out.shared_pairs.insert(std::minmax(motif_of[a], motif_of[b]));
      }
    }
  }
  return out;
}

}  // namespace

double pmi_value(const CooccurrenceStats& stats, int i, int j) {
  const std::pair<int, int> key = std::minmax(i, j);
  const auto it = stats.pair_freq.find(key);
  const int nij = it == stats.pair_freq.end() ? 0 : it->second;
  if (nij == 0) return -std::numeric_limits<double>::infinity();
  const double m = stats.num_molecules;
  const double pij = nij / m;
  const double pi = stats.doc_freq[i] / m;
  const double pj = stats.doc_freq[j] / m;
  return std::log(pij / (pi * pj));
}

const std::vector<std::vector<int>>& HeteroGraph::adjacency() const {
  if (adjacency_.size() != static_cast<std::size_t>(num_nodes())) {
    adjacency_.assign(num_nodes(), {});
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      adjacency_[edges[e].u].push_back(e);
      adjacency_[edges[e].v].push_back(e);
    }
  }
  return adjacency_;
}

BuildResult build_hetero_graph(const std::vector<DatasetBundle>& bundles,
                               const motif::MotifVocabulary& vocab) {
  if (vocab.motifs.empty()) throw std::invalid_argument("empty vocabulary");

  BuildResult out;
  auto& het = out.graph;
  auto& stats = out.stats;
  stats.doc_freq.assign(vocab.size(), 0);

  std::vector<MoleculeIncidence> incidences;
  for (int d = 0; d < static_cast<int>(bundles.size()); ++d) {
    for (const auto& graph : bundles[d].graphs) {
      het.molecule_nodes.push_back({d, graph.graph_id});
      incidences.push_back(collect_incidence(graph, vocab));
    }
  }
  stats.num_molecules = het.num_molecules();

  for (const auto& inc : incidences) {
    for (const auto& [motif_a, count_a] : inc.counts) {
      ++stats.doc_freq[motif_a];
      for (const auto& [motif_b, count_b] : inc.counts) {
        if (motif_b > motif_a) ++stats.pair_freq[{motif_a, motif_b}];
      }
    }
    stats.atom_shared.insert(inc.shared_pairs.begin(), inc.shared_pairs.end());
  }

  // motif nodes for kept motifs, in vocabulary order
  const auto kept_rank = vocab.kept_rank();
  const int num_kept = vocab.num_kept();
  for (int i = 0; i < vocab.size(); ++i) {
    if (vocab.kept[i]) het.motif_nodes.push_back(i);
  }

  het.features = Matrix::Zero(het.num_nodes(), num_kept);
  for (int i = 0; i < num_kept; ++i) het.features(i, i) = 1.0;

  for (int j = 0; j < het.num_molecules(); ++j) {
    if (incidences[j].counts.empty()) {
      std::cerr << "hmg: molecule node " << het.molecule_node(j)
                << " has no kept motifs; it stays isolated\n";
    }
    for (const auto& [motif_index, count] : incidences[j].counts) {
      het.features(het.molecule_node(j), kept_rank[motif_index]) = count;
      het.edges.push_back({kept_rank[motif_index], het.molecule_node(j),
                           motif::tfidf_value(count, stats.num_molecules,
                                              stats.doc_freq[motif_index]),
                           EdgeType::motif_molecule});
    }
  }
  for (const auto& [a, b] : stats.atom_shared) {
    const double pmi = pmi_value(stats, a, b);
    if (pmi > 0.0) {
      het.edges.push_back(
          {kept_rank[a], kept_rank[b], pmi, EdgeType::motif_motif});
    }
  }
  return out;
}

int insert_molecule(HeteroGraph& het, const CooccurrenceStats& stats,
                    const motif::MotifVocabulary& vocab, const AtomGraph& graph,
                    int dataset_id) {
  const auto kept_rank = vocab.kept_rank();
  const auto incidence = collect_incidence(graph, vocab);

  const int node_id = het.num_nodes();
  het.molecule_nodes.push_back({dataset_id, graph.graph_id});
  het.features.conservativeResize(het.num_nodes(), Eigen::NoChange);
  het.features.row(node_id).setZero();
  for (const auto& [motif_index, count] : incidence.counts) {
    het.features(node_id, kept_rank[motif_index]) = count;
    het.edges.push_back({kept_rank[motif_index], node_id,
                         motif::tfidf_value(count, stats.num_molecules,
                                            stats.doc_freq[motif_index]),
                         EdgeType::motif_molecule});
  }
  het.invalidate_adjacency();
  return node_id;
}

nlohmann::json hetero_graph_to_json(const HeteroGraph& het) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["motif_nodes"] = het.motif_nodes;
  nlohmann::json molecules = nlohmann::json::array();
  for (const auto& mol : het.molecule_nodes) {
    molecules.push_back(
        {{"dataset_id", mol.dataset_id}, {"graph_id", mol.graph_id}});
  }
  doc["molecule_nodes"] = std::move(molecules);
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& edge : het.edges) {
    edges.push_back({{"u", edge.u},
                     {"v", edge.v},
                     {"weight", edge.weight},
                     {"type", edge.type == EdgeType::motif_molecule
                                  ? "motif-molecule"
                                  : "motif-motif"}});
  }
  doc["edges"] = std::move(edges);
  nlohmann::json triplets = nlohmann::json::array();
  for (int r = 0; r < het.features.rows(); ++r) {
    for (int c = 0; c < het.features.cols(); ++c) {
      if (het.features(r, c) != 0.0) {
        triplets.push_back({r, c, het.features(r, c)});
      }
    }
  }
  doc["features"] = {{"rows", het.features.rows()},
                     {"cols", het.features.cols()},
                     {"triplets", std::move(triplets)}};
  return doc;
}

void write_hetero_graph(const HeteroGraph& het,
                        const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << hetero_graph_to_json(het).dump(2) << '\n';
}

}  // namespace hmg::hetgraph
