#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "hmg/dataset.hpp"
#include "json.hpp"
#include "hmg/motif.hpp"

namespace hmg::hetgraph {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Motif containment statistics over a molecule universe, frozen at build
/// time so later insertions reuse the same weights.
struct CooccurrenceStats {
  int num_molecules = 0;                         // M
  std::vector<int> doc_freq;                     // N(i) per vocabulary index
  std::map<std::pair<int, int>, int> pair_freq;  // (i<j) -> N(i,j), co-contained
  // kept pairs whose occurrences share >= 1 atom in >= 1 molecule
  std::set<std::pair<int, int>> atom_shared;
};

/// PMI_ij = ln( (N(i,j)/M) / ((N(i)/M)(N(j)/M)) ); -inf when N(i,j)=0.
double pmi_value(const CooccurrenceStats& stats, int i, int j);

enum class EdgeType { motif_molecule, motif_motif };

/// Molecule and motif nodes with TF-IDF / PMI weighted edges. Node ids:
/// kept motifs first [0, num_motifs), then molecules, so inserting a
/// molecule never renumbers existing nodes.
struct HeteroGraph {
  struct MoleculeRef {
    int dataset_id = 0;
    int graph_id = 0;
  };
  struct Edge {
    int u = 0;
    int v = 0;
    double weight = 0.0;
    EdgeType type = EdgeType::motif_molecule;
  };

  std::vector<int> motif_nodes;  // vocabulary index per motif node
  std::vector<MoleculeRef> molecule_nodes;
  std::vector<Edge> edges;  // each undirected edge stored once
  Matrix features;          // one row per node, width |V_kept|

  int num_motifs() const { return static_cast<int>(motif_nodes.size()); }
  int num_molecules() const { return static_cast<int>(molecule_nodes.size()); }
  int num_nodes() const { return num_motifs() + num_molecules(); }
  bool is_molecule(int node) const { return node >= num_motifs(); }
  int molecule_node(int molecule_index) const {
    return num_motifs() + molecule_index;
  }

  /// Incident edge ids per node, ascending; rebuilt lazily after inserts.
  const std::vector<std::vector<int>>& adjacency() const;
  void invalidate_adjacency() { adjacency_.clear(); }

 private:
  mutable std::vector<std::vector<int>> adjacency_;
};

struct BuildResult {
  HeteroGraph graph;
  CooccurrenceStats stats;
};

/// Builds the heterogeneous motif graph over all molecules of `bundles`.
/// Motif-molecule edges carry TF-IDF weights; motif-motif edges link kept
/// pairs that share an atom in some molecule and have PMI > 0.
BuildResult build_hetero_graph(const std::vector<DatasetBundle>& bundles,
                               const motif::MotifVocabulary& vocab);

/// Appends one molecule node using frozen stats; edges only to motifs already
/// kept in the vocabulary. Returns the new node id.
int insert_molecule(HeteroGraph& het, const CooccurrenceStats& stats,
                    const motif::MotifVocabulary& vocab, const AtomGraph& graph,
                    int dataset_id = 0);

nlohmann::json hetero_graph_to_json(const HeteroGraph& het);
void write_hetero_graph(const HeteroGraph& het,
                        const std::filesystem::path& file);

}  // namespace hmg::hetgraph
