#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hmg/dataset.hpp"
#include "hmg/hetgraph.hpp"
#include "hmg/num/optim.hpp"
#include "hmg/num/tape.hpp"
#include "hmg/sampler.hpp"

namespace hmg::gnn {

using num::Matrix;
using num::Mode;
using num::Parameter;
using num::Tape;

/// One GIN convolution: out = MLP((1 + eps) x + sum_j w_ji x_j) with a
/// 2-layer MLP (hidden = out_dim, relu, batch norm per layer), eps fixed 0.
struct GinLayer {
  Eigen::Index in_dim = 0;
  Eigen::Index out_dim = 0;
  double gin_eps = 0.0;

  Parameter w1, b1, w2, b2;
  Parameter bn1_gamma, bn1_beta, bn2_gamma, bn2_beta;
  num::BatchNormState bn1, bn2;

  GinLayer() = default;
  GinLayer(const std::string& name, Eigen::Index in, Eigen::Index out);
  std::vector<Parameter*> parameters();
};

struct HmGnnConfig {
  int atom_input_dim = 0;           // one-hot node-label width
  int motif_input_dim = 0;          // |V_kept|
  int hidden = 64;                  // tower and head hidden width
  double dropout = 0.5;
  std::vector<int> head_classes;    // one output width per dataset
  bool use_motif_tower = true;      // off = plain GIN ablation
  double gin_eps = 0.0;

  static constexpr int kAtomLayers = 5;
  static constexpr int kMotifLayers = 3;

  int atom_embed_dim() const {
    return atom_input_dim + kAtomLayers * hidden;
  }
  int head_input_dim() const {
    return atom_embed_dim() + (use_motif_tower ? hidden : 0);
  }
};

/// Per-dataset 2-layer MLP classifier.
struct Head {
  Parameter w1, b1, w2, b2;
  Head() = default;
  Head(const std::string& name, Eigen::Index in, Eigen::Index hidden,
       Eigen::Index out);
  std::vector<Parameter*> parameters();
};

/// A batch of atom graphs packed into one disjoint union.
struct AtomBatch {
  Matrix features;  // one row per atom
  std::vector<num::SegmentEntry> messages;  // both directions, unit weights
  std::vector<num::SegmentEntry> pooling;   // atom -> graph index
  int num_graphs = 0;
};

AtomBatch build_atom_batch(const std::vector<const AtomGraph*>& graphs,
                           int input_dim);

/// The motif tower's computation graph: the full heterogeneous graph or a
/// sampled subgraph of it.
struct MotifView {
  Matrix features;  // one row per view node
  std::vector<num::SegmentEntry> messages;  // both directions, A_ij weights
  std::vector<int> view_nodes;  // parent node id per view row

  static MotifView full(const hetgraph::HeteroGraph& het);
  static MotifView from_subgraph(const hetgraph::HeteroGraph& het,
                                 const sampler::SampledSubgraph& sub);
  /// View row of a parent node id; throws when absent.
  int row_of(int het_node) const;
};

class HmGnnModel {
 public:
  HmGnnModel(HmGnnConfig config, num::Rng& init_rng);

  const HmGnnConfig& config() const { return config_; }
  std::vector<Parameter*> parameters();

  /// e_a: layer-concatenated sum-pooling readout, one row per batch graph.
  Tape::Value atom_tower_forward(Tape& tape, const AtomBatch& batch, Mode mode);

  /// Motif embeddings for every view row (molecule rows are selected later).
  Tape::Value motif_tower_forward(Tape& tape, const MotifView& view, Mode mode);

  struct ForwardOptions {
    Mode mode = Mode::eval;
    bool zero_motif_embedding = false;  // ablation hook: keep shape, drop signal
  };

  /// Class logits for batch molecule i of dataset `dataset_of[i]`, routed to
  /// that dataset's head. `molecule_rows[i]` is the motif-view row of the
  /// molecule node. Returns one logits value per dataset (empty datasets get
  /// no logits; `rows_of_dataset` lists batch positions per dataset).
  struct ForwardResult {
    std::vector<std::optional<Tape::Value>> logits;  // per dataset
    std::vector<std::vector<int>> rows_of_dataset;   // batch positions
  };
  ForwardResult forward(Tape& tape, const AtomBatch& atoms,
                        const MotifView& view,
                        const std::vector<int>& molecule_rows,
                        const std::vector<int>& dataset_of,
                        const ForwardOptions& options);

  num::Rng& dropout_rng() { return dropout_rng_; }
  void reseed_dropout(std::uint64_t seed) { dropout_rng_ = num::Rng(seed); }

  std::vector<GinLayer>& atom_layers() { return atom_layers_; }
  std::vector<GinLayer>& motif_layers() { return motif_layers_; }
  std::vector<Head>& heads() { return heads_; }

 private:
  Tape::Value gin_forward(Tape& tape, GinLayer& layer, Tape::Value x,
                          const std::vector<num::SegmentEntry>& messages,
                          Eigen::Index num_nodes, Mode mode);

  HmGnnConfig config_;
  std::vector<GinLayer> atom_layers_;
  std::vector<GinLayer> motif_layers_;
  std::vector<Head> heads_;
  num::Rng dropout_rng_;
};

/// Model checkpoint: named tensors, Adam state, batch-norm running stats,
/// dropout RNG state, config, schema version.
void save_checkpoint(HmGnnModel& model, const std::filesystem::path& file);
void load_checkpoint(HmGnnModel& model, const std::filesystem::path& file);

}  // namespace hmg::gnn
