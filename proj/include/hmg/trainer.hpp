#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hmg/dataset.hpp"
#include "hmg/gnn.hpp"
#include "hmg/hetgraph.hpp"
#include "hmg/motif.hpp"
#include "hmg/num/tape.hpp"

#include "json.hpp"

namespace hmg::trainer {

struct TrainConfig {
  double learning_rate = 0.01;   // paper grid: {0.01, 0.05}
  int hidden_units = 64;         // paper grid: {16, 64, 1024}
  double dropout = 0.5;          // paper grid: {0.2, 0.5}
  int epochs = 350;
  int batch_size = 2000;
  double weight_decay = 0.0005;
  double lr_decay_factor = 0.5;
  int lr_decay_patience = 20;
  double min_lr = 1e-3;
  int folds = 10;
  std::uint64_t seed = 0;
  double keep_ratio = 1.0;
  std::string sampling_rule = "all,all,all";
  int threads = 1;

  bool use_motif_tower = true;   // false = plain atom-tower (GIN) ablation
  bool drop_motif_motif = false; // variant without motif-motif interactions
  double gin_eps = 0.0;

  // multitask split protocol
  double train_fraction = 0.9;   // {0.9, 0.5, 0.1}
  int repetitions = 10;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct FoldResult {
  double best_val_accuracy = 0.0;
  std::vector<double> train_loss;    // per epoch
  std::vector<double> val_accuracy;  // per epoch
};

struct CvReport {
  std::string dataset;
  std::vector<double> fold_accuracy;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<FoldResult> folds;
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json() const;
  void write_csv(const std::filesystem::path& file) const;
};

/// Seeded shuffle then contiguous partition; fold sizes differ by at most 1.
std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed);

/// Per-dataset seeded stratified split; returns train indices.
std::vector<int> stratified_split(const std::vector<int>& labels,
                                  double train_fraction, std::uint64_t seed);

struct Metrics {
  double accuracy = 0.0;
  std::optional<double> roc_auc;            // binary only; absent class -> unset
  std::optional<double> average_precision;  // binary only
};

/// scores: one row per example, one column per class.
Metrics evaluate_metrics(const std::vector<int>& labels,
                         const num::Matrix& scores);

/// 10-fold transductive cross-validation on one dataset, mirroring the
/// standard TUDataset protocol (best validation accuracy per fold).
CvReport fit_cv(const DatasetBundle& bundle, const TrainConfig& config);

/// Shared towers + per-dataset heads over a combined heterogeneous graph;
/// seeded stratified splits at `train_fraction`, `repetitions` repeats.
std::vector<CvReport> run_multitask(const std::vector<DatasetBundle>& bundles,
                                    const TrainConfig& config);

enum class SweepKind { keep_ratio, starting_nodes };

struct SweepRow {
  double grid_value = 0.0;
  int vocab_kept = 0;
  std::int64_t hetgraph_edges = 0;
  double mean_sampled_edges = 0.0;  // starting_nodes sweep only
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

std::vector<SweepRow> run_sweeps(SweepKind kind,
                                 const std::vector<double>& grid,
                                 const DatasetBundle& bundle,
                                 const TrainConfig& config);

void write_sweep_csv(SweepKind kind, const std::vector<SweepRow>& rows,
                     const std::filesystem::path& file);

/// Single training run over the whole dataset (no validation split); returns
/// the trained model for checkpointing.
std::unique_ptr<gnn::HmGnnModel> train_full(const DatasetBundle& bundle,
                                            const TrainConfig& config,
                                            double* final_loss = nullptr);

}  // namespace hmg::trainer
