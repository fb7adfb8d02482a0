#include "hmg/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>

#include "hmg/num/optim.hpp"
#include "hmg/sampler.hpp"

namespace hmg::trainer {
namespace {

using hetgraph::HeteroGraph;
using num::Matrix;

struct Universe {
  std::vector<const AtomGraph*> graphs;  // per molecule index
  std::vector<int> dataset_of;
  std::vector<int> labels;
  std::vector<std::string> dataset_names;
  std::vector<int> head_classes;
  int atom_input_dim = 0;
  motif::MotifVocabulary vocab;
  HeteroGraph het;
  hetgraph::CooccurrenceStats stats;
  sampler::SamplingRule rule;
};

Universe build_universe(const std::vector<const DatasetBundle*>& bundles,
                        const TrainConfig& config) {
  Universe u;
  std::vector<DatasetBundle> copies;
  std::vector<DatasetBundle> deref;
  deref.reserve(bundles.size());
  for (const DatasetBundle* b : bundles) deref.push_back(*b);

  u.vocab = motif::build_vocabulary(deref, config.keep_ratio);
  auto built = hetgraph::build_hetero_graph(deref, u.vocab);
  u.het = std::move(built.graph);
  u.stats = std::move(built.stats);
  if (config.drop_motif_motif) {
    std::vector<HeteroGraph::Edge> kept;
    for (const auto& edge : u.het.edges) {
      if (edge.type == hetgraph::EdgeType::motif_molecule) kept.push_back(edge);
    }
    u.het.edges = std::move(kept);
    u.het.invalidate_adjacency();
  }
  u.het.adjacency();  // build once; folds share it read-only

  for (const DatasetBundle* bundle : bundles) {
    u.dataset_names.push_back(bundle->name);
    u.head_classes.push_back(bundle->num_classes);
    u.atom_input_dim =
        std::max(u.atom_input_dim, bundle->num_node_label_values);
    for (const auto& graph : bundle->graphs) {
      u.graphs.push_back(&graph);
      u.dataset_of.push_back(static_cast<int>(u.dataset_names.size()) - 1);
      u.labels.push_back(graph.class_label);
    }
  }
  u.rule = sampler::SamplingRule::parse(config.sampling_rule);
  return u;
}

struct RunResult {
  std::vector<double> train_loss;                 // per epoch
  std::vector<std::vector<double>> val_accuracy;  // [dataset][epoch]
  std::vector<double> best_val_accuracy;          // [dataset]
};

gnn::HmGnnConfig model_config(const Universe& u, const TrainConfig& config) {
  gnn::HmGnnConfig mc;
  mc.atom_input_dim = u.atom_input_dim;
  mc.motif_input_dim = u.vocab.num_kept();
  mc.hidden = config.hidden_units;
  mc.dropout = config.dropout;
  mc.head_classes = u.head_classes;
  mc.use_motif_tower = config.use_motif_tower;
  mc.gin_eps = config.gin_eps;
  return mc;
}

// One training run over the universe: loss on `is_train` molecules,
// per-epoch accuracy on `is_val` molecules.
RunResult train_eval(const Universe& u, const TrainConfig& config,
                     const std::vector<char>& is_train,
                     const std::vector<char>& is_val, std::uint64_t run_seed,
                     std::unique_ptr<gnn::HmGnnModel>* model_out = nullptr) {
  const int num_molecules = static_cast<int>(u.graphs.size());
  const int num_datasets = static_cast<int>(u.dataset_names.size());

  num::Rng init_rng(num::Rng::derive(run_seed, {1}));
  auto model = std::make_unique<gnn::HmGnnModel>(model_config(u, config),
                                                 init_rng);
  model->reseed_dropout(num::Rng::derive(run_seed, {2}));
  const std::vector<num::Parameter*> params = model->parameters();

  // evaluation inputs are fixed across epochs
  std::vector<int> val_molecules;
  for (int j = 0; j < num_molecules; ++j) {
    if (is_val[j]) val_molecules.push_back(j);
  }
  gnn::AtomBatch eval_atoms;
  std::vector<int> eval_rows, eval_datasets;
  gnn::MotifView full_view;
  if (!val_molecules.empty()) {
    std::vector<const AtomGraph*> val_graphs;
    for (int j : val_molecules) val_graphs.push_back(u.graphs[j]);
    eval_atoms = gnn::build_atom_batch(val_graphs, u.atom_input_dim);
    for (int j : val_molecules) {
      eval_rows.push_back(u.het.molecule_node(j));
      eval_datasets.push_back(u.dataset_of[j]);
    }
  }
  if (config.use_motif_tower) full_view = gnn::MotifView::full(u.het);

  num::AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  adam.weight_decay = config.weight_decay;

  RunResult result;
  result.val_accuracy.assign(num_datasets, {});
  result.best_val_accuracy.assign(num_datasets, 0.0);
  double best_plateau_metric = -1.0;
  int epochs_since_improvement = 0;

  // returns the mean accuracy over datasets present in the validation set
  const auto evaluate_epoch = [&]() -> double {
    num::Tape tape;
    auto fwd = model->forward(tape, eval_atoms, full_view, eval_rows,
                              eval_datasets, {num::Mode::eval, false});
    double metric = 0.0;
    int contributing = 0;
    for (int d = 0; d < num_datasets; ++d) {
      if (!fwd.logits[d]) {
        if (!result.val_accuracy[d].empty()) {
          result.val_accuracy[d].push_back(result.val_accuracy[d].back());
        }
        continue;
      }
      const Matrix& logits = tape.value(*fwd.logits[d]);
      int correct = 0;
      for (std::size_t i = 0; i < fwd.rows_of_dataset[d].size(); ++i) {
        Eigen::Index argmax = 0;
        logits.row(static_cast<Eigen::Index>(i)).maxCoeff(&argmax);
        const int molecule = val_molecules[fwd.rows_of_dataset[d][i]];
        if (static_cast<int>(argmax) == u.labels[molecule]) ++correct;
      }
      const double accuracy =
          static_cast<double>(correct) /
          static_cast<double>(fwd.rows_of_dataset[d].size());
      result.val_accuracy[d].push_back(accuracy);
      result.best_val_accuracy[d] =
          std::max(result.best_val_accuracy[d], accuracy);
      metric += accuracy;
      ++contributing;
    }
    return contributing > 0 ? metric / contributing : 0.0;
  };

  if (config.epochs == 0 && !val_molecules.empty()) {
    evaluate_epoch();  // untrained baseline
  }

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = sampler::batch_starts(
        u.het, config.batch_size,
        num::Rng::derive(run_seed, {3, static_cast<std::uint64_t>(epoch)}));
    double loss_sum = 0.0;
    int loss_count = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      std::vector<int> train_molecules;
      for (int node : batches[bi]) {
        const int j = node - u.het.num_motifs();
        if (is_train[j]) train_molecules.push_back(j);
      }
      if (train_molecules.empty()) continue;

      std::vector<const AtomGraph*> batch_graphs;
      std::vector<int> batch_datasets, batch_labels, starts;
      for (int j : train_molecules) {
        batch_graphs.push_back(u.graphs[j]);
        batch_datasets.push_back(u.dataset_of[j]);
        batch_labels.push_back(u.labels[j]);
        starts.push_back(u.het.molecule_node(j));
      }

      gnn::MotifView view;
      std::vector<int> molecule_rows;
      if (config.use_motif_tower) {
        const auto sub = sampler::sample_subgraph(
            u.het, starts, u.rule,
            num::Rng::derive(run_seed, {4, static_cast<std::uint64_t>(epoch),
                                        static_cast<std::uint64_t>(bi)}));
        view = gnn::MotifView::from_subgraph(u.het, sub);
        for (int node : starts) molecule_rows.push_back(view.row_of(node));
      }

      const auto atoms = gnn::build_atom_batch(batch_graphs, u.atom_input_dim);
      num::Tape tape;
      auto fwd = model->forward(tape, atoms, view, molecule_rows,
                                batch_datasets,
                                {num::Mode::train, false});
      num::Tape::Value loss{};
      bool have_loss = false;
      const double inv_total = 1.0 / static_cast<double>(batch_labels.size());
      for (int d = 0; d < num_datasets; ++d) {
        if (!fwd.logits[d]) continue;
        std::vector<int> labels_d;
        for (int row : fwd.rows_of_dataset[d]) {
          labels_d.push_back(batch_labels[row]);
        }
        auto ce = tape.softmax_cross_entropy(*fwd.logits[d], labels_d);
        auto scaled = tape.scale(
            ce, static_cast<double>(labels_d.size()) * inv_total);
        loss = have_loss ? tape.add(loss, scaled) : scaled;
        have_loss = true;
      }
      const double loss_value = tape.value(loss)(0, 0);
      if (!std::isfinite(loss_value)) {
        throw std::runtime_error("non-finite training loss at epoch " +
                                 std::to_string(epoch));
      }
      tape.backward(loss);
      num::adam_step(params, adam);
      loss_sum += loss_value * static_cast<double>(batch_labels.size());
      loss_count += static_cast<int>(batch_labels.size());
    }
    result.train_loss.push_back(loss_count ? loss_sum / loss_count : 0.0);

    if (val_molecules.empty()) continue;
    const double plateau_metric = evaluate_epoch();
    if (plateau_metric > best_plateau_metric) {
      best_plateau_metric = plateau_metric;
      epochs_since_improvement = 0;
    } else if (++epochs_since_improvement >= config.lr_decay_patience) {
      adam.learning_rate = std::max(
          adam.learning_rate * config.lr_decay_factor, config.min_lr);
      epochs_since_improvement = 0;
    }
  }
  if (model_out) *model_out = std::move(model);
  return result;
}

double population_stddev(const std::vector<double>& values, double mean) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

void finalize(CvReport& report) {
  const double n = static_cast<double>(report.fold_accuracy.size());
  report.mean =
      std::accumulate(report.fold_accuracy.begin(), report.fold_accuracy.end(),
                      0.0) /
      std::max(1.0, n);
  report.stddev = population_stddev(report.fold_accuracy, report.mean);
}

// Deterministic parallel-for over fold indices.
void parallel_folds(int count, int threads, const std::function<void(int)>& work) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed) {
  if (k > n) throw std::invalid_argument("more folds than samples");
  if (k < 1) throw std::invalid_argument("folds must be >= 1");
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  num::Rng rng(seed);
  rng.shuffle(indices);
  std::vector<std::vector<int>> folds(k);
  const int base = n / k;
  const int extra = n % k;
  int at = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    folds[f].assign(indices.begin() + at, indices.begin() + at + size);
    at += size;
  }
  return folds;
}

std::vector<int> stratified_split(const std::vector<int>& labels,
                                  double train_fraction, std::uint64_t seed) {
  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    by_class[labels[i]].push_back(i);
  }
  num::Rng rng(seed);
  std::vector<int> train;
  for (auto& [label, members] : by_class) {
    rng.shuffle(members);
    const int take = std::max(
        1, static_cast<int>(std::llround(train_fraction * members.size())));
    train.insert(train.end(), members.begin(), members.begin() + take);
  }
  std::sort(train.begin(), train.end());
  return train;
}

Metrics evaluate_metrics(const std::vector<int>& labels,
                         const num::Matrix& scores) {
  if (static_cast<Eigen::Index>(labels.size()) != scores.rows()) {
    throw std::invalid_argument("labels/scores size mismatch");
  }
  if (!scores.allFinite()) {
    throw std::invalid_argument("scores must be finite");
  }
  Metrics metrics;
  int correct = 0;
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index argmax = 0;
    scores.row(r).maxCoeff(&argmax);
    if (static_cast<int>(argmax) == labels[r]) ++correct;
  }
  metrics.accuracy =
      labels.empty() ? 0.0
                     : static_cast<double>(correct) / double(labels.size());

  if (scores.cols() != 2) return metrics;
  const int positives =
      static_cast<int>(std::count(labels.begin(), labels.end(), 1));
  const int negatives = static_cast<int>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) return metrics;  // undefined

  // ROC-AUC as the Mann-Whitney rank statistic; tied scores get average rank.
  std::vector<int> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return scores(a, 1) < scores(b, 1);
  });
  std::vector<double> rank(labels.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores(order[j], 1) == scores(order[i], 1)) ++j;
    const double avg = 0.5 * static_cast<double>(i + j + 1);  // 1-based
    for (std::size_t t = i; t < j; ++t) rank[order[t]] = avg;
    i = j;
  }
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) positive_rank_sum += rank[i];
  }
  metrics.roc_auc = (positive_rank_sum -
                     0.5 * positives * (positives + 1.0)) /
                    (static_cast<double>(positives) * negatives);

  // Average precision over the descending-score step curve.
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores(a, 1) != scores(b, 1)) return scores(a, 1) > scores(b, 1);
    return a < b;
  });
  double ap = 0.0;
  int seen_positives = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (labels[order[i]] == 1) {
      ++seen_positives;
      const double precision =
          static_cast<double>(seen_positives) / static_cast<double>(i + 1);
      ap += precision / positives;
    }
  }
  metrics.average_precision = ap;
  return metrics;
}

CvReport fit_cv(const DatasetBundle& bundle, const TrainConfig& config) {
  const auto start_time = std::chrono::steady_clock::now();
  const Universe u = build_universe({&bundle}, config);
  const int n = static_cast<int>(u.graphs.size());
  const auto folds = kfold_split(n, config.folds, config.seed);

  CvReport report;
  report.dataset = bundle.name;
  report.fold_accuracy.resize(folds.size());
  report.folds.resize(folds.size());

  parallel_folds(
      static_cast<int>(folds.size()), config.threads, [&](int f) {
        std::vector<char> is_train(n, 1), is_val(n, 0);
        for (int j : folds[f]) {
          is_train[j] = 0;
          is_val[j] = 1;
        }
        const auto run = train_eval(
            u, config, is_train, is_val,
            num::Rng::derive(config.seed, {100, static_cast<std::uint64_t>(f)}));
        report.fold_accuracy[f] = run.best_val_accuracy[0];
        report.folds[f] = {run.best_val_accuracy[0], run.train_loss,
                           run.val_accuracy[0]};
      });
  finalize(report);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    start_time)
          .count();
  return report;
}

std::vector<CvReport> run_multitask(const std::vector<DatasetBundle>& bundles,
                                    const TrainConfig& config) {
  if (bundles.empty()) throw std::invalid_argument("no bundles");
  const auto start_time = std::chrono::steady_clock::now();
  std::vector<const DatasetBundle*> refs;
  for (const auto& bundle : bundles) refs.push_back(&bundle);
  const Universe u = build_universe(refs, config);
  const int n = static_cast<int>(u.graphs.size());
  const int num_datasets = static_cast<int>(bundles.size());

  std::vector<CvReport> reports(num_datasets);
  for (int d = 0; d < num_datasets; ++d) {
    reports[d].dataset = bundles[d].name;
    reports[d].fold_accuracy.resize(config.repetitions);
    reports[d].folds.resize(config.repetitions);
  }

  parallel_folds(config.repetitions, config.threads, [&](int rep) {
    const std::uint64_t rep_seed =
        num::Rng::derive(config.seed, {200, static_cast<std::uint64_t>(rep)});
    std::vector<char> is_train(n, 0), is_val(n, 0);
    for (int d = 0; d < num_datasets; ++d) {
      std::vector<int> members, labels_d;
      for (int j = 0; j < n; ++j) {
        if (u.dataset_of[j] == d) {
          members.push_back(j);
          labels_d.push_back(u.labels[j]);
        }
      }
      const auto train_local = stratified_split(
          labels_d, config.train_fraction,
          num::Rng::derive(rep_seed, {static_cast<std::uint64_t>(d)}));
      std::vector<char> in_train(members.size(), 0);
      for (int t : train_local) in_train[t] = 1;
      for (std::size_t i = 0; i < members.size(); ++i) {
        (in_train[i] ? is_train : is_val)[members[i]] = 1;
      }
    }
    const auto run = train_eval(u, config, is_train, is_val,
                                num::Rng::derive(rep_seed, {7}));
    for (int d = 0; d < num_datasets; ++d) {
      reports[d].fold_accuracy[rep] = run.best_val_accuracy[d];
      reports[d].folds[rep] = {run.best_val_accuracy[d], run.train_loss,
                               run.val_accuracy[d]};
    }
  });
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    start_time)
          .count();
  for (auto& report : reports) {
    finalize(report);
    report.wall_clock_seconds = elapsed;
  }
  return reports;
}

std::unique_ptr<gnn::HmGnnModel> train_full(const DatasetBundle& bundle,
                                            const TrainConfig& config,
                                            double* final_loss) {
  const Universe u = build_universe({&bundle}, config);
  const int n = static_cast<int>(u.graphs.size());
  std::vector<char> is_train(n, 1), is_val(n, 0);
  std::unique_ptr<gnn::HmGnnModel> model;
  const auto run = train_eval(u, config, is_train, is_val,
                              num::Rng::derive(config.seed, {100, 0}), &model);
  if (final_loss && !run.train_loss.empty()) {
    *final_loss = run.train_loss.back();
  }
  return model;
}

std::vector<SweepRow> run_sweeps(SweepKind kind,
                                 const std::vector<double>& grid,
                                 const DatasetBundle& bundle,
                                 const TrainConfig& config) {
  std::vector<SweepRow> rows;
  for (double value : grid) {
    SweepRow row;
    row.grid_value = value;
    TrainConfig point = config;
    if (kind == SweepKind::keep_ratio) {
      point.keep_ratio = value;
    } else {
      point.batch_size = std::max(1, static_cast<int>(value));
    }
    const Universe u = build_universe({&bundle}, point);
    row.vocab_kept = u.vocab.num_kept();
    row.hetgraph_edges = static_cast<std::int64_t>(u.het.edges.size());
    if (kind == SweepKind::starting_nodes) {
      double total_edges = 0.0;
      constexpr int kSeeds = 30;
      for (int s = 0; s < kSeeds; ++s) {
        const auto batches = sampler::batch_starts(
            u.het, point.batch_size,
            num::Rng::derive(point.seed, {300, static_cast<std::uint64_t>(s)}));
        const auto sub = sampler::sample_subgraph(
            u.het, batches.front(), u.rule,
            num::Rng::derive(point.seed, {301, static_cast<std::uint64_t>(s)}));
        total_edges += static_cast<double>(sub.edge_ids.size());
      }
      row.mean_sampled_edges = total_edges / kSeeds;
    }
    const CvReport report = fit_cv(bundle, point);
    row.mean_accuracy = report.mean;
    row.std_accuracy = report.stddev;
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(SweepKind kind, const std::vector<SweepRow>& rows,
                     const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << (kind == SweepKind::keep_ratio ? "keep_ratio" : "starting_nodes")
      << ",vocab_kept,hetgraph_edges,mean_sampled_edges,mean_accuracy,"
         "std_accuracy\n";
  for (const auto& row : rows) {
    out << row.grid_value << ',' << row.vocab_kept << ',' << row.hetgraph_edges
        << ',' << row.mean_sampled_edges << ',' << row.mean_accuracy << ','
        << row.std_accuracy << '\n';
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate},
          {"hidden_units", hidden_units},
          {"dropout", dropout},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"weight_decay", weight_decay},
          {"lr_decay_factor", lr_decay_factor},
          {"lr_decay_patience", lr_decay_patience},
          {"min_lr", min_lr},
          {"folds", folds},
          {"seed", seed},
          {"keep_ratio", keep_ratio},
          {"sampling_rule", sampling_rule},
          {"threads", threads},
          {"use_motif_tower", use_motif_tower},
          {"drop_motif_motif", drop_motif_motif},
          {"gin_eps", gin_eps},
          {"train_fraction", train_fraction},
          {"repetitions", repetitions}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig config;
  nlohmann::json defaults = config.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  const auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  get("learning_rate", config.learning_rate);
  get("hidden_units", config.hidden_units);
  get("dropout", config.dropout);
  get("epochs", config.epochs);
  get("batch_size", config.batch_size);
  get("weight_decay", config.weight_decay);
  get("lr_decay_factor", config.lr_decay_factor);
  get("lr_decay_patience", config.lr_decay_patience);
  get("min_lr", config.min_lr);
  get("folds", config.folds);
  get("seed", config.seed);
  get("keep_ratio", config.keep_ratio);
  get("sampling_rule", config.sampling_rule);
  get("threads", config.threads);
  get("use_motif_tower", config.use_motif_tower);
  get("drop_motif_motif", config.drop_motif_motif);
  get("gin_eps", config.gin_eps);
  get("train_fraction", config.train_fraction);
  get("repetitions", config.repetitions);
  return config;
}

nlohmann::json CvReport::to_json() const {
  nlohmann::json folds_json = nlohmann::json::array();
  for (const auto& fold : folds) {
    folds_json.push_back({{"best_val_accuracy", fold.best_val_accuracy},
                          {"train_loss", fold.train_loss},
                          {"val_accuracy", fold.val_accuracy}});
  }
  return {{"dataset", dataset},
          {"fold_accuracy", fold_accuracy},
          {"mean", mean},
          {"stddev", stddev},
          {"folds", std::move(folds_json)},
          {"wall_clock_seconds", wall_clock_seconds}};
}

void CvReport::write_csv(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "dataset,fold,epoch,metric,value\n";
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t e = 0; e < folds[f].train_loss.size(); ++e) {
      out << dataset << ',' << f << ',' << e << ",train_loss,"
          << folds[f].train_loss[e] << '\n';
    }
    for (std::size_t e = 0; e < folds[f].val_accuracy.size(); ++e) {
      out << dataset << ',' << f << ',' << e << ",val_accuracy,"
          << folds[f].val_accuracy[e] << '\n';
    }
    out << dataset << ',' << f << ",-1,best_val_accuracy,"
        << folds[f].best_val_accuracy << '\n';
  }
  out << dataset << ",-1,-1,mean_accuracy," << mean << '\n';
  out << dataset << ",-1,-1,std_accuracy," << stddev << '\n';
}

}  // namespace hmg::trainer
