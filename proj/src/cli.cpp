#include "hmg/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "hmg/dataset.hpp"
#include "hmg/fetch.hpp"
#include "hmg/gnn.hpp"
#include "hmg/hetgraph.hpp"
#include "hmg/motif.hpp"
#include "hmg/sampler.hpp"
#include "hmg/trainer.hpp"
#include "hmg/version.hpp"
#include "json.hpp"

namespace hmg::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path default_data_dir() {
  if (const char* env = std::getenv("HMG_CACHE")) return env;
  return "data";
}

struct CommonArgs {
  std::vector<std::string> datasets;
  std::string data_dir = default_data_dir().string();
  std::string out_dir = "out";
  std::string config_file;
  trainer::TrainConfig config;

  // flag presence, to let flags override config-file values
  CLI::App* cmd = nullptr;

  void add_dataset_options(CLI::App& app, bool required = true) {
    auto* opt = app.add_option("-d,--dataset", datasets,
                               "dataset name(s), e.g. MUTAG or PTC");
    if (required) opt->required();
    app.add_option("--data-dir", data_dir,
                   "directory holding <name>/<name>_*.txt (default: "
                   "$HMG_CACHE or ./data)");
  }

  void add_run_options(CLI::App& app) {
    cmd = &app;
    app.add_option("-o,--out", out_dir, "output directory for artifacts");
    app.add_option("-c,--config", config_file,
                   "JSON config file with flat keys; flags override it");
    app.add_option("--seed", config.seed, "RNG seed");
    app.add_option("--lr", config.learning_rate, "learning rate");
    app.add_option("--hidden", config.hidden_units, "hidden units");
    app.add_option("--dropout", config.dropout, "dropout probability");
    app.add_option("--epochs", config.epochs, "training epochs");
    app.add_option("--batch-size", config.batch_size, "molecules per batch");
    app.add_option("--weight-decay", config.weight_decay, "L2 weight decay");
    app.add_option("--folds", config.folds, "cross-validation folds");
    app.add_option("--keep-ratio", config.keep_ratio,
                   "fraction of top motifs kept");
    app.add_option("--rule", config.sampling_rule,
                   "edge sampling rule, e.g. all,1,2");
    app.add_option("--threads", config.threads, "worker thread cap");
    app.add_option("--train-fraction", config.train_fraction,
                   "train split fraction (multitask)");
    app.add_option("--repetitions", config.repetitions,
                   "split repetitions (multitask)");
    app.add_flag("--no-motif-tower", "disable the motif tower (GIN ablation)");
    app.add_flag("--drop-motif-motif",
                 "drop motif-motif edges (interaction ablation)");
  }

  /// Layer config-file values under explicitly passed flags.
  void resolve() {
    if (config_file.empty()) {
      if (cmd) {
        config.use_motif_tower = cmd->count("--no-motif-tower") == 0;
        config.drop_motif_motif = cmd->count("--drop-motif-motif") > 0;
      }
      return;
    }
    std::ifstream in(config_file);
    if (!in) throw std::runtime_error("missing config file: " + config_file);
    trainer::TrainConfig base = trainer::TrainConfig::from_json(json::parse(in));
    const auto keep = [&](const char* flag, auto member) {
      if (cmd && cmd->count(flag) > 0) base.*member = config.*member;
    };
    keep("--seed", &trainer::TrainConfig::seed);
    keep("--lr", &trainer::TrainConfig::learning_rate);
    keep("--hidden", &trainer::TrainConfig::hidden_units);
    keep("--dropout", &trainer::TrainConfig::dropout);
    keep("--epochs", &trainer::TrainConfig::epochs);
    keep("--batch-size", &trainer::TrainConfig::batch_size);
    keep("--weight-decay", &trainer::TrainConfig::weight_decay);
    keep("--folds", &trainer::TrainConfig::folds);
    keep("--keep-ratio", &trainer::TrainConfig::keep_ratio);
    keep("--rule", &trainer::TrainConfig::sampling_rule);
    keep("--threads", &trainer::TrainConfig::threads);
    keep("--train-fraction", &trainer::TrainConfig::train_fraction);
    keep("--repetitions", &trainer::TrainConfig::repetitions);
    if (cmd && cmd->count("--no-motif-tower") > 0) base.use_motif_tower = false;
    if (cmd && cmd->count("--drop-motif-motif") > 0) {
      base.drop_motif_motif = true;
    }
    config = base;
  }

  DatasetBundle load(const std::string& name) const {
    const fs::path dir = fs::path(data_dir) / name;
    if (!fs::exists(dir / (name + "_A.txt"))) {
      throw std::runtime_error("dataset " + name + " not found under " +
                               dir.string() + "; run `hmg fetch -d " + name +
                               "` or point --data-dir at it");
    }
    return graphio::parse_tudataset(dir, name);
  }

  std::vector<DatasetBundle> load_all() const {
    std::vector<DatasetBundle> bundles;
    for (const auto& name : datasets) bundles.push_back(load(name));
    return bundles;
  }

  json resolved_config(const std::string& command) const {
    json doc = config.to_json();
    doc["command"] = command;
    doc["datasets"] = datasets;
    doc["data_dir"] = data_dir;
    doc["out"] = out_dir;
    return doc;
  }

  fs::path prepare_out(const std::string& command) const {
    fs::create_directories(out_dir);
    json snapshot = {{"version", kVersion},
                     {"config", resolved_config(command)}};
    std::ofstream out(fs::path(out_dir) / "config.json");
    out << snapshot.dump(2) << '\n';
    return out_dir;
  }
};

void write_artifact(const fs::path& file, json body, const json& config) {
  body["version"] = kVersion;
  body["config"] = config;
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << body.dump(2) << '\n';
  std::cerr << "wrote " << file.string() << '\n';
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"heterogeneous motif graph construction and two-tower GIN "
               "training"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonArgs fetch_args, vocab_args, graph_args, sample_args, train_args,
      cv_args, multi_args, sweep_args;

  auto* cmd_fetch = app.add_subcommand(
      "fetch", "download TUDataset archives into the data directory");
  fetch_args.add_dataset_options(*cmd_fetch);
  std::string mirror;
  cmd_fetch->add_option("--mirror", mirror,
                        "archive host override (or $HMG_MIRROR)");

  auto* cmd_vocab = app.add_subcommand(
      "vocab", "extract motifs and build the TF-IDF motif vocabulary");
  vocab_args.add_dataset_options(*cmd_vocab);
  vocab_args.add_run_options(*cmd_vocab);
  std::string overlap_with;
  std::string overlap_mode = "first";
  cmd_vocab->add_option("--overlap-with", overlap_with,
                        "second dataset; report vocabulary overlap");
  cmd_vocab->add_option("--overlap-mode", overlap_mode,
                        "overlap denominator: first|jaccard")
      ->check(CLI::IsMember({"first", "jaccard"}));

  auto* cmd_graph = app.add_subcommand(
      "graph", "build the heterogeneous motif graph and write it as JSON");
  graph_args.add_dataset_options(*cmd_graph);
  graph_args.add_run_options(*cmd_graph);

  auto* cmd_sample = app.add_subcommand(
      "sample", "sample a typed-BFS computational subgraph");
  sample_args.add_dataset_options(*cmd_sample);
  sample_args.add_run_options(*cmd_sample);
  int num_starts = 1;
  cmd_sample->add_option("--starts", num_starts,
                         "number of starting molecule nodes");

  auto* cmd_train = app.add_subcommand(
      "train", "train on the full dataset and write a checkpoint");
  train_args.add_dataset_options(*cmd_train);
  train_args.add_run_options(*cmd_train);

  auto* cmd_cv = app.add_subcommand(
      "cv", "10-fold cross-validation with the paper's protocol");
  cv_args.add_dataset_options(*cmd_cv);
  cv_args.add_run_options(*cmd_cv);

  auto* cmd_multi = app.add_subcommand(
      "multitask", "joint training over several datasets, separate heads");
  multi_args.add_dataset_options(*cmd_multi);
  multi_args.add_run_options(*cmd_multi);

  auto* cmd_sweep = app.add_subcommand(
      "sweep", "keep-ratio or starting-nodes sweep, CSV per grid point");
  sweep_args.add_dataset_options(*cmd_sweep);
  sweep_args.add_run_options(*cmd_sweep);
  std::string sweep_kind = "keep_ratio";
  std::vector<double> sweep_grid;
  cmd_sweep->add_option("--kind", sweep_kind, "keep_ratio|starting_nodes")
      ->check(CLI::IsMember({"keep_ratio", "starting_nodes"}));
  cmd_sweep->add_option("--grid", sweep_grid, "grid values")->required();

  std::vector<const char*> argv;
  argv.push_back("hmg");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (cmd_fetch->parsed()) {
    for (const auto& name : fetch_args.datasets) {
      const auto dir = fetch::fetch_dataset(name, fetch_args.data_dir, mirror);
      std::cout << dir.string() << '\n';
    }
    return 0;
  }

  if (cmd_vocab->parsed()) {
    vocab_args.resolve();
    const auto out = vocab_args.prepare_out("vocab");
    const auto bundles = vocab_args.load_all();
    const auto vocab =
        motif::build_vocabulary(bundles, vocab_args.config.keep_ratio);
    json body = motif::vocabulary_to_json(vocab);
    body["vocab_size"] = vocab.size();
    body["vocab_kept"] = vocab.num_kept();
    if (!overlap_with.empty()) {
      const auto other_bundle = vocab_args.load(overlap_with);
      const auto other = motif::build_vocabulary({other_bundle}, 1.0);
      body["overlap"] = {
          {"with", overlap_with},
          {"mode", overlap_mode},
          {"value",
           motif::vocab_overlap(vocab, other,
                                overlap_mode == "first"
                                    ? motif::OverlapMode::first
                                    : motif::OverlapMode::jaccard)}};
    }
    write_artifact(out / "vocab.json", std::move(body),
                   vocab_args.resolved_config("vocab"));
    return 0;
  }

  if (cmd_graph->parsed()) {
    graph_args.resolve();
    const auto out = graph_args.prepare_out("graph");
    const auto bundles = graph_args.load_all();
    const auto vocab =
        motif::build_vocabulary(bundles, graph_args.config.keep_ratio);
    auto built = hetgraph::build_hetero_graph(bundles, vocab);
    write_artifact(out / "vocab.json", motif::vocabulary_to_json(vocab),
                   graph_args.resolved_config("graph"));
    write_artifact(out / "hetgraph.json",
                   hetgraph::hetero_graph_to_json(built.graph),
                   graph_args.resolved_config("graph"));
    return 0;
  }

  if (cmd_sample->parsed()) {
    sample_args.resolve();
    const auto out = sample_args.prepare_out("sample");
    const auto bundles = sample_args.load_all();
    const auto vocab =
        motif::build_vocabulary(bundles, sample_args.config.keep_ratio);
    auto built = hetgraph::build_hetero_graph(bundles, vocab);
    const auto rule =
        sampler::SamplingRule::parse(sample_args.config.sampling_rule);
    const auto batches = sampler::batch_starts(built.graph, num_starts,
                                               sample_args.config.seed);
    const auto sub = sampler::sample_subgraph(built.graph, batches.front(),
                                              rule, sample_args.config.seed);
    write_artifact(out / "subgraph.json",
                   sampler::subgraph_to_json(built.graph, sub),
                   sample_args.resolved_config("sample"));
    return 0;
  }

  if (cmd_train->parsed()) {
    train_args.resolve();
    const auto out = train_args.prepare_out("train");
    const auto bundle = train_args.load(train_args.datasets.at(0));
    double final_loss = 0.0;
    auto model = trainer::train_full(bundle, train_args.config, &final_loss);
    gnn::save_checkpoint(*model, out / "checkpoint.json");
    write_artifact(out / "report.json",
                   json{{"dataset", bundle.name}, {"final_loss", final_loss}},
                   train_args.resolved_config("train"));
    return 0;
  }

  if (cmd_cv->parsed()) {
    cv_args.resolve();
    const auto out = cv_args.prepare_out("cv");
    const auto bundle = cv_args.load(cv_args.datasets.at(0));
    const auto report = trainer::fit_cv(bundle, cv_args.config);
    write_artifact(out / "report.json", json{{"report", report.to_json()}},
                   cv_args.resolved_config("cv"));
    report.write_csv(out / "report.csv");
    std::cout << bundle.name << " mean accuracy " << report.mean << " +- "
              << report.stddev << '\n';
    return 0;
  }

  if (cmd_multi->parsed()) {
    multi_args.resolve();
    const auto out = multi_args.prepare_out("multitask");
    const auto bundles = multi_args.load_all();
    const auto reports = trainer::run_multitask(bundles, multi_args.config);
    json body;
    body["reports"] = json::array();
    for (const auto& report : reports) {
      body["reports"].push_back(report.to_json());
      std::cout << report.dataset << " mean accuracy " << report.mean
                << " +- " << report.stddev << '\n';
    }
    write_artifact(out / "report.json", std::move(body),
                   multi_args.resolved_config("multitask"));
    for (const auto& report : reports) {
      report.write_csv(out / ("report_" + report.dataset + ".csv"));
    }
    return 0;
  }

  if (cmd_sweep->parsed()) {
    sweep_args.resolve();
    const auto out = sweep_args.prepare_out("sweep");
    const auto bundle = sweep_args.load(sweep_args.datasets.at(0));
    const auto kind = sweep_kind == "keep_ratio"
                          ? trainer::SweepKind::keep_ratio
                          : trainer::SweepKind::starting_nodes;
    const auto rows =
        trainer::run_sweeps(kind, sweep_grid, bundle, sweep_args.config);
    trainer::write_sweep_csv(kind, rows, out / "sweep.csv");
    json body;
    body["rows"] = json::array();
    for (const auto& row : rows) {
      body["rows"].push_back({{"grid_value", row.grid_value},
                              {"vocab_kept", row.vocab_kept},
                              {"hetgraph_edges", row.hetgraph_edges},
                              {"mean_sampled_edges", row.mean_sampled_edges},
                              {"mean_accuracy", row.mean_accuracy},
                              {"std_accuracy", row.std_accuracy}});
    }
    write_artifact(out / "sweep.json", std::move(body),
                   sweep_args.resolved_config("sweep"));
    return 0;
  }
  return 2;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const std::exception& e) {
    json record = {{"error", e.what()}};
    if (!args.empty()) record["command"] = args.front();
    std::cerr << record.dump() << '\n';
    return 1;
  }
}

int run_command(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args);
}

}  // namespace hmg::cli
