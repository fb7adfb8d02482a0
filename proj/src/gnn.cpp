#include "hmg/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace hmg::gnn {
namespace {

void glorot(Parameter& weight, num::Rng& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(weight.value.rows() +
                                          weight.value.cols()));
  for (Eigen::Index r = 0; r < weight.value.rows(); ++r) {
    for (Eigen::Index c = 0; c < weight.value.cols(); ++c) {
      weight.value(r, c) = rng.uniform(-bound, bound);
    }
  }
}

}  // namespace

GinLayer::GinLayer(const std::string& name, Eigen::Index in, Eigen::Index out)
    : in_dim(in),
      out_dim(out),
      w1(name + ".w1", in, out),
      b1(name + ".b1", 1, out),
      w2(name + ".w2", out, out),
      b2(name + ".b2", 1, out),
      bn1_gamma(name + ".bn1.gamma", 1, out),
      bn1_beta(name + ".bn1.beta", 1, out),
      bn2_gamma(name + ".bn2.gamma", 1, out),
      bn2_beta(name + ".bn2.beta", 1, out),
      bn1(out),
      bn2(out) {
  bn1_gamma.value.setOnes();
  bn2_gamma.value.setOnes();
}

std::vector<Parameter*> GinLayer::parameters() {
  return {&w1, &b1, &w2, &b2, &bn1_gamma, &bn1_beta, &bn2_gamma, &bn2_beta};
}

Head::Head(const std::string& name, Eigen::Index in, Eigen::Index hidden,
           Eigen::Index out)
    : w1(name + ".w1", in, hidden),
      b1(name + ".b1", 1, hidden),
      w2(name + ".w2", hidden, out),
      b2(name + ".b2", 1, out) {}

std::vector<Parameter*> Head::parameters() {
  return {&w1, &b1, &w2, &b2};
}

AtomBatch build_atom_batch(const std::vector<const AtomGraph*>& graphs,
                           int input_dim) {
  AtomBatch batch;
  batch.num_graphs = static_cast<int>(graphs.size());
  int total_nodes = 0;
  for (const AtomGraph* graph : graphs) {
    if (graph->num_nodes() == 0) {
      throw std::invalid_argument("empty atom graph in batch");
    }
    total_nodes += graph->num_nodes();
  }
  batch.features = Matrix::Zero(total_nodes, input_dim);
  int offset = 0;
  for (int g = 0; g < batch.num_graphs; ++g) {
    const AtomGraph& graph = *graphs[g];
    for (int v = 0; v < graph.num_nodes(); ++v) {
      const int label = graph.node_labels[v];
      if (label >= input_dim) {
        throw std::invalid_argument("node label exceeds feature width");
      }
      batch.features(offset + v, label) = 1.0;
      batch.pooling.push_back({offset + v, g, 1.0});
    }
    for (const auto& [u, v] : graph.edges) {
      batch.messages.push_back({offset + u, offset + v, 1.0});
      batch.messages.push_back({offset + v, offset + u, 1.0});
    }
    offset += graph.num_nodes();
  }
  return batch;
}

MotifView MotifView::full(const hetgraph::HeteroGraph& het) {
  MotifView view;
  view.features = het.features;
  view.view_nodes.resize(het.num_nodes());
  for (int i = 0; i < het.num_nodes(); ++i) view.view_nodes[i] = i;
  for (const auto& edge : het.edges) {
    view.messages.push_back({edge.u, edge.v, edge.weight});
    view.messages.push_back({edge.v, edge.u, edge.weight});
  }
  return view;
}

MotifView MotifView::from_subgraph(const hetgraph::HeteroGraph& het,
                                   const sampler::SampledSubgraph& sub) {
  MotifView view;
  view.view_nodes = sub.nodes;  // ascending
  std::map<int, int> row;
  for (int i = 0; i < static_cast<int>(sub.nodes.size()); ++i) {
    row[sub.nodes[i]] = i;
  }
  view.features.resize(static_cast<Eigen::Index>(sub.nodes.size()),
                       het.features.cols());
  for (int i = 0; i < static_cast<int>(sub.nodes.size()); ++i) {
    view.features.row(i) = het.features.row(sub.nodes[i]);
  }
  for (int e : sub.edge_ids) {
    const auto& edge = het.edges[e];
    const int u = row.at(edge.u);
    const int v = row.at(edge.v);
    view.messages.push_back({u, v, edge.weight});
    view.messages.push_back({v, u, edge.weight});
  }
  return view;
}

int MotifView::row_of(int het_node) const {
  const auto it =
      std::lower_bound(view_nodes.begin(), view_nodes.end(), het_node);
  if (it == view_nodes.end() || *it != het_node) {
    throw std::out_of_range("node " + std::to_string(het_node) +
                            " absent from the sampled subgraph");
  }
  return static_cast<int>(it - view_nodes.begin());
}

HmGnnModel::HmGnnModel(HmGnnConfig config, num::Rng& init_rng)
    : config_(config), dropout_rng_(num::Rng::derive(0, {0})) {
  if (config_.atom_input_dim <= 0) {
    throw std::invalid_argument("atom_input_dim must be positive");
  }
  for (int l = 0; l < HmGnnConfig::kAtomLayers; ++l) {
    atom_layers_.emplace_back("atom." + std::to_string(l),
                              l == 0 ? config_.atom_input_dim : config_.hidden,
                              config_.hidden);
    atom_layers_.back().gin_eps = config_.gin_eps;
  }
  if (config_.use_motif_tower) {
    if (config_.motif_input_dim <= 0) {
      throw std::invalid_argument("motif_input_dim must be positive");
    }
    for (int l = 0; l < HmGnnConfig::kMotifLayers; ++l) {
      motif_layers_.emplace_back(
          "motif." + std::to_string(l),
          l == 0 ? config_.motif_input_dim : config_.hidden, config_.hidden);
      motif_layers_.back().gin_eps = config_.gin_eps;
    }
  }
  for (int d = 0; d < static_cast<int>(config_.head_classes.size()); ++d) {
    heads_.emplace_back("head." + std::to_string(d), config_.head_input_dim(),
                        config_.hidden, config_.head_classes[d]);
  }
  std::vector<Parameter*> weights;
  for (auto& layer : atom_layers_) weights.insert(weights.end(), {&layer.w1, &layer.w2});
  for (auto& layer : motif_layers_) weights.insert(weights.end(), {&layer.w1, &layer.w2});
  for (auto& head : heads_) weights.insert(weights.end(), {&head.w1, &head.w2});
  for (Parameter* weight : weights) glorot(*weight, init_rng);
}

std::vector<Parameter*> HmGnnModel::parameters() {
  std::vector<Parameter*> all;
  for (auto& layer : atom_layers_) {
    for (Parameter* p : layer.parameters()) all.push_back(p);
  }
  for (auto& layer : motif_layers_) {
    for (Parameter* p : layer.parameters()) all.push_back(p);
  }
  for (auto& head : heads_) {
    for (Parameter* p : head.parameters()) all.push_back(p);
  }
  return all;
}

Tape::Value HmGnnModel::gin_forward(
    Tape& tape, GinLayer& layer, Tape::Value x,
    const std::vector<num::SegmentEntry>& messages, Eigen::Index num_nodes,
    Mode mode) {
  Tape::Value aggregated = tape.segment_sum(x, messages, num_nodes);
  Tape::Value combined =
      tape.add(tape.scale(x, 1.0 + layer.gin_eps), aggregated);
  Tape::Value h1 = tape.relu(tape.batch_norm(
      tape.add_bias(tape.matmul(combined, tape.param(layer.w1)),
                    tape.param(layer.b1)),
      tape.param(layer.bn1_gamma), tape.param(layer.bn1_beta), layer.bn1,
      mode));
  return tape.relu(tape.batch_norm(
      tape.add_bias(tape.matmul(h1, tape.param(layer.w2)),
                    tape.param(layer.b2)),
      tape.param(layer.bn2_gamma), tape.param(layer.bn2_beta), layer.bn2,
      mode));
}

Tape::Value HmGnnModel::atom_tower_forward(Tape& tape, const AtomBatch& batch,
                                           Mode mode) {
  if (batch.num_graphs == 0) throw std::invalid_argument("empty batch");
  const Eigen::Index n = batch.features.rows();
  Tape::Value h = tape.input(batch.features);
  std::vector<Tape::Value> pooled;
  pooled.push_back(tape.segment_sum(h, batch.pooling, batch.num_graphs));
  for (auto& layer : atom_layers_) {
    h = gin_forward(tape, layer, h, batch.messages, n, mode);
    pooled.push_back(tape.segment_sum(h, batch.pooling, batch.num_graphs));
  }
  return tape.concat_cols(pooled);
}

Tape::Value HmGnnModel::motif_tower_forward(Tape& tape, const MotifView& view,
                                            Mode mode) {
  if (!config_.use_motif_tower) {
    throw std::logic_error("motif tower disabled in this configuration");
  }
  const Eigen::Index n = view.features.rows();
  Tape::Value h = tape.input(view.features);
  for (auto& layer : motif_layers_) {
    h = gin_forward(tape, layer, h, view.messages, n, mode);
  }
  return h;
}

HmGnnModel::ForwardResult HmGnnModel::forward(
    Tape& tape, const AtomBatch& atoms, const MotifView& view,
    const std::vector<int>& molecule_rows, const std::vector<int>& dataset_of,
    const ForwardOptions& options) {
  if (static_cast<int>(dataset_of.size()) != atoms.num_graphs) {
    throw std::invalid_argument("dataset routing size mismatch");
  }
  for (int d : dataset_of) {
    if (d < 0 || d >= static_cast<int>(heads_.size())) {
      throw std::invalid_argument("unknown dataset id " + std::to_string(d));
    }
  }

  Tape::Value atom_embed = atom_tower_forward(tape, atoms, options.mode);
  atom_embed =
      tape.dropout(atom_embed, config_.dropout, options.mode, dropout_rng_);

  Tape::Value embedding = atom_embed;
  if (config_.use_motif_tower) {
    if (static_cast<int>(molecule_rows.size()) != atoms.num_graphs) {
      throw std::invalid_argument("molecule row mapping size mismatch");
    }
    Tape::Value motif_all = motif_tower_forward(tape, view, options.mode);
    Tape::Value motif_embed = tape.gather_rows(motif_all, molecule_rows);
    if (options.zero_motif_embedding) {
      motif_embed = tape.scale(motif_embed, 0.0);
    }
    motif_embed =
        tape.dropout(motif_embed, config_.dropout, options.mode, dropout_rng_);
    embedding = tape.concat_cols({atom_embed, motif_embed});
  }

  ForwardResult result;
  result.logits.resize(heads_.size());
  result.rows_of_dataset.resize(heads_.size());
  for (int i = 0; i < atoms.num_graphs; ++i) {
    result.rows_of_dataset[dataset_of[i]].push_back(i);
  }
  for (int d = 0; d < static_cast<int>(heads_.size()); ++d) {
    if (result.rows_of_dataset[d].empty()) continue;
    Tape::Value x = tape.gather_rows(embedding, result.rows_of_dataset[d]);
    Tape::Value h = tape.relu(tape.add_bias(
        tape.matmul(x, tape.param(heads_[d].w1)), tape.param(heads_[d].b1)));
    h = tape.dropout(h, config_.dropout, options.mode, dropout_rng_);
    result.logits[d] = tape.add_bias(tape.matmul(h, tape.param(heads_[d].w2)),
                                     tape.param(heads_[d].b2));
  }
  return result;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = data.at(i++).get<double>();
    }
  }
  return m;
}

nlohmann::json param_to_json(const Parameter& p) {
  return {{"value", matrix_to_json(p.value)},
          {"adam_m", matrix_to_json(p.adam_m)},
          {"adam_v", matrix_to_json(p.adam_v)},
          {"step_count", p.step_count}};
}

void param_from_json(Parameter& p, const nlohmann::json& j) {
  p.value = matrix_from_json(j.at("value"));
  p.adam_m = matrix_from_json(j.at("adam_m"));
  p.adam_v = matrix_from_json(j.at("adam_v"));
  p.step_count = j.at("step_count").get<std::int64_t>();
  p.grad = Matrix::Zero(p.value.rows(), p.value.cols());
}

nlohmann::json bn_to_json(const num::BatchNormState& bn) {
  nlohmann::json mean = nlohmann::json::array();
  nlohmann::json var = nlohmann::json::array();
  for (Eigen::Index i = 0; i < bn.running_mean.cols(); ++i) {
    mean.push_back(bn.running_mean(i));
    var.push_back(bn.running_var(i));
  }
  return {{"running_mean", std::move(mean)}, {"running_var", std::move(var)}};
}

void bn_from_json(num::BatchNormState& bn, const nlohmann::json& j) {
  const auto mean = j.at("running_mean").get<std::vector<double>>();
  const auto var = j.at("running_var").get<std::vector<double>>();
  bn.running_mean.resize(static_cast<Eigen::Index>(mean.size()));
  bn.running_var.resize(static_cast<Eigen::Index>(var.size()));
  for (std::size_t i = 0; i < mean.size(); ++i) {
    bn.running_mean(static_cast<Eigen::Index>(i)) = mean[i];
    bn.running_var(static_cast<Eigen::Index>(i)) = var[i];
  }
}

std::vector<num::BatchNormState*> bn_states(HmGnnModel& model) {
  std::vector<num::BatchNormState*> states;
  for (auto& layer : model.atom_layers()) {
    states.push_back(&layer.bn1);
    states.push_back(&layer.bn2);
  }
  for (auto& layer : model.motif_layers()) {
    states.push_back(&layer.bn1);
    states.push_back(&layer.bn2);
  }
  return states;
}

}  // namespace

void save_checkpoint(HmGnnModel& model, const std::filesystem::path& file) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  const auto& config = model.config();
  doc["config"] = {{"atom_input_dim", config.atom_input_dim},
                   {"motif_input_dim", config.motif_input_dim},
                   {"hidden", config.hidden},
                   {"dropout", config.dropout},
                   {"head_classes", config.head_classes},
                   {"use_motif_tower", config.use_motif_tower},
                   {"gin_eps", config.gin_eps}};
  nlohmann::json params;
  for (Parameter* p : model.parameters()) params[p->name] = param_to_json(*p);
  doc["parameters"] = std::move(params);
  nlohmann::json bns = nlohmann::json::array();
  for (num::BatchNormState* bn : bn_states(model)) {
    bns.push_back(bn_to_json(*bn));
  }
  doc["batch_norm"] = std::move(bns);
  const auto rng_state = model.dropout_rng().state();
  doc["rng"] = {{"words",
                 {rng_state.words[0], rng_state.words[1], rng_state.words[2],
                  rng_state.words[3]}},
                {"has_spare", rng_state.has_spare},
                {"spare", rng_state.spare}};

  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << doc.dump() << '\n';
}

void load_checkpoint(HmGnnModel& model, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("missing checkpoint: " + file.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.at("schema_version").get<int>() != 1) {
    throw std::runtime_error("checkpoint schema mismatch");
  }
  const auto& config = doc.at("config");
  if (config.at("atom_input_dim").get<int>() != model.config().atom_input_dim ||
      config.at("hidden").get<int>() != model.config().hidden ||
      config.at("use_motif_tower").get<bool>() !=
          model.config().use_motif_tower) {
    throw std::runtime_error("checkpoint architecture mismatch");
  }
  for (Parameter* p : model.parameters()) {
    param_from_json(*p, doc.at("parameters").at(p->name));
  }
  const auto& bns = doc.at("batch_norm");
  const auto states = bn_states(model);
  for (std::size_t i = 0; i < states.size(); ++i) {
    bn_from_json(*states[i], bns.at(i));
  }
  num::Rng::State rng_state{};
  for (int i = 0; i < 4; ++i) {
    rng_state.words[i] = doc.at("rng").at("words").at(i).get<std::uint64_t>();
  }
  rng_state.has_spare = doc.at("rng").at("has_spare").get<bool>();
  rng_state.spare = doc.at("rng").at("spare").get<double>();
  num::Rng rng(0);
  rng.set_state(rng_state);
  model.dropout_rng() = rng;
}

}  // namespace hmg::gnn
