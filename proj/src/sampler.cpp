#include "hmg/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace hmg::sampler {

SamplingRule SamplingRule::parse(const std::string& text) {
  SamplingRule rule;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string token = text.substr(pos, comma - pos);
    // trim spaces
    while (!token.empty() && token.front() == ' ') token.erase(token.begin());
    while (!token.empty() && token.back() == ' ') token.pop_back();
    if (token.empty()) throw std::invalid_argument("empty rule entry");
    if (token == "all" || token == "ALL" || token == "inf") {
      rule.budgets.push_back(kAll);
    } else {
      std::int64_t value = 0;
      auto [ptr, ec] =
          std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
        throw std::invalid_argument("bad rule entry '" + token + "'");
      }
      rule.budgets.push_back(value);
    }
    if (comma == text.size()) break;
    pos = comma + 1;
  }
  if (rule.budgets.empty()) throw std::invalid_argument("empty sampling rule");
  if (rule.budgets[0] != kAll) {
    throw std::invalid_argument("first rule entry must be 'all'");
  }
  return rule;
}

std::string SamplingRule::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (i) out += ',';
    out += budgets[i] == kAll ? "all" : std::to_string(budgets[i]);
  }
  return out;
}

std::vector<std::vector<int>> batch_starts(const hetgraph::HeteroGraph& het,
                                           int batch_size,
                                           std::uint64_t seed) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  std::vector<int> molecules(het.num_molecules());
  for (int j = 0; j < het.num_molecules(); ++j) {
    molecules[j] = het.molecule_node(j);
  }
  num::Rng rng(seed);
  rng.shuffle(molecules);
  std::vector<std::vector<int>> batches;
  for (std::size_t begin = 0; begin < molecules.size(); begin += batch_size) {
    const std::size_t end =
        std::min(begin + static_cast<std::size_t>(batch_size),
                 molecules.size());
    batches.emplace_back(molecules.begin() + begin, molecules.begin() + end);
  }
  return batches;
}

SampledSubgraph sample_subgraph(const hetgraph::HeteroGraph& het,
                                const std::vector<int>& starts,
                                const SamplingRule& rule, std::uint64_t seed) {
  if (rule.budgets.empty() || rule.budgets[0] != SamplingRule::kAll) {
    throw std::invalid_argument("invalid sampling rule");
  }
  for (int node : starts) {
    if (!het.is_molecule(node)) {
      throw std::invalid_argument("start node " + std::to_string(node) +
                                  " is not a molecule node");
    }
  }

  num::Rng rng(seed);
  const auto& adjacency = het.adjacency();

  SampledSubgraph sub;
  sub.starting_nodes = starts;
  std::set<int> nodes(starts.begin(), starts.end());
  std::set<int> edge_set;
  for (int node : nodes) sub.hop_of_node[node] = 0;

  // hop 1: every motif-molecule edge incident to the starting molecules
  std::vector<int> frontier;  // motif nodes first reached at the previous hop
  for (int start : starts) {
    for (int e : adjacency[start]) {
      const auto& edge = het.edges[e];
      if (edge.type != hetgraph::EdgeType::motif_molecule) continue;
      edge_set.insert(e);
      const int other = edge.u == start ? edge.v : edge.u;
      if (nodes.insert(other).second) {
        sub.hop_of_node[other] = 1;
        frontier.push_back(other);
      }
    }
  }
  std::sort(frontier.begin(), frontier.end());
  frontier.erase(std::unique(frontier.begin(), frontier.end()),
                 frontier.end());

  for (int hop = 2; hop <= rule.depth(); ++hop) {
    const std::int64_t budget = rule.budgets[hop - 1];
    std::vector<int> next_frontier;
    for (int node : frontier) {
      // candidate motif-motif edges not yet taken
      std::vector<int> candidates;
      for (int e : adjacency[node]) {
        if (het.edges[e].type == hetgraph::EdgeType::motif_motif &&
            !edge_set.count(e)) {
          candidates.push_back(e);
        }
      }
      const std::int64_t take =
          std::min<std::int64_t>(budget, candidates.size());
      // partial Fisher-Yates: uniform without replacement
      for (std::int64_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng.index(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
      }
      for (std::int64_t i = 0; i < take; ++i) {
        const int e = candidates[i];
        edge_set.insert(e);
        const auto& edge = het.edges[e];
        const int other = edge.u == node ? edge.v : edge.u;
        if (nodes.insert(other).second) {
          sub.hop_of_node[other] = hop;
          next_frontier.push_back(other);
        }
      }
    }
    std::sort(next_frontier.begin(), next_frontier.end());
    next_frontier.erase(
        std::unique(next_frontier.begin(), next_frontier.end()),
        next_frontier.end());
    frontier = std::move(next_frontier);
  }

  sub.nodes.assign(nodes.begin(), nodes.end());
  sub.edge_ids.assign(edge_set.begin(), edge_set.end());
  return sub;
}

nlohmann::json subgraph_to_json(const hetgraph::HeteroGraph& het,
                                const SampledSubgraph& sub) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["starting_nodes"] = sub.starting_nodes;
  doc["nodes"] = sub.nodes;
  nlohmann::json hops = nlohmann::json::array();
  for (const auto& [node, hop] : sub.hop_of_node) {
    hops.push_back({node, hop});
  }
  doc["hop_of_node"] = std::move(hops);
  nlohmann::json edges = nlohmann::json::array();
  for (int e : sub.edge_ids) {
    const auto& edge = het.edges[e];
    edges.push_back({{"u", edge.u},
                     {"v", edge.v},
                     {"weight", edge.weight},
                     {"type", edge.type == hetgraph::EdgeType::motif_molecule
                                  ? "motif-molecule"
                                  : "motif-motif"}});
  }
  doc["edges"] = std::move(edges);
  return doc;
}

void write_subgraph(const hetgraph::HeteroGraph& het,
                    const SampledSubgraph& sub,
                    const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << subgraph_to_json(het, sub).dump(2) << '\n';
}

}  // namespace hmg::sampler
