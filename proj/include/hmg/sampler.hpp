#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmg/hetgraph.hpp"
#include "hmg/num/rng.hpp"

namespace hmg::sampler {

/// Per-hop edge budgets for the typed breadth-first sampler. Hop 1 always
/// takes every motif-molecule edge of the starting molecules; hops >= 2
/// sample motif-motif edges per frontier motif node (kAll = unbounded).
struct SamplingRule {
  static constexpr std::int64_t kAll = std::numeric_limits<std::int64_t>::max();

  std::vector<std::int64_t> budgets;  // budgets[0] must be kAll

  int depth() const { return static_cast<int>(budgets.size()); }

  /// Parses "all,1,2"; entries after the first may be integers or "all"/"inf".
  static SamplingRule parse(const std::string& text);
  std::string to_string() const;
};

struct SampledSubgraph {
  std::vector<int> nodes;           // ascending subgraph node ids
  std::vector<int> edge_ids;        // indices into the parent edge list
  std::vector<int> starting_nodes;  // the batch's molecule node ids
  std::map<int, int> hop_of_node;   // node -> first hop reached (starts: 0)
};

/// Shuffles molecule node ids with the seeded RNG and splits them into
/// ceil(count / batch_size) disjoint batches.
std::vector<std::vector<int>> batch_starts(const hetgraph::HeteroGraph& het,
                                           int batch_size, std::uint64_t seed);

/// Typed BFS: hop 1 keeps all motif-molecule edges incident to `starts`;
/// each deeper hop samples up to budget motif-motif edges per frontier motif
/// node, uniformly without replacement.
SampledSubgraph sample_subgraph(const hetgraph::HeteroGraph& het,
                                const std::vector<int>& starts,
                                const SamplingRule& rule, std::uint64_t seed);

nlohmann::json subgraph_to_json(const hetgraph::HeteroGraph& het,
                                const SampledSubgraph& sub);
void write_subgraph(const hetgraph::HeteroGraph& het,
                    const SampledSubgraph& sub,
                    const std::filesystem::path& file);

}  // namespace hmg::sampler
