#include "hmg/motif.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hmg::motif {
namespace {

// GF(2) vector over edge indices.
struct BitRow {
  std::vector<std::uint64_t> words;

  explicit BitRow(std::size_t bits) : words((bits + 63) / 64, 0) {}
  void set(std::size_t i) { words[i / 64] |= (std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const {
    return (words[i / 64] >> (i % 64)) & 1;
  }
  void operator^=(const BitRow& o) {
    for (std::size_t i = 0; i < words.size(); ++i) words[i] ^= o.words[i];
  }
  bool any() const {
    for (auto w : words)
      if (w) return true;
    return false;
  }
  int lowest_set() const {
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (words[i]) {
        return static_cast<int>(i * 64 + std::countr_zero(words[i]));
      }
    }
    return -1;
  }
};

struct Candidate {
  std::vector<int> nodes;         // cycle order
  std::vector<int> sorted_nodes;  // final tie-break
  std::vector<int> label_key;     // relabeling-invariant tie-break
  BitRow edges;
};

using EdgeLabelMap = std::map<std::pair<int, int>, int>;

EdgeLabelMap build_edge_label_map(const AtomGraph& graph) {
  EdgeLabelMap map;
  if (graph.has_edge_labels()) {
    for (int e = 0; e < graph.num_edges(); ++e) {
      map[graph.edges[e]] = (*graph.edge_labels)[e];
    }
  }
  return map;
}

// lexicographically minimal interleaved label sequence over all rotations
// and both orientations; invariant under node relabeling
std::vector<int> canonical_ring_key(const std::vector<int>& cycle,
                                    const AtomGraph& graph,
                                    const EdgeLabelMap& edge_labels) {
  const bool labeled = graph.has_edge_labels();
  const int k = static_cast<int>(cycle.size());
  const auto sequence_from = [&](int start, int step) {
    std::vector<int> seq;
    seq.reserve(labeled ? 2 * k : k);
    for (int i = 0; i < k; ++i) {
      const int a = cycle[((start + step * i) % k + k) % k];
      const int b = cycle[((start + step * (i + 1)) % k + 2 * k) % k];
      seq.push_back(graph.node_labels[a]);
      if (labeled) seq.push_back(edge_labels.at(std::minmax(a, b)));
    }
    return seq;
  };
  std::vector<int> best;
  for (int start = 0; start < k; ++start) {
    for (int step : {1, -1}) {
      auto seq = sequence_from(start, step);
      if (best.empty() || seq < best) best = std::move(seq);
    }
  }
  return best;
}

std::vector<int> rotate_min_first(const std::vector<int>& cycle) {
  // deterministic stored orientation: min node first, then the smaller of its
  // two cycle neighbors
  const int k = static_cast<int>(cycle.size());
  int pos = static_cast<int>(
      std::min_element(cycle.begin(), cycle.end()) - cycle.begin());
  const int next = cycle[(pos + 1) % k];
  const int prev = cycle[(pos + k - 1) % k];
  std::vector<int> out(k);
  if (next <= prev) {
    for (int i = 0; i < k; ++i) out[i] = cycle[(pos + i) % k];
  } else {
    for (int i = 0; i < k; ++i) out[i] = cycle[(pos - i + k) % k];
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> minimum_cycle_basis(const AtomGraph& graph) {
  const int n = graph.num_nodes();
  const int m = graph.num_edges();
  if (m == 0) return {};

  const auto edge_labels = build_edge_label_map(graph);
  std::vector<std::vector<int>> adj(n);
  std::map<std::pair<int, int>, int> edge_index;
  for (int e = 0; e < m; ++e) {
    const auto [u, v] = graph.edges[e];
    adj[u].push_back(v);
    adj[v].push_back(u);
    edge_index.emplace(std::minmax(u, v), e);
  }
  for (auto& neighbors : adj) std::sort(neighbors.begin(), neighbors.end());

  // cycle space dimension: m - n + #components
  int components = 0;
  {
    std::vector<char> seen(n, 0);
    for (int s = 0; s < n; ++s) {
      if (seen[s]) continue;
      ++components;
      std::deque<int> queue{s};
      seen[s] = 1;
      while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : adj[u]) {
          if (!seen[v]) {
            seen[v] = 1;
            queue.push_back(v);
          }
        }
      }
    }
  }
  const int dim = m - n + components;
  if (dim <= 0) return {};

  // Horton candidates: per BFS root r and edge (u,v), the cycle formed by the
  // two tree paths plus the edge, when the paths meet only at r.
  std::set<std::vector<int>> seen_edge_sets;  // sorted edge-index lists
  std::vector<Candidate> candidates;
  std::vector<int> parent(n), depth(n);
  std::vector<int> stamp(n, -1);
  for (int root = 0; root < n; ++root) {
    std::fill(parent.begin(), parent.end(), -2);
    parent[root] = -1;
    depth[root] = 0;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : adj[u]) {
        if (parent[v] == -2) {
          parent[v] = u;
          depth[v] = depth[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (const auto& [uv, e] : edge_index) {
      const auto [u, v] = uv;
      if (parent[u] == -2 || parent[v] == -2) continue;
      // mark r->u path, then check r->v path crosses it only at root
      for (int x = u; x != -1; x = parent[x]) stamp[x] = root * m + e;
      bool disjoint = true;
      for (int x = v; x != -1; x = parent[x]) {
        if (stamp[x] == root * m + e && x != root) {
          disjoint = false;
          break;
        }
      }
      if (!disjoint) continue;
      std::vector<int> path_u, path_v;
      for (int x = u; x != -1; x = parent[x]) path_u.push_back(x);
      for (int x = v; x != -1; x = parent[x]) path_v.push_back(x);
      std::vector<int> cycle(path_u.rbegin(), path_u.rend());  // r .. u
      cycle.insert(cycle.end(), path_v.begin(), path_v.end() - 1);  // v .. r+1
      const int k = static_cast<int>(cycle.size());
      if (k < 3) continue;
      std::vector<int> edge_ids;
      edge_ids.reserve(k);
      bool simple = true;
      for (int i = 0; i < k; ++i) {
        auto it = edge_index.find(std::minmax(cycle[i], cycle[(i + 1) % k]));
        if (it == edge_index.end()) {
          simple = false;
          break;
        }
        edge_ids.push_back(it->second);
      }
      if (!simple) continue;
      std::sort(edge_ids.begin(), edge_ids.end());
      if (std::adjacent_find(edge_ids.begin(), edge_ids.end()) !=
          edge_ids.end()) {
        continue;
      }
      if (!seen_edge_sets.insert(edge_ids).second) continue;
      Candidate cand{cycle, cycle, {}, BitRow(m)};
      std::sort(cand.sorted_nodes.begin(), cand.sorted_nodes.end());
      cand.label_key = canonical_ring_key(cycle, graph, edge_labels);
      for (int e2 : edge_ids) cand.edges.set(e2);
      candidates.push_back(std::move(cand));
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.nodes.size() != b.nodes.size())
                return a.nodes.size() < b.nodes.size();
              if (a.label_key != b.label_key) return a.label_key < b.label_key;
              return a.sorted_nodes < b.sorted_nodes;
            });

  // greedy independence over GF(2)
  std::vector<std::pair<int, BitRow>> basis;  // (pivot, reduced row), by pivot
  std::vector<std::vector<int>> result;
  for (const auto& cand : candidates) {
    BitRow vec = cand.edges;
    for (const auto& [pivot, row] : basis) {
      if (vec.test(pivot)) vec ^= row;
    }
    if (!vec.any()) continue;
    const int pivot = vec.lowest_set();
    auto pos = std::upper_bound(
        basis.begin(), basis.end(), pivot,
        [](int p, const auto& pr) { return p < pr.first; });
    basis.emplace(pos, pivot, std::move(vec));
    result.push_back(rotate_min_first(cand.nodes));
    if (static_cast<int>(result.size()) == dim) break;
  }
  return result;
}

std::vector<MotifOccurrence> extract_occurrences(const AtomGraph& graph) {
  auto rings = minimum_cycle_basis(graph);
  std::sort(rings.begin(), rings.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              std::vector<int> sa = a, sb = b;
              std::sort(sa.begin(), sa.end());
              std::sort(sb.begin(), sb.end());
              return sa < sb;
            });

  std::set<std::pair<int, int>> ring_edges;
  for (const auto& ring : rings) {
    const int k = static_cast<int>(ring.size());
    for (int i = 0; i < k; ++i) {
      ring_edges.insert(std::minmax(ring[i], ring[(i + 1) % k]));
    }
  }

  std::vector<MotifOccurrence> occurrences;
  for (const auto& ring : rings) {
    occurrences.push_back({graph.graph_id, MotifKind::ring, ring});
  }
  for (const auto& [u, v] : graph.edges) {
    if (!ring_edges.count({u, v})) {
      occurrences.push_back({graph.graph_id, MotifKind::bond, {u, v}});
    }
  }
  return occurrences;
}

CanonicalMotif canonicalize(const MotifOccurrence& occ, const AtomGraph& graph) {
  const auto edge_labels = build_edge_label_map(graph);
  if (occ.kind == MotifKind::bond) {
    const int u = occ.node_ids[0], v = occ.node_ids[1];
    std::vector<int> key{std::min(graph.node_labels[u], graph.node_labels[v]),
                         std::max(graph.node_labels[u], graph.node_labels[v])};
    if (graph.has_edge_labels()) {
      key.push_back(edge_labels.at(std::minmax(u, v)));
    }
    return {MotifKind::bond, std::move(key)};
  }
  return {MotifKind::ring, canonical_ring_key(occ.node_ids, graph, edge_labels)};
}

double tfidf_value(double count, int num_molecules, int doc_freq) {
  return count *
         (std::log((1.0 + num_molecules) / (1.0 + doc_freq)) + 1.0);
}

int MotifVocabulary::num_kept() const {
  return static_cast<int>(std::count(kept.begin(), kept.end(), true));
}

std::vector<int> MotifVocabulary::kept_rank() const {
  std::vector<int> rank(motifs.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < motifs.size(); ++i) {
    if (kept[i]) rank[i] = next++;
  }
  return rank;
}

MotifVocabulary build_vocabulary(const std::vector<DatasetBundle>& bundles,
                                 double keep_ratio) {
  if (bundles.empty()) throw std::invalid_argument("no bundles");
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
    throw std::invalid_argument("keep_ratio must be in (0, 1]");
  }

  // per-motif occurrence counts C(i)_j, one entry per containing molecule
  std::map<CanonicalMotif, std::vector<int>> counts;
  int num_molecules = 0;
  for (const auto& bundle : bundles) {
    for (const auto& graph : bundle.graphs) {
      ++num_molecules;
      std::map<CanonicalMotif, int> local;
      for (const auto& occ : extract_occurrences(graph)) {
        ++local[canonicalize(occ, graph)];
      }
      for (const auto& [key, count] : local) {
        counts[key].push_back(count);
      }
    }
  }

  MotifVocabulary vocab;
  vocab.keep_ratio = keep_ratio;
  for (auto& [key, per_molecule] : counts) {
    vocab.index.emplace(key, vocab.size());
    vocab.motifs.push_back(key);
    const int doc_freq = static_cast<int>(per_molecule.size());
    vocab.doc_freq.push_back(doc_freq);
    // sort counts so the mean is independent of molecule enumeration order
    std::sort(per_molecule.begin(), per_molecule.end());
    double sum = 0.0;
    for (int c : per_molecule) sum += tfidf_value(c, num_molecules, doc_freq);
    vocab.mean_tfidf.push_back(sum / doc_freq);
  }

  const int total = vocab.size();
  const int keep = static_cast<int>(std::ceil(keep_ratio * total));
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (vocab.mean_tfidf[a] != vocab.mean_tfidf[b])
      return vocab.mean_tfidf[a] > vocab.mean_tfidf[b];
    return vocab.motifs[a] < vocab.motifs[b];
  });
  vocab.kept.assign(total, false);
  for (int i = 0; i < keep; ++i) vocab.kept[order[i]] = true;
  return vocab;
}

double vocab_overlap(const MotifVocabulary& a, const MotifVocabulary& b,
                     OverlapMode mode) {
  if (a.motifs.empty()) throw std::invalid_argument("empty first vocabulary");
  std::size_t shared = 0;
  for (const auto& motif : a.motifs) {
    if (b.index.count(motif)) ++shared;
  }
  if (mode == OverlapMode::first) {
    return static_cast<double>(shared) / static_cast<double>(a.motifs.size());
  }
  const std::size_t unioned = a.motifs.size() + b.motifs.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(unioned);
}

std::string to_string(MotifKind kind) {
  return kind == MotifKind::bond ? "bond" : "ring";
}

std::string key_to_string(const CanonicalMotif& motif) {
  std::ostringstream out;
  out << (motif.kind == MotifKind::bond ? "b:" : "r:");
  for (std::size_t i = 0; i < motif.key.size(); ++i) {
    if (i) out << ',';
    out << motif.key[i];
  }
  return out.str();
}

nlohmann::json vocabulary_to_json(const MotifVocabulary& vocab) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["keep_ratio"] = vocab.keep_ratio;
  nlohmann::json motifs = nlohmann::json::array();
  for (int i = 0; i < vocab.size(); ++i) {
    motifs.push_back({{"kind", to_string(vocab.motifs[i].kind)},
                      {"key", vocab.motifs[i].key},
                      {"doc_freq", vocab.doc_freq[i]},
                      {"mean_tfidf", vocab.mean_tfidf[i]},
                      {"kept", static_cast<bool>(vocab.kept[i])}});
  }
  doc["motifs"] = std::move(motifs);
  return doc;
}

void write_vocabulary(const MotifVocabulary& vocab,
                      const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << vocabulary_to_json(vocab).dump(2) << '\n';
}

MotifVocabulary vocabulary_from_json(const nlohmann::json& doc) {
  MotifVocabulary vocab;
  vocab.keep_ratio = doc.at("keep_ratio").get<double>();
  for (const auto& jm : doc.at("motifs")) {
    CanonicalMotif motif;
    motif.kind = jm.at("kind").get<std::string>() == "bond" ? MotifKind::bond
                                                            : MotifKind::ring;
    motif.key = jm.at("key").get<std::vector<int>>();
    vocab.index.emplace(motif, vocab.size());
    vocab.motifs.push_back(std::move(motif));
    vocab.doc_freq.push_back(jm.at("doc_freq").get<int>());
    vocab.mean_tfidf.push_back(jm.at("mean_tfidf").get<double>());
    vocab.kept.push_back(jm.at("kept").get<bool>());
  }
  return vocab;
}

MotifVocabulary read_vocabulary(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("missing file: " + file.string());
  return vocabulary_from_json(nlohmann::json::parse(in));
}

}  // namespace hmg::motif
