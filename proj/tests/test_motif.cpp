#include "hmg/motif.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "doctest.h"
#include "hmg/num/rng.hpp"
#include "testutil.hpp"

using namespace hmg;
using motif::CanonicalMotif;
using motif::MotifKind;

namespace {

// independent oracle: all rotations and both orientations of the interleaved
// (node,edge) label cycle, by explicit enumeration
std::vector<int> brute_force_ring_key(const std::vector<int>& node_labels,
                                      const std::vector<int>& edge_labels,
                                      bool with_edges) {
  const int k = static_cast<int>(node_labels.size());
  std::vector<std::vector<int>> all;
  for (int direction : {+1, -1}) {
    for (int start = 0; start < k; ++start) {
      std::vector<int> seq;
      for (int i = 0; i < k; ++i) {
        const int a = ((start + direction * i) % k + k) % k;
        seq.push_back(node_labels[a]);
        if (with_edges) {
          // edge i connects node i and node i+1; walking backwards from a
          // uses the edge behind it
          const int e = direction == 1 ? a : (a - 1 + k) % k;
          seq.push_back(edge_labels[e]);
        }
      }
      all.push_back(seq);
    }
  }
  return *std::min_element(all.begin(), all.end());
}

std::multiset<CanonicalMotif> key_multiset(const AtomGraph& g) {
  std::multiset<CanonicalMotif> keys;
  for (const auto& occ : motif::extract_occurrences(g)) {
    keys.insert(motif::canonicalize(occ, g));
  }
  return keys;
}

AtomGraph permuted(const AtomGraph& g, const std::vector<int>& perm) {
  AtomGraph out;
  out.graph_id = g.graph_id;
  out.class_label = g.class_label;
  out.node_labels.resize(g.num_nodes());
  for (int v = 0; v < g.num_nodes(); ++v) {
    out.node_labels[perm[v]] = g.node_labels[v];
  }
  std::vector<std::pair<std::pair<int, int>, int>> edges;
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    edges.push_back({std::minmax(perm[u], perm[v]),
                     g.edge_labels ? (*g.edge_labels)[e] : 0});
  }
  std::sort(edges.begin(), edges.end());
  if (g.edge_labels) out.edge_labels.emplace();
  for (const auto& [edge, label] : edges) {
    out.edges.push_back(edge);
    if (g.edge_labels) out.edge_labels->push_back(label);
  }
  return out;
}

AtomGraph random_graph(num::Rng& rng, int n, double p, int label_arity) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.index(label_arity));
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform() < p) edges.push_back({u, v});
    }
  }
  return test::make_graph(std::move(labels), std::move(edges));
}

int component_count(const AtomGraph& g) {
  std::vector<int> parent(g.num_nodes());
  for (int v = 0; v < g.num_nodes(); ++v) parent[v] = v;
  std::function<int(int)> find = [&](int x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (auto [u, v] : g.edges) parent[find(u)] = find(v);
  std::set<int> roots;
  for (int v = 0; v < g.num_nodes(); ++v) roots.insert(find(v));
  return static_cast<int>(roots.size());
}

}  // namespace

TEST_CASE("tosic acid yields six occurrences and five unique motifs") {
  const auto g = test::tosic_acid();
  const auto occurrences = motif::extract_occurrences(g);
  REQUIRE(occurrences.size() == 6);
  CHECK(std::count_if(occurrences.begin(), occurrences.end(),
                      [](const auto& occ) {
                        return occ.kind == MotifKind::ring;
                      }) == 1);

  std::set<CanonicalMotif> unique;
  for (const auto& occ : occurrences) {
    unique.insert(motif::canonicalize(occ, g));
  }
  CHECK(unique.size() == 5);  // single and double S-O bonds stay distinct
}

TEST_CASE("benzene skeleton is one ring and no bonds") {
  const auto g = test::make_graph(
      {0, 0, 0, 0, 0, 0},
      {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
  const auto occurrences = motif::extract_occurrences(g);
  REQUIRE(occurrences.size() == 1);
  CHECK(occurrences[0].kind == MotifKind::ring);
  CHECK(occurrences[0].node_ids.size() == 6);
}

TEST_CASE("a path gives bond occurrences only") {
  const auto g = test::make_graph({0, 0, 0}, {{0, 1}, {1, 2}});
  const auto occurrences = motif::extract_occurrences(g);
  REQUIRE(occurrences.size() == 2);
  for (const auto& occ : occurrences) CHECK(occ.kind == MotifKind::bond);
}

TEST_CASE("edgeless graphs return nothing") {
  CHECK(motif::extract_occurrences(test::make_graph({0, 1}, {})).empty());
}

TEST_CASE("bond keys ignore order, keep edge label") {
  const auto g = test::make_graph({2, 1}, {{0, 1}}, {3});
  const auto swapped = test::make_graph({1, 2}, {{0, 1}}, {3});
  const auto key_a = motif::canonicalize(
      {0, MotifKind::bond, {0, 1}}, g);
  const auto key_b = motif::canonicalize(
      {0, MotifKind::bond, {0, 1}}, swapped);
  CHECK(key_a == key_b);
  CHECK(key_a.key == std::vector<int>{1, 2, 3});
}

TEST_CASE("ring key is the minimum over rotations and reflections") {
  // N,C,C,N,C,C with labels C=0, N=1 and no edge labels
  const auto g = test::make_graph(
      {1, 0, 0, 1, 0, 0},
      {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
  const auto occurrences = motif::extract_occurrences(g);
  REQUIRE(occurrences.size() == 1);
  const auto key = motif::canonicalize(occurrences[0], g);
  CHECK(key.key == std::vector<int>{0, 0, 1, 0, 0, 1});
}

TEST_CASE("ring keys match the brute-force oracle") {
  num::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 3 + static_cast<int>(rng.index(6));
    std::vector<int> node_labels(k), edge_labels(k);
    for (auto& l : node_labels) l = static_cast<int>(rng.index(3));
    for (auto& l : edge_labels) l = static_cast<int>(rng.index(2));
    const bool with_edges = trial % 2 == 0;

    std::vector<std::pair<int, int>> edges;
    std::vector<int> file_labels;
    for (int i = 0; i < k; ++i) {
      const std::pair<int, int> edge = std::minmax(i, (i + 1) % k);
      edges.push_back(edge);
      file_labels.push_back(edge_labels[i]);
    }
    // sort edges as the parser stores them, labels aligned
    std::vector<int> order(k);
    for (int i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return edges[a] < edges[b]; });
    std::vector<std::pair<int, int>> sorted_edges;
    std::vector<int> sorted_labels;
    for (int i : order) {
      sorted_edges.push_back(edges[i]);
      sorted_labels.push_back(file_labels[i]);
    }
    const auto g = test::make_graph(
        node_labels, sorted_edges,
        with_edges ? sorted_labels : std::vector<int>{});

    const auto occurrences = motif::extract_occurrences(g);
    REQUIRE(occurrences.size() == 1);
    const auto key = motif::canonicalize(occurrences[0], g);
    CHECK(key.key ==
          brute_force_ring_key(node_labels, edge_labels, with_edges));
  }
}

TEST_CASE("node relabeling leaves the canonical key multiset unchanged") {
  num::Rng rng(11);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(rng.index(6));
    auto g = random_graph(rng, n, 0.35, 3);
    if (g.edges.empty()) continue;
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    CHECK(key_multiset(g) == key_multiset(permuted(g, perm)));
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("every edge is covered by a ring or emitted as a bond") {
  num::Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_graph(rng, 8, 0.3, 2);
    const auto occurrences = motif::extract_occurrences(g);
    std::set<std::pair<int, int>> covered;
    int rings = 0;
    for (const auto& occ : occurrences) {
      if (occ.kind == MotifKind::bond) {
        covered.insert(std::minmax(occ.node_ids[0], occ.node_ids[1]));
      } else {
        ++rings;
        const int k = static_cast<int>(occ.node_ids.size());
        for (int i = 0; i < k; ++i) {
          covered.insert(
              std::minmax(occ.node_ids[i], occ.node_ids[(i + 1) % k]));
        }
      }
    }
    for (const auto& e : g.edges) CHECK(covered.count(e) == 1);
    // cycle space dimension
    CHECK(rings == g.num_edges() - g.num_nodes() + component_count(g));
  }
}

TEST_CASE("tfidf_value matches the formula") {
  CHECK(motif::tfidf_value(1, 10, 10) == doctest::Approx(1.0));
  CHECK(motif::tfidf_value(2, 9, 4) ==
        doctest::Approx(2.0 * (std::log(10.0 / 5.0) + 1.0)));
  CHECK(motif::tfidf_value(0, 5, 2) == 0.0);
}

TEST_CASE("build_vocabulary counts documents and averages tf-idf") {
  // two molecules: both contain bond (0,0); molecule B twice
  DatasetBundle bundle;
  bundle.name = "toy";
  bundle.num_node_label_values = 1;
  bundle.num_classes = 1;
  bundle.graphs.push_back(test::make_graph({0, 0}, {{0, 1}}, {}, 0, 0));
  bundle.graphs.push_back(
      test::make_graph({0, 0, 0}, {{0, 1}, {1, 2}}, {}, 0, 1));
  const auto vocab = motif::build_vocabulary({bundle}, 1.0);
  REQUIRE(vocab.size() == 1);
  CHECK(vocab.doc_freq[0] == 2);
  // counts 1 and 2, M=2, N=2 -> idf term = ln(3/3)+1 = 1
  CHECK(vocab.mean_tfidf[0] == doctest::Approx(1.5));
  CHECK(vocab.num_kept() == 1);
}

TEST_CASE("motifs in every molecule with unit count have mean tf-idf 1") {
  DatasetBundle bundle;
  bundle.name = "toy";
  bundle.num_node_label_values = 1;
  bundle.num_classes = 1;
  for (int i = 0; i < 5; ++i) {
    bundle.graphs.push_back(test::make_graph({0, 0}, {{0, 1}}, {}, 0, i));
  }
  const auto vocab = motif::build_vocabulary({bundle}, 1.0);
  REQUIRE(vocab.size() == 1);
  CHECK(vocab.mean_tfidf[0] == 1.0);
}

TEST_CASE("keep_ratio truncates by mean tf-idf with key tie-break") {
  // ten distinct bond motifs with different document frequencies
  DatasetBundle bundle;
  bundle.name = "toy";
  bundle.num_node_label_values = 20;
  bundle.num_classes = 1;
  int gid = 0;
  for (int m = 0; m < 10; ++m) {
    // motif m = bond (2m, 2m+1); appears in m+1 molecules
    for (int rep = 0; rep <= m; ++rep) {
      bundle.graphs.push_back(
          test::make_graph({2 * m, 2 * m + 1}, {{0, 1}}, {}, 0, gid++));
    }
  }
  const auto vocab = motif::build_vocabulary({bundle}, 0.5);
  REQUIRE(vocab.size() == 10);
  CHECK(vocab.num_kept() == 5);
  // rarest motifs have the highest idf, hence the highest mean tf-idf
  for (int i = 0; i < vocab.size(); ++i) {
    const bool rare = vocab.doc_freq[i] <= 5;
    CHECK(vocab.kept[i] == rare);
  }
}

TEST_CASE("build_vocabulary is independent of bundle order") {
  const auto mutag =
      graphio::parse_tudataset(test::data_dir() / "MUTAG", "MUTAG");
  DatasetBundle first = mutag, reversed = mutag;
  std::reverse(reversed.graphs.begin(), reversed.graphs.end());
  const auto a = motif::build_vocabulary({first}, 1.0);
  const auto b = motif::build_vocabulary({reversed}, 1.0);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.motifs[i] == b.motifs[i]);
    CHECK(a.doc_freq[i] == b.doc_freq[i]);
    CHECK(a.mean_tfidf[i] == b.mean_tfidf[i]);  // bit-exact
    CHECK(a.kept[i] == b.kept[i]);
  }
}

TEST_CASE("keep_ratio bounds are enforced") {
  DatasetBundle bundle;
  bundle.name = "toy";
  bundle.num_node_label_values = 1;
  bundle.num_classes = 1;
  bundle.graphs.push_back(test::make_graph({0, 0}, {{0, 1}}));
  CHECK_THROWS_AS(motif::build_vocabulary({bundle}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(motif::build_vocabulary({bundle}, 1.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(motif::build_vocabulary({}, 1.0), std::invalid_argument);
}

TEST_CASE("vocab_overlap handles the documented cases") {
  const auto ptc = graphio::parse_tudataset(test::data_dir() / "PTC", "PTC");
  const auto vocab = motif::build_vocabulary({ptc}, 1.0);
  CHECK(motif::vocab_overlap(vocab, vocab) == 1.0);

  DatasetBundle disjoint;
  disjoint.name = "disjoint";
  disjoint.num_node_label_values = 40;
  disjoint.num_classes = 1;
  disjoint.graphs.push_back(test::make_graph({30, 31}, {{0, 1}}, {9}));
  const auto other = motif::build_vocabulary({disjoint}, 1.0);
  CHECK(motif::vocab_overlap(other, vocab) == 0.0);

  motif::MotifVocabulary empty;
  CHECK_THROWS_AS(motif::vocab_overlap(empty, vocab), std::invalid_argument);
}

TEST_CASE("vocabulary roundtrips through JSON") {
  const auto mutag =
      graphio::parse_tudataset(test::data_dir() / "MUTAG", "MUTAG");
  const auto vocab = motif::build_vocabulary({mutag}, 0.8);
  test::TempDir tmp("motif_vocab");
  const auto file = tmp.path() / "vocab.json";
  motif::write_vocabulary(vocab, file);
  const auto back = motif::read_vocabulary(file);
  REQUIRE(back.size() == vocab.size());
  for (int i = 0; i < vocab.size(); ++i) {
    CHECK(back.motifs[i] == vocab.motifs[i]);
    CHECK(back.doc_freq[i] == vocab.doc_freq[i]);
    CHECK(back.mean_tfidf[i] == vocab.mean_tfidf[i]);
    CHECK(back.kept[i] == vocab.kept[i]);
  }
  CHECK(back.keep_ratio == vocab.keep_ratio);
}
