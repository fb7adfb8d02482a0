#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hmg/dataset.hpp"

#include "json.hpp"

namespace hmg::motif {

enum class MotifKind { bond, ring };

/// One motif occurrence inside a molecule. For bonds `node_ids` is the edge
/// pair; for rings it is the cycle in traversal order (consecutive entries,
/// cyclically, are edges of the graph).
struct MotifOccurrence {
  int graph_id = 0;
  MotifKind kind = MotifKind::bond;
  std::vector<int> node_ids;
};

/// Canonical, relabeling-invariant motif identity. Bond keys are the sorted
/// node-label pair plus the edge label when the dataset has edge labels; ring
/// keys are the lexicographically minimal interleaved node/edge label
/// sequence over all rotations and both orientations.
struct CanonicalMotif {
  MotifKind kind = MotifKind::bond;
  std::vector<int> key;

  friend auto operator<=>(const CanonicalMotif&, const CanonicalMotif&) = default;
};

struct MotifVocabulary {
  std::vector<CanonicalMotif> motifs;       // ordered by canonical key
  std::map<CanonicalMotif, int> index;      // key -> dense motif index
  std::vector<int> doc_freq;                // N(i): molecules containing i
  std::vector<double> mean_tfidf;           // mean TF-IDF over containing molecules
  std::vector<bool> kept;
  double keep_ratio = 1.0;

  int size() const { return static_cast<int>(motifs.size()); }
  int num_kept() const;
  /// Dense index over kept motifs, in vocabulary order; -1 when dropped.
  std::vector<int> kept_rank() const;
};

/// Deterministic minimum cycle basis (Horton candidate enumeration, greedy
/// GF(2) independence, ties broken by cycle length then sorted node ids).
/// Cycles are returned as simple cycles in traversal order.
std::vector<std::vector<int>> minimum_cycle_basis(const AtomGraph& graph);

/// Rings = minimum cycle basis; bonds = every edge on no extracted ring.
/// Occurrence order: rings by sorted node-id tuple, then bonds by pair.
std::vector<MotifOccurrence> extract_occurrences(const AtomGraph& graph);

CanonicalMotif canonicalize(const MotifOccurrence& occ, const AtomGraph& graph);

/// Eq.-style motif salience: count * (ln((1+M)/(1+N)) + 1).
double tfidf_value(double count, int num_molecules, int doc_freq);

MotifVocabulary build_vocabulary(const std::vector<DatasetBundle>& bundles,
                                 double keep_ratio = 1.0);

enum class OverlapMode { first, jaccard };

/// |keys(a) ∩ keys(b)| / |keys(a)| (or intersection over union).
double vocab_overlap(const MotifVocabulary& a, const MotifVocabulary& b,
                     OverlapMode mode = OverlapMode::first);

nlohmann::json vocabulary_to_json(const MotifVocabulary& vocab);
MotifVocabulary vocabulary_from_json(const nlohmann::json& doc);
void write_vocabulary(const MotifVocabulary& vocab,
                      const std::filesystem::path& file);
MotifVocabulary read_vocabulary(const std::filesystem::path& file);

std::string to_string(MotifKind kind);
std::string key_to_string(const CanonicalMotif& motif);

}  // namespace hmg::motif
