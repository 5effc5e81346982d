#pragma once

#include <map>
#include <string>
#include <vector>

#include "tabfuse/datamodel.hpp"
#include "tabfuse/oracle.hpp"

namespace tabfuse {

struct RecordRef {
  std::string dataset;
  std::string id;

  auto operator<=>(const RecordRef&) const = default;
  std::string token() const { return dataset + ":" + id; }
};

struct CandidatePair {
  RecordRef a;  // canonical: a.dataset < b.dataset
  RecordRef b;
  double similarity = 0.0;  // embedding cosine
  int rank_from_a = 0;      // neighbor rank in the direction that found it
};

/// Serializes each record as template-ordered "attr: value" lines (nulls
/// omitted) and embeds through the oracle. Order-preserving.
std::vector<std::string> record_texts(const Dataset& dataset,
                                      const std::vector<std::string>& template_attributes);

std::map<std::string, EmbeddingVector> embed_records(
    const Dataset& dataset, const std::vector<std::string>& template_attributes, Oracle& oracle);

/// Exact k-NN by cosine in both directions, union, deduplicated, sorted by
/// (-similarity, id_a, id_b). Pool size <= k * (|A| + |B|).
std::vector<CandidatePair> generate_candidates(
    const Dataset& a, const std::map<std::string, EmbeddingVector>& a_vectors, const Dataset& b,
    const std::map<std::string, EmbeddingVector>& b_vectors, int k);

void save_candidates(const std::vector<CandidatePair>& pool, const std::string& path);
std::vector<CandidatePair> load_candidates(const std::string& path, const std::string& dataset_a,
                                           const std::string& dataset_b);

}  // namespace tabfuse
