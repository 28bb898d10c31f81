#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mcrcf/encoder.hpp"
#include "mcrcf/index.hpp"
#include "mcrcf/neighbors.hpp"
#include "mcrcf/scorers.hpp"

namespace mcrcf {

struct KnnConfig {
  std::size_t k = 20;
  std::size_t expansion = 10;  // m: each field search goes k * m deep
  // Divide merged scores by the query norm (tf and tf-idf only). Rankings and
  // predictions do not change; only the absolute scale does.
  bool divide_by_query_norm = false;

  void validate() const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (expansion < 1) throw std::invalid_argument("expansion factor m must be >= 1");
  }
};

// Norm of the query vector under the scorer's weighting; 1 for the
// probabilistic and language-model scorers.
inline double query_norm(const InvertedIndex& index, const TermVector& query, const ScorerConfig& scorer) {
  switch (scorer.kind) {
    case ScorerKind::tf:
      return euclidean_norm(query);
    case ScorerKind::tfidf:
      return tfidf_norm(query, index.collection_stats(Field::prate),
                        [&](const TermId& t) { return index.term_stats(Field::prate, t); });
    default:
      return 1.0;
  }
}

// PRATE score minus NRATE score per document; a side that did not return the
// document contributes 0.
inline NeighborList merge_field_hits(const std::vector<SearchHit>& prate,
                                     const std::vector<SearchHit>& nrate, std::size_t k) {
  NeighborList merged;
  merged.reserve(prate.size() + nrate.size());
  for (const auto& h : prate) merged.push_back({h.doc_id, h.score});
  for (const auto& h : nrate) merged.push_back({h.doc_id, -h.score});
  std::sort(merged.begin(), merged.end(),
            [](const auto& a, const auto& b) { return a.neighbor_id < b.neighbor_id; });
  NeighborList out;
  out.reserve(merged.size());
  for (const auto& n : merged) {
    if (!out.empty() && out.back().neighbor_id == n.neighbor_id) {
      out.back().similarity += n.similarity;
    } else {
      out.push_back(n);
    }
  }
  rank_and_truncate(out, k);
  return out;
}

// Dual-field kNN for an already-encoded query. An empty query yields an
// empty neighbor list.
inline NeighborList knn_query(const InvertedIndex& index, const TermVector& query, const KnnConfig& config,
                              const ScorerConfig& scorer, std::optional<Id> exclude_self = std::nullopt) {
  config.validate();
  if (query.empty() || index.doc_count() == 0) return {};
  std::size_t depth = config.k * config.expansion;
  auto p = index.search(Field::prate, query, depth, scorer, exclude_self);
  auto n = index.search(Field::nrate, query, depth, scorer, exclude_self);
  NeighborList out = merge_field_hits(p, n, config.k);
  if (config.divide_by_query_norm) {
    double qn = query_norm(index, query, scorer);
    if (qn > 0.0) {
      for (auto& nb : out) nb.similarity /= qn;
    }
  }
  return out;
}

inline NeighborList knn(const InvertedIndex& index, Profile query_profile, double query_mean,
                        const KnnConfig& config, const ScorerConfig& scorer,
                        std::optional<Id> exclude_self = std::nullopt) {
  return knn_query(index, encode_query(query_profile, query_mean, index.scale_factor()), config, scorer,
                   exclude_self);
}

// Neighbors of a document already stored in the index, excluding itself.
inline NeighborList knn_for_document(const InvertedIndex& index, Id doc_id, const KnnConfig& config,
                                     const ScorerConfig& scorer) {
  auto ord = index.ordinal_of(doc_id);
  if (!ord) throw DataError("document " + std::to_string(doc_id) + " not in index");
  return knn_query(index, index.document_terms(*ord), config, scorer, doc_id);
}

}  // namespace mcrcf
