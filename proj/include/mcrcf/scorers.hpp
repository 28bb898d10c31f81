#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mcrcf/encoder.hpp"

namespace mcrcf {

enum class ScorerKind : std::uint8_t { tf, tfidf, bm25, dirichlet, jelinek_mercer };

inline std::string_view to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::tf: return "tf";
    case ScorerKind::tfidf: return "tfidf";
    case ScorerKind::bm25: return "bm25";
    case ScorerKind::dirichlet: return "dirichlet";
    case ScorerKind::jelinek_mercer: return "jelinek_mercer";
  }
  return "?";
}

inline ScorerKind parse_scorer_kind(std::string_view text) {
  if (text == "tf") return ScorerKind::tf;
  if (text == "tfidf" || text == "tf-idf") return ScorerKind::tfidf;
  if (text == "bm25") return ScorerKind::bm25;
  if (text == "dirichlet" || text == "lmd") return ScorerKind::dirichlet;
  if (text == "jelinek_mercer" || text == "jm" || text == "lmjm") return ScorerKind::jelinek_mercer;
  throw std::invalid_argument("unknown scorer: " + std::string(text));
}

struct ScorerConfig {
  ScorerKind kind = ScorerKind::tf;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  double dirichlet_mu = 2000.0;
  double jm_lambda = 0.1;

  void validate() const {
    if (!(bm25_k1 >= 0.0)) throw std::invalid_argument("bm25 k1 must be >= 0");
    if (!(bm25_b >= 0.0 && bm25_b <= 1.0)) throw std::invalid_argument("bm25 b must lie in [0, 1]");
    if (!(dirichlet_mu > 0.0)) throw std::invalid_argument("dirichlet mu must be > 0");
    if (!(jm_lambda > 0.0 && jm_lambda < 1.0)) throw std::invalid_argument("jm lambda must lie in (0, 1)");
  }
};

// Field-level statistics.
struct CollectionStats {
  std::uint64_t doc_count = 0;
  std::uint64_t total_terms = 0;

  double avg_doc_length() const {
    return doc_count == 0 ? 0.0 : static_cast<double>(total_terms) / static_cast<double>(doc_count);
  }
};

struct TermStats {
  std::uint64_t doc_freq = 0;
  std::uint64_t collection_freq = 0;
};

struct DocStats {
  double norm = 0.0;        // Euclidean norm of the raw frequencies
  double tfidf_norm = 0.0;  // Euclidean norm of the idf-weighted frequencies
  double length = 0.0;      // sum of frequencies
};

inline double idf_tfidf(const TermStats& t, const CollectionStats& c) {
  return 1.0 + std::log(static_cast<double>(c.doc_count) / (static_cast<double>(t.doc_freq) + 1.0));
}

inline double idf_bm25(const TermStats& t, const CollectionStats& c) {
  double n = static_cast<double>(c.doc_count);
  double df = static_cast<double>(t.doc_freq);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

inline double collection_probability(const TermStats& t, const CollectionStats& c) {
  if (c.total_terms == 0) return 0.0;
  return static_cast<double>(t.collection_freq) / static_cast<double>(c.total_terms);
}

// Contribution of one matching term to a document's accumulated score.
inline double term_contribution(const ScorerConfig& cfg, const CollectionStats& coll,
                                const TermStats& term, double query_freq, double doc_freq,
                                const DocStats& doc) {
  switch (cfg.kind) {
    case ScorerKind::tf:
      return query_freq * doc_freq;
    case ScorerKind::tfidf: {
      double idf = idf_tfidf(term, coll);
      return query_freq * doc_freq * idf * idf;
    }
    case ScorerKind::bm25: {
      double k1 = cfg.bm25_k1;
      double length_norm = 1.0 - cfg.bm25_b + cfg.bm25_b * doc.length / coll.avg_doc_length();
      return idf_bm25(term, coll) * query_freq * (doc_freq * (k1 + 1.0)) / (doc_freq + k1 * length_norm);
    }
    case ScorerKind::dirichlet: {
      double pc = collection_probability(term, coll);
      if (pc <= 0.0) return 0.0;
      return query_freq * std::max(0.0, std::log1p(doc_freq / (cfg.dirichlet_mu * pc)));
    }
    case ScorerKind::jelinek_mercer: {
      double pc = collection_probability(term, coll);
      if (pc <= 0.0 || doc.length <= 0.0) return 0.0;
      double lambda = cfg.jm_lambda;
      return query_freq * std::log1p(((1.0 - lambda) / lambda) * (doc_freq / doc.length) / pc);
    }
  }
  return 0.0;
}

// Turns the accumulated per-term sum into the document score. `query_length`
// is the total frequency of the query terms known to the collection; only
// the Dirichlet model uses it.
inline double finalize_score(const ScorerConfig& cfg, double accumulated, const DocStats& doc,
                             double query_length) {
  switch (cfg.kind) {
    case ScorerKind::tf:
      return doc.norm > 0.0 ? accumulated / doc.norm : 0.0;
    case ScorerKind::tfidf:
      return doc.tfidf_norm > 0.0 ? accumulated / doc.tfidf_norm : 0.0;
    case ScorerKind::dirichlet: {
      double mu = cfg.dirichlet_mu;
      return std::max(0.0, accumulated + query_length * std::log(mu / (mu + doc.length)));
    }
    case ScorerKind::bm25:
    case ScorerKind::jelinek_mercer:
      return accumulated;
  }
  return accumulated;
}

// Scores one document given its terms in a field, independent of any index.
// `term_stats` maps a TermId to its statistics in that field.
template <typename TermStatsFn>
double score_document(const ScorerConfig& cfg, const TermVector& query, const TermVector& doc_terms,
                      const DocStats& doc, const CollectionStats& coll, TermStatsFn&& term_stats) {
  double acc = 0.0;
  double query_length = 0.0;
  auto d = doc_terms.begin();
  for (const auto& q : query) {
    TermStats ts = term_stats(q.term);
    if (ts.collection_freq > 0) query_length += q.freq;
    while (d != doc_terms.end() && d->term < q.term) ++d;
    if (d != doc_terms.end() && d->term == q.term) {
      acc += term_contribution(cfg, coll, ts, q.freq, d->freq, doc);
    }
  }
  return finalize_score(cfg, acc, doc, query_length);
}

template <typename TermStatsFn>
double tfidf_norm(const TermVector& doc_terms, const CollectionStats& coll, TermStatsFn&& term_stats) {
  double sum = 0.0;
  for (const auto& t : doc_terms) {
    double w = t.freq * idf_tfidf(term_stats(t.term), coll);
    sum += w * w;
  }
  return std::sqrt(sum);
}

inline double score_tf(const TermVector& query, const TermVector& doc_terms, double doc_norm) {
  DocStats doc{doc_norm, 0.0, 0.0};
  return score_document(ScorerConfig{}, query, doc_terms, doc, CollectionStats{},
                        [](const TermId&) { return TermStats{}; });
}

template <typename TermStatsFn>
double score_tfidf(const TermVector& query, const TermVector& doc_terms, const CollectionStats& coll,
                   TermStatsFn&& term_stats) {
  DocStats doc{euclidean_norm(doc_terms), tfidf_norm(doc_terms, coll, term_stats), 0.0};
  return score_document(ScorerConfig{ScorerKind::tfidf}, query, doc_terms, doc, coll, term_stats);
}

inline double doc_length(const TermVector& terms) {
  double sum = 0.0;
  for (const auto& t : terms) sum += t.freq;
  return sum;
}

template <typename TermStatsFn>
double score_bm25(const TermVector& query, const TermVector& doc_terms, const CollectionStats& coll,
                  TermStatsFn&& term_stats, double k1 = 1.2, double b = 0.75) {
  ScorerConfig cfg{ScorerKind::bm25};
  cfg.bm25_k1 = k1;
  cfg.bm25_b = b;
  DocStats doc{euclidean_norm(doc_terms), 0.0, doc_length(doc_terms)};
  return score_document(cfg, query, doc_terms, doc, coll, term_stats);
}

template <typename TermStatsFn>
double score_dirichlet(const TermVector& query, const TermVector& doc_terms,
                       const CollectionStats& coll, TermStatsFn&& term_stats, double mu = 2000.0) {
  ScorerConfig cfg{ScorerKind::dirichlet};
  cfg.dirichlet_mu = mu;
  DocStats doc{euclidean_norm(doc_terms), 0.0, doc_length(doc_terms)};
  return score_document(cfg, query, doc_terms, doc, coll, term_stats);
}

template <typename TermStatsFn>
double score_jelinek_mercer(const TermVector& query, const TermVector& doc_terms,
                            const CollectionStats& coll, TermStatsFn&& term_stats,
                            double lambda = 0.1) {
  ScorerConfig cfg{ScorerKind::jelinek_mercer};
  cfg.jm_lambda = lambda;
  DocStats doc{euclidean_norm(doc_terms), 0.0, doc_length(doc_terms)};
  return score_document(cfg, query, doc_terms, doc, coll, term_stats);
}

}  // namespace mcrcf
