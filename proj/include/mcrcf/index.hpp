#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mcrcf/common.hpp"
#include "mcrcf/encoder.hpp"
#include "mcrcf/scorers.hpp"

namespace mcrcf {

enum class Field : std::uint8_t { prate = 0, nrate = 1 };

inline std::string_view to_string(Field f) { return f == Field::prate ? "PRATE" : "NRATE"; }

inline Field parse_field(std::string_view text) {
  if (text == "PRATE" || text == "prate") return Field::prate;
  if (text == "NRATE" || text == "nrate") return Field::nrate;
  throw std::invalid_argument("unknown field: " + std::string(text));
}

struct Posting {
  std::uint32_t doc = 0;  // ordinal
  std::uint32_t freq = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

struct SearchHit {
  Id doc_id = 0;
  double score = 0.0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

struct DocumentEntry {
  Id doc_id = 0;
  double stored_mean = 0.0;
  double norm = 0.0;
  std::uint64_t length = 0;
};

// Orders hits by descending score, ties by ascending id.
inline bool ranks_before(double score_a, Id id_a, double score_b, Id id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

// Two-field inverted index over encoded rating profiles. Document ordinals
// follow ascending doc id. Immutable after build/load; concurrent searches
// are safe.
class InvertedIndex {
 public:
  static constexpr std::array<char, 4> kMagic{'M', 'C', 'R', 'X'};
  static constexpr std::uint32_t kFormatVersion = 1;

  InvertedIndex() = default;

  static InvertedIndex build(std::vector<EncodedDocument> docs, Mode mode, std::uint32_t scale_factor) {
    std::sort(docs.begin(), docs.end(),
              [](const EncodedDocument& a, const EncodedDocument& b) { return a.doc_id < b.doc_id; });
    InvertedIndex index;
    index.mode_ = mode;
    index.scale_factor_ = scale_factor;
    index.docs_.reserve(docs.size());
    for (std::size_t ord = 0; ord < docs.size(); ++ord) {
      const auto& d = docs[ord];
      if (ord > 0 && docs[ord - 1].doc_id == d.doc_id) {
        throw DataError("duplicate document id " + std::to_string(d.doc_id));
      }
      DocumentEntry entry{d.doc_id, d.stored_mean, d.norm, 0};
      for (const auto& t : d.prate) entry.length += t.freq;
      index.docs_.push_back(entry);
      auto o = static_cast<std::uint32_t>(ord);
      for (const auto& t : d.prate) index.add_posting(Field::prate, t.term, {o, t.freq});
      for (const auto& t : d.nrate) index.add_posting(Field::nrate, t.term, {o, t.freq});
    }
    index.finalize();
    return index;
  }

  Mode mode() const { return mode_; }
  std::uint32_t scale_factor() const { return scale_factor_; }
  std::size_t doc_count() const { return docs_.size(); }
  std::size_t vocabulary_size(Field f) const { return terms_[idx(f)].size(); }
  const std::vector<DocumentEntry>& documents() const { return docs_; }
  const DocumentEntry& document(std::uint32_t ordinal) const { return docs_.at(ordinal); }

  std::optional<std::uint32_t> ordinal_of(Id doc_id) const {
    auto it = std::lower_bound(docs_.begin(), docs_.end(), doc_id,
                               [](const DocumentEntry& d, Id id) { return d.doc_id < id; });
    if (it == docs_.end() || it->doc_id != doc_id) return std::nullopt;
    return static_cast<std::uint32_t>(it - docs_.begin());
  }

  // Stored PRATE terms of a document, reconstructed from the postings.
  const TermVector& document_terms(std::uint32_t ordinal) const { return forward_.at(ordinal); }

  const std::vector<Posting>* postings(Field f, const TermId& term) const {
    const auto& map = terms_[idx(f)];
    auto it = map.find(term);
    return it == map.end() ? nullptr : &it->second.postings;
  }

  TermStats term_stats(Field f, const TermId& term) const {
    const auto& map = terms_[idx(f)];
    auto it = map.find(term);
    if (it == map.end()) return {};
    return {it->second.postings.size(), it->second.collection_freq};
  }

  const CollectionStats& collection_stats(Field f) const { return stats_[idx(f)]; }

  DocStats doc_stats(std::uint32_t ordinal) const {
    const auto& d = docs_[ordinal];
    return {d.norm, tfidf_norms_[ordinal], static_cast<double>(d.length)};
  }

  // Every document sharing a term with the query is scored; at most top_n
  // hits come back, sorted by (score desc, doc_id asc).
  std::vector<SearchHit> search(Field field, const TermVector& query, std::size_t top_n,
                                const ScorerConfig& scorer,
                                std::optional<Id> exclude_doc_id = std::nullopt) const {
    if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
    const auto& map = terms_[idx(field)];
    const auto& coll = stats_[idx(field)];

    thread_local std::vector<double> acc;
    thread_local std::vector<std::uint8_t> seen;
    thread_local std::vector<std::uint32_t> touched;
    acc.assign(docs_.size(), 0.0);
    seen.assign(docs_.size(), 0);
    touched.clear();

    double query_length = 0.0;
    for (const auto& q : query) {
      auto it = map.find(q.term);
      if (it == map.end()) continue;
      query_length += q.freq;
      TermStats ts{it->second.postings.size(), it->second.collection_freq};
      for (const auto& p : it->second.postings) {
        if (!seen[p.doc]) {
          seen[p.doc] = 1;
          touched.push_back(p.doc);
        }
        acc[p.doc] += term_contribution(scorer, coll, ts, q.freq, p.freq, doc_stats(p.doc));
      }
    }

    std::vector<SearchHit> hits;
    hits.reserve(touched.size());
    for (std::uint32_t ord : touched) {
      if (exclude_doc_id && docs_[ord].doc_id == *exclude_doc_id) continue;
      hits.push_back({docs_[ord].doc_id, finalize_score(scorer, acc[ord], doc_stats(ord), query_length)});
    }
    auto cmp = [](const SearchHit& a, const SearchHit& b) {
      return ranks_before(a.score, a.doc_id, b.score, b.doc_id);
    };
    std::size_t keep = std::min(top_n, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), cmp);
    hits.resize(keep);
    return hits;
  }

  void save(const std::string& path) const;
  static InvertedIndex load(const std::string& path);

 private:
  struct TermEntry {
    std::vector<Posting> postings;
    std::uint64_t collection_freq = 0;
  };
  using TermMap = std::unordered_map<TermId, TermEntry, TermIdHash>;

  static constexpr std::size_t idx(Field f) { return static_cast<std::size_t>(f); }

  void add_posting(Field f, const TermId& term, Posting p) {
    auto& entry = terms_[idx(f)][term];
    entry.postings.push_back(p);
    entry.collection_freq += p.freq;
  }

  // Derives field statistics, the forward term lists, and tf-idf norms.
  void finalize() {
    std::uint64_t total = 0;
    for (const auto& d : docs_) total += d.length;
    for (auto& s : stats_) s = {docs_.size(), total};

    forward_.assign(docs_.size(), {});
    for (const auto& [term, entry] : terms_[idx(Field::prate)]) {
      for (const auto& p : entry.postings) forward_[p.doc].push_back({term, p.freq});
    }
    for (auto& terms : forward_) {
      std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.term < b.term; });
    }
    tfidf_norms_.resize(docs_.size());
    const auto& coll = stats_[idx(Field::prate)];
    for (std::size_t ord = 0; ord < docs_.size(); ++ord) {
      tfidf_norms_[ord] = tfidf_norm(forward_[ord], coll,
                                     [this](const TermId& t) { return term_stats(Field::prate, t); });
    }
  }

  Mode mode_ = Mode::user_based;
  std::uint32_t scale_factor_ = kDefaultScaleFactor;
  std::vector<DocumentEntry> docs_;
  std::array<TermMap, 2> terms_;
  std::array<CollectionStats, 2> stats_{};
  std::vector<TermVector> forward_;
  std::vector<double> tfidf_norms_;
};

inline InvertedIndex build_index(std::vector<EncodedDocument> docs, Mode mode,
                                 std::uint32_t scale_factor) {
  return InvertedIndex::build(std::move(docs), mode, scale_factor);
}

// Encodes every profile of `data` with its mean and indexes the result.
inline InvertedIndex build_index(const RatingsDataset& data, const MeansTable& means, Mode mode,
                                 std::uint32_t scale_factor = kDefaultScaleFactor) {
  return InvertedIndex::build(encode_all(data, means, mode, scale_factor), mode, scale_factor);
}

inline std::vector<SearchHit> search(const InvertedIndex& index, Field field, const TermVector& query,
                                     std::size_t top_n, const ScorerConfig& scorer,
                                     std::optional<Id> exclude_doc_id = std::nullopt) {
  return index.search(field, query, top_n, scorer, exclude_doc_id);
}

// --- persistence -----------------------------------------------------------
//
// Little-endian layout:
//   "MCRX" | version u32 | mode u8 | scale_factor u32
//   doc count u64 | per doc: doc_id u64, stored_mean f64, norm f64, doc_length u64
//   term count u64 | per term: field u8, prefix u8, raw_id u64, postings u64,
//                    then per posting: ordinal delta u32, frequency u32
// Terms are written ordered by (field, raw_id, prefix).

namespace detail {

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get(std::string_view what) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    if (bytes_.size() - pos_ < sizeof(U)) {
      throw FormatError("truncated index file while reading " + std::string(what));
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline void InvertedIndex::save(const std::string& path) const {
  detail::ByteWriter w;
  w.raw(kMagic.data(), kMagic.size());
  w.put(kFormatVersion);
  w.put(static_cast<std::uint8_t>(mode_));
  w.put(scale_factor_);
  w.put(static_cast<std::uint64_t>(docs_.size()));
  for (const auto& d : docs_) {
    w.put(static_cast<std::uint64_t>(d.doc_id));
    w.put(d.stored_mean);
    w.put(d.norm);
    w.put(d.length);
  }
  std::uint64_t term_count = terms_[0].size() + terms_[1].size();
  w.put(term_count);
  for (Field f : {Field::prate, Field::nrate}) {
    std::vector<const std::pair<const TermId, TermEntry>*> ordered;
    ordered.reserve(terms_[idx(f)].size());
    for (const auto& kv : terms_[idx(f)]) ordered.push_back(&kv);
    std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->first < b->first; });
    for (const auto* kv : ordered) {
      w.put(static_cast<std::uint8_t>(f));
      w.put(static_cast<std::uint8_t>(kv->first.sign));
      w.put(static_cast<std::uint64_t>(kv->first.raw_id));
      w.put(static_cast<std::uint64_t>(kv->second.postings.size()));
      std::uint32_t prev = 0;
      for (const auto& p : kv->second.postings) {
        w.put(p.doc - prev);
        w.put(p.freq);
        prev = p.doc;
      }
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline InvertedIndex InvertedIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open index file " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("bad magic in " + path + ": not an MCRX index");
  }
  detail::ByteReader r(std::vector<char>(bytes.begin() + kMagic.size(), bytes.end()));
  auto version = r.get<std::uint32_t>("version");
  if (version != kFormatVersion) {
    throw FormatError("unsupported index format version " + std::to_string(version));
  }
  InvertedIndex index;
  auto mode = r.get<std::uint8_t>("mode");
  if (mode > 1) throw FormatError("bad mode byte " + std::to_string(mode));
  index.mode_ = static_cast<Mode>(mode);
  index.scale_factor_ = r.get<std::uint32_t>("scale factor");
  if (index.scale_factor_ < 1 || index.scale_factor_ > kMaxScaleFactor) {
    throw FormatError("scale factor out of range");
  }
  auto doc_count = r.get<std::uint64_t>("document count");
  // Each document record takes 32 bytes.
  if (doc_count > r.remaining() / 32) throw FormatError("truncated index file in document table");
  index.docs_.resize(doc_count);
  for (std::uint64_t i = 0; i < doc_count; ++i) {
    auto& d = index.docs_[i];
    d.doc_id = r.get<std::uint64_t>("doc id");
    d.stored_mean = r.get<double>("stored mean");
    d.norm = r.get<double>("norm");
    d.length = r.get<std::uint64_t>("doc length");
    if (i > 0 && index.docs_[i - 1].doc_id >= d.doc_id) {
      throw FormatError("document ids not strictly ascending");
    }
  }
  auto term_count = r.get<std::uint64_t>("term count");
  std::vector<std::uint64_t> lengths(doc_count, 0);
  for (std::uint64_t t = 0; t < term_count; ++t) {
    auto field = r.get<std::uint8_t>("field");
    if (field > 1) throw FormatError("bad field byte " + std::to_string(field));
    auto prefix = r.get<std::uint8_t>("prefix");
    if (prefix != 'p' && prefix != 'n') throw FormatError("bad term prefix byte");
    TermId term{static_cast<Sign>(prefix), r.get<std::uint64_t>("raw id")};
    auto count = r.get<std::uint64_t>("postings count");
    if (count == 0 || count > r.remaining() / 8) throw FormatError("bad postings count for " + term.str());
    auto& entry = index.terms_[field][term];
    if (!entry.postings.empty()) throw FormatError("duplicate term " + term.str());
    entry.postings.reserve(count);
    std::uint64_t ord = 0;
    for (std::uint64_t k = 0; k < count; ++k) {
      auto delta = r.get<std::uint32_t>("posting delta");
      auto freq = r.get<std::uint32_t>("posting frequency");
      if (k > 0 && delta == 0) throw FormatError("postings not strictly ascending for " + term.str());
      ord += delta;
      if (ord >= doc_count) throw FormatError("posting references unknown document");
      if (freq == 0) throw FormatError("zero frequency posting");
      entry.postings.push_back({static_cast<std::uint32_t>(ord), freq});
      entry.collection_freq += freq;
      if (field == 0) lengths[ord] += freq;
    }
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after index data");
  for (std::uint64_t i = 0; i < doc_count; ++i) {
    if (lengths[i] != index.docs_[i].length) throw FormatError("document length mismatch");
  }
  for (const auto& [term, entry] : index.terms_[0]) {
    const auto* mirror = index.postings(Field::nrate, term.flipped());
    if (mirror == nullptr || *mirror != entry.postings) {
      throw FormatError("NRATE field does not mirror PRATE for " + term.str());
    }
  }
  if (index.terms_[0].size() != index.terms_[1].size()) throw FormatError("field vocabularies differ");
  index.finalize();
  return index;
}

inline void save_index(const InvertedIndex& index, const std::string& path) { index.save(path); }
inline InvertedIndex load_index(const std::string& path) { return InvertedIndex::load(path); }

}  // namespace mcrcf
