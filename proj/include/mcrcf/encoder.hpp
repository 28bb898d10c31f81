#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcrcf/common.hpp"
#include "mcrcf/ratings.hpp"

namespace mcrcf {

inline constexpr std::uint32_t kDefaultScaleFactor = 100;
inline constexpr std::uint32_t kMaxScaleFactor = 1'000'000;

enum class Sign : std::uint8_t { positive = 'p', negative = 'n' };

inline constexpr Sign flip(Sign s) {
  return s == Sign::positive ? Sign::negative : Sign::positive;
}

// A term of the encoded vocabulary: a raw item (or user) id tagged with the
// sign of its mean-centered rate. Serializes as "p37" / "n24".
struct TermId {
  Sign sign = Sign::positive;
  Id raw_id = 0;

  std::string str() const { return static_cast<char>(sign) + std::to_string(raw_id); }
  TermId flipped() const { return {flip(sign), raw_id}; }

  // Orders by raw id first so p/n variants of one id sit together.
  friend auto operator<=>(const TermId& a, const TermId& b) {
    if (auto c = a.raw_id <=> b.raw_id; c != 0) return c;
    return static_cast<std::uint8_t>(a.sign) <=> static_cast<std::uint8_t>(b.sign);
  }
  friend bool operator==(const TermId&, const TermId&) = default;
};

struct TermIdHash {
  std::size_t operator()(const TermId& t) const noexcept {
    return std::hash<Id>{}(t.raw_id * 2 + (t.sign == Sign::negative ? 1 : 0));
  }
};

struct TermFrequency {
  TermId term;
  std::uint32_t freq = 0;

  friend bool operator==(const TermFrequency&, const TermFrequency&) = default;
};

// Sparse term-frequency vector sorted by term.
using TermVector = std::vector<TermFrequency>;

inline TermVector flipped(const TermVector& terms) {
  TermVector out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back({t.term.flipped(), t.freq});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.term < b.term; });
  return out;
}

inline double euclidean_norm(const TermVector& terms) {
  double sum = 0.0;
  for (const auto& t : terms) sum += static_cast<double>(t.freq) * static_cast<double>(t.freq);
  return std::sqrt(sum);
}

// A profile rendered as the two-field document stored in the index.
struct EncodedDocument {
  Id doc_id = 0;
  TermVector prate;
  TermVector nrate;
  double stored_mean = 0.0;
  double norm = 0.0;
};

// Quantized magnitude of a mean-centered rate: truncation toward zero of
// |mcr| * scale_factor. The small slack absorbs binary representation error
// so that e.g. (4 - 3.95) * 100 yields 5 rather than 4.
inline std::uint32_t quantize_mcr(double centered, std::uint32_t scale_factor) {
  double scaled = std::abs(centered) * static_cast<double>(scale_factor);
  return static_cast<std::uint32_t>(std::floor(scaled + 1e-6));
}

inline TermVector encode_query(Profile profile, double mean,
                               std::uint32_t scale_factor = kDefaultScaleFactor) {
  if (scale_factor < 1 || scale_factor > kMaxScaleFactor) {
    throw std::invalid_argument("scale_factor must lie in [1, 1e6]");
  }
  TermVector out;
  out.reserve(profile.size());
  for (const auto& r : profile) {
    double centered = mcr(r.rating, mean);
    std::uint32_t q = quantize_mcr(centered, scale_factor);
    if (q == 0) continue;
    out.push_back({{centered > 0 ? Sign::positive : Sign::negative, r.id}, q});
  }
  // Profiles built by RatingsDataset are already id-sorted; arbitrary input may not be.
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.term < b.term; });
  return out;
}

inline EncodedDocument encode_profile(Id doc_id, Profile profile, double mean,
                                      std::uint32_t scale_factor = kDefaultScaleFactor) {
  EncodedDocument doc;
  doc.doc_id = doc_id;
  doc.prate = encode_query(profile, mean, scale_factor);
  doc.nrate = flipped(doc.prate);
  doc.stored_mean = mean;
  doc.norm = euclidean_norm(doc.prate);
  return doc;
}

inline std::vector<EncodedDocument> encode_all(const RatingsDataset& data, const MeansTable& means,
                                               Mode mode, std::uint32_t scale_factor) {
  std::vector<EncodedDocument> docs;
  docs.reserve(data.entities(mode).size());
  for (Id id : data.entities(mode)) {
    docs.push_back(encode_profile(id, data.profile(mode, id), *means.of(mode, id), scale_factor));
  }
  return docs;
}

}  // namespace mcrcf
