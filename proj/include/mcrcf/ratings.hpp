#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mcrcf/common.hpp"

namespace mcrcf {

struct RatingRecord {
  Id user_id = 0;
  Id item_id = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

struct RatingScale {
  double min = 1.0;
  double max = 5.0;
  double step = 1.0;

  // True when value lies in [min, max] on a step boundary.
  bool contains(double value) const {
    if (value < min - kTolerance || value > max + kTolerance) return false;
    double steps = (value - min) / step;
    return std::abs(steps - std::round(steps)) < kTolerance;
  }

  bool valid() const {
    if (!(step > 0.0) || !(max >= min)) return false;
    double steps = (max - min) / step;
    return std::abs(steps - std::round(steps)) < kTolerance;
  }

  static constexpr double kTolerance = 1e-9;
};

inline constexpr RatingScale kScaleMl100k{1.0, 5.0, 1.0};
inline constexpr RatingScale kScaleMl10m{0.5, 5.0, 0.5};

enum class RatingFormat { ml100k, ml1m_10m, csv };

inline RatingFormat parse_rating_format(std::string_view text) {
  if (text == "ml100k") return RatingFormat::ml100k;
  if (text == "ml1m_10m" || text == "ml1m" || text == "ml10m") return RatingFormat::ml1m_10m;
  if (text == "csv") return RatingFormat::csv;
  throw std::invalid_argument("unknown rating format: " + std::string(text));
}

// One entry of a rating profile: the rated (or rating) id and the value.
struct Rated {
  Id id = 0;
  double rating = 0.0;
};

using Profile = std::span<const Rated>;

// Sparse user x item matrix, indexed both by row (S_u) and by column (S_i).
// Immutable once built; every profile list is sorted by id.
class RatingsDataset {
 public:
  RatingsDataset() = default;

  // Validates scale membership and (user, item) uniqueness.
  static RatingsDataset from_records(std::vector<RatingRecord> records, RatingScale scale) {
    if (!scale.valid()) throw DataError("invalid rating scale");
    std::sort(records.begin(), records.end(), [](const RatingRecord& a, const RatingRecord& b) {
      return std::pair(a.user_id, a.item_id) < std::pair(b.user_id, b.item_id);
    });
    RatingsDataset out;
    out.scale_ = scale;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (!scale.contains(r.rating)) {
        throw DataError("rating " + std::to_string(r.rating) + " off scale for user " +
                        std::to_string(r.user_id) + " item " + std::to_string(r.item_id));
      }
      if (i > 0 && records[i - 1].user_id == r.user_id && records[i - 1].item_id == r.item_id) {
        throw DataError("duplicate rating for user " + std::to_string(r.user_id) + " item " +
                        std::to_string(r.item_id));
      }
      out.by_user_[r.user_id].push_back({r.item_id, r.rating});
      out.by_item_[r.item_id].push_back({r.user_id, r.rating});
    }
    out.records_ = std::move(records);
    out.user_ids_.reserve(out.by_user_.size());
    for (const auto& [id, _] : out.by_user_) out.user_ids_.push_back(id);
    out.item_ids_.reserve(out.by_item_.size());
    for (auto& [id, list] : out.by_item_) {
      out.item_ids_.push_back(id);
      // Users arrive in ascending order already; keep the guarantee explicit.
      std::sort(list.begin(), list.end(), [](const Rated& a, const Rated& b) { return a.id < b.id; });
    }
    std::sort(out.user_ids_.begin(), out.user_ids_.end());
    std::sort(out.item_ids_.begin(), out.item_ids_.end());
    return out;
  }

  const RatingScale& scale() const { return scale_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Sorted by (user, item).
  const std::vector<RatingRecord>& records() const { return records_; }
  const std::vector<Id>& users() const { return user_ids_; }
  const std::vector<Id>& items() const { return item_ids_; }

  Profile user_profile(Id user) const { return lookup(by_user_, user); }
  Profile item_profile(Id item) const { return lookup(by_item_, item); }

  // A document's profile: a user's row in user-based mode, an item's column otherwise.
  Profile profile(Mode mode, Id id) const {
    return mode == Mode::user_based ? user_profile(id) : item_profile(id);
  }
  const std::vector<Id>& entities(Mode mode) const {
    return mode == Mode::user_based ? user_ids_ : item_ids_;
  }

  std::optional<double> rating(Id user, Id item) const {
    Profile row = user_profile(user);
    auto it = std::lower_bound(row.begin(), row.end(), item,
                               [](const Rated& r, Id id) { return r.id < id; });
    if (it == row.end() || it->id != item) return std::nullopt;
    return it->rating;
  }

 private:
  using ProfileMap = std::unordered_map<Id, std::vector<Rated>>;

  static Profile lookup(const ProfileMap& map, Id id) {
    auto it = map.find(id);
    if (it == map.end()) return {};
    return it->second;
  }

  RatingScale scale_{};
  std::vector<RatingRecord> records_;
  ProfileMap by_user_;
  ProfileMap by_item_;
  std::vector<Id> user_ids_;
  std::vector<Id> item_ids_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

inline std::vector<std::string_view> split_on(std::string_view line, std::string_view delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(delim, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + delim.size();
  }
}

// Comma-separated fields with RFC-4180 double-quote escaping.
inline std::vector<std::string> split_csv(std::string_view line, bool& ok) {
  std::vector<std::string> out(1);
  bool quoted = false;
  ok = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          out.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) ok = false;
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  text = trim(text);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

inline RatingRecord parse_fields(const std::vector<std::string_view>& fields, std::size_t line_no) {
  auto fail = [line_no](const std::string& what) {
    return DataError("line " + std::to_string(line_no) + ": " + what);
  };
  if (fields.size() != 4) throw fail("expected 4 fields, got " + std::to_string(fields.size()));
  RatingRecord r;
  if (!parse_number(fields[0], r.user_id) || r.user_id < 1) throw fail("bad user id");
  if (!parse_number(fields[1], r.item_id) || r.item_id < 1) throw fail("bad item id");
  if (!parse_number(fields[2], r.rating)) throw fail("bad rating");
  if (!parse_number(fields[3], r.timestamp)) throw fail("bad timestamp");
  return r;
}

}  // namespace detail

inline std::vector<RatingRecord> parse_ratings(std::istream& in, RatingFormat format) {
  std::vector<RatingRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    switch (format) {
      case RatingFormat::ml100k:
        records.push_back(detail::parse_fields(detail::split_on(view, "\t"), line_no));
        break;
      case RatingFormat::ml1m_10m:
        records.push_back(detail::parse_fields(detail::split_on(view, "::"), line_no));
        break;
      case RatingFormat::csv: {
        bool ok = true;
        auto owned = detail::split_csv(view, ok);
        if (!ok) throw DataError("line " + std::to_string(line_no) + ": unterminated quote");
        if (line_no == 1) {
          std::vector<std::string_view> header;
          for (const auto& f : owned) header.push_back(detail::trim(f));
          if (header != std::vector<std::string_view>{"user_id", "item_id", "rating", "timestamp"}) {
            throw DataError("line 1: expected header user_id,item_id,rating,timestamp");
          }
          break;
        }
        std::vector<std::string_view> fields(owned.begin(), owned.end());
        records.push_back(detail::parse_fields(fields, line_no));
        break;
      }
    }
  }
  if (format == RatingFormat::csv && line_no == 0) throw DataError("line 1: missing csv header");
  return records;
}

// `csv_scale` is required for the csv format, whose scale cannot be inferred.
inline RatingsDataset load_ratings(const std::string& path, RatingFormat format,
                                   std::optional<RatingScale> csv_scale = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  RatingScale scale;
  switch (format) {
    case RatingFormat::ml100k: scale = kScaleMl100k; break;
    case RatingFormat::ml1m_10m: scale = kScaleMl10m; break;
    case RatingFormat::csv:
      if (!csv_scale) throw std::invalid_argument("csv format requires an explicit rating scale");
      scale = *csv_scale;
      break;
  }
  return RatingsDataset::from_records(parse_ratings(in, format), scale);
}

struct MeansTable {
  std::unordered_map<Id, double> user_mean;
  std::unordered_map<Id, double> item_mean;
  double global_mean = 0.0;

  std::optional<double> user(Id id) const { return find(user_mean, id); }
  std::optional<double> item(Id id) const { return find(item_mean, id); }
  std::optional<double> of(Mode mode, Id id) const {
    return mode == Mode::user_based ? user(id) : item(id);
  }

 private:
  static std::optional<double> find(const std::unordered_map<Id, double>& m, Id id) {
    auto it = m.find(id);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }
};

// Means over all of each user's / item's ratings. Sums run in id order so the
// result does not depend on input ordering.
inline MeansTable compute_means(const RatingsDataset& data) {
  if (data.empty()) throw DataError("cannot compute means of an empty dataset");
  auto mean_of = [](Profile p) {
    double sum = 0.0;
    for (const auto& r : p) sum += r.rating;
    return sum / static_cast<double>(p.size());
  };
  MeansTable means;
  means.user_mean.reserve(data.users().size());
  for (Id u : data.users()) means.user_mean.emplace(u, mean_of(data.user_profile(u)));
  means.item_mean.reserve(data.items().size());
  for (Id i : data.items()) means.item_mean.emplace(i, mean_of(data.item_profile(i)));
  double total = 0.0;
  for (const auto& r : data.records()) total += r.rating;
  means.global_mean = total / static_cast<double>(data.size());
  return means;
}

// Mean-centered rate.
inline double mcr(double rating, double mean) { return rating - mean; }

struct SplitPair {
  RatingsDataset train;
  std::vector<RatingRecord> test;
  std::uint64_t seed = 0;
  double train_fraction = 0.0;
};

// Uniform bounded draw by rejection, so the sequence depends only on the
// mt19937_64 stream and not on a library's distribution implementation.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Seeded partition of the rating triples: records are taken in (user, item)
// order, shuffled with Fisher-Yates driven by mt19937_64(seed), and the first
// round(train_fraction * n) become the training set.
inline SplitPair split(const RatingsDataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  if (data.empty()) throw DataError("cannot split an empty dataset");
  std::vector<RatingRecord> shuffled = data.records();
  std::mt19937_64 rng(seed);
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    std::size_t j = bounded_draw(rng, i + 1);
    std::swap(shuffled[i], shuffled[j]);
  }
  auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(shuffled.size())));
  SplitPair out;
  out.seed = seed;
  out.train_fraction = train_fraction;
  out.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(cut), shuffled.end());
  shuffled.resize(cut);
  out.train = RatingsDataset::from_records(std::move(shuffled), data.scale());
  return out;
}

}  // namespace mcrcf
