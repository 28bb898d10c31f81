#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcrcf/neighbors.hpp"
#include "mcrcf/ratings.hpp"

namespace mcrcf {

// A similarity value; `defined` is false for degenerate inputs (no usable
// overlap), in which case `value` is 0.
struct Similarity {
  double value = 0.0;
  bool defined = false;
};

// Co-rated ids of two profiles and each side's mean over that overlap.
// In general pair_mean_left != pair_mean_right.
struct CoRatedStats {
  std::vector<Id> overlap;
  double pair_mean_left = 0.0;
  double pair_mean_right = 0.0;
};

namespace detail {

// Calls fn(left_rating, right_rating) for every id present in both profiles.
template <typename Fn>
void for_each_co_rated(Profile left, Profile right, Fn&& fn) {
  auto l = left.begin();
  auto r = right.begin();
  while (l != left.end() && r != right.end()) {
    if (l->id < r->id) {
      ++l;
    } else if (r->id < l->id) {
      ++r;
    } else {
      fn(l->id, l->rating, r->rating);
      ++l;
      ++r;
    }
  }
}

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace detail

inline CoRatedStats co_rated(Profile left, Profile right) {
  CoRatedStats stats;
  double sum_l = 0.0, sum_r = 0.0;
  detail::for_each_co_rated(left, right, [&](Id id, double a, double b) {
    stats.overlap.push_back(id);
    sum_l += a;
    sum_r += b;
  });
  if (!stats.overlap.empty()) {
    auto n = static_cast<double>(stats.overlap.size());
    stats.pair_mean_left = sum_l / n;
    stats.pair_mean_right = sum_r / n;
  }
  return stats;
}

// Pearson correlation over the co-rated ids, each side centered by its
// pairwise mean.
inline Similarity pearson(Profile left, Profile right) {
  CoRatedStats stats = co_rated(left, right);
  if (stats.overlap.size() < 2) return {};
  double num = 0.0, ss_l = 0.0, ss_r = 0.0;
  detail::for_each_co_rated(left, right, [&](Id, double a, double b) {
    double x = a - stats.pair_mean_left;
    double y = b - stats.pair_mean_right;
    num += x * y;
    ss_l += x * x;
    ss_r += y * y;
  });
  if (ss_l <= 0.0 || ss_r <= 0.0) return {};
  return {detail::clamp_unit(num / (std::sqrt(ss_l) * std::sqrt(ss_r))), true};
}

// Adjusted cosine: like Pearson, but each side is centered by its global
// mean over all of its ratings.
inline Similarity acs(Profile left, Profile right, double left_mean, double right_mean) {
  double num = 0.0, ss_l = 0.0, ss_r = 0.0;
  detail::for_each_co_rated(left, right, [&](Id, double a, double b) {
    double x = a - left_mean;
    double y = b - right_mean;
    num += x * y;
    ss_l += x * x;
    ss_r += y * y;
  });
  if (ss_l <= 0.0 || ss_r <= 0.0) return {};
  return {detail::clamp_unit(num / (std::sqrt(ss_l) * std::sqrt(ss_r))), true};
}

// |A ∩ B| / |A ∪ B| over sorted id sets; 0 when both are empty.
inline double jaccard(std::span<const Id> left, std::span<const Id> right) {
  std::size_t common = 0;
  auto l = left.begin();
  auto r = right.begin();
  while (l != left.end() && r != right.end()) {
    if (*l < *r) {
      ++l;
    } else if (*r < *l) {
      ++r;
    } else {
      ++common;
      ++l;
      ++r;
    }
  }
  std::size_t uni = left.size() + right.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

// Jaccard coefficient of the two profiles' support sets.
inline double jaccard(Profile left, Profile right) {
  std::size_t common = 0;
  detail::for_each_co_rated(left, right, [&](Id, double, double) { ++common; });
  std::size_t uni = left.size() + right.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

// ACS weighted by the Jaccard coefficient of the supports.
inline Similarity wacs(Profile left, Profile right, double left_mean, double right_mean) {
  Similarity s = acs(left, right, left_mean, right_mean);
  s.value *= jaccard(left, right);
  return s;
}

enum class BaselineKind { pearson, acs, wacs };

inline std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::pearson: return "pearson";
    case BaselineKind::acs: return "acs";
    case BaselineKind::wacs: return "wacs";
  }
  return "?";
}

inline Similarity baseline_similarity(BaselineKind kind, Profile left, Profile right, double left_mean,
                                      double right_mean) {
  switch (kind) {
    case BaselineKind::pearson: return pearson(left, right);
    case BaselineKind::acs: return acs(left, right, left_mean, right_mean);
    case BaselineKind::wacs: return wacs(left, right, left_mean, right_mean);
  }
  return {};
}

// Exhaustive top-k over every other user (or item). Degenerate pairs score 0
// and stay in the candidate pool.
inline NeighborList brute_knn(const RatingsDataset& data, const MeansTable& means, Id query_id, Mode mode,
                              std::size_t k, BaselineKind kind) {
  Profile query = data.profile(mode, query_id);
  if (query.empty()) throw DataError("query id " + std::to_string(query_id) + " not in dataset");
  double query_mean = *means.of(mode, query_id);
  NeighborList out;
  out.reserve(data.entities(mode).size());
  for (Id cand : data.entities(mode)) {
    if (cand == query_id) continue;
    Similarity s = baseline_similarity(kind, query, data.profile(mode, cand), query_mean,
                                       *means.of(mode, cand));
    out.push_back({cand, s.value});
  }
  rank_and_truncate(out, k);
  return out;
}

// Exact ACS top-k restricted to candidates the index would retrieve: those
// sharing at least one co-rated id on which both sides deviate from their
// mean. Serves as the oracle for the index-backed engine.
inline NeighborList knn_exhaustive(const RatingsDataset& data, const MeansTable& means, Id query_id,
                                   Mode mode, std::size_t k) {
  Profile query = data.profile(mode, query_id);
  if (query.empty()) throw DataError("query id " + std::to_string(query_id) + " not in dataset");
  constexpr double kZero = 1e-12;
  double query_mean = *means.of(mode, query_id);
  NeighborList out;
  for (Id cand : data.entities(mode)) {
    if (cand == query_id) continue;
    Profile other = data.profile(mode, cand);
    double other_mean = *means.of(mode, cand);
    bool shares_term = false;
    detail::for_each_co_rated(query, other, [&](Id, double a, double b) {
      if (std::abs(a - query_mean) > kZero && std::abs(b - other_mean) > kZero) shares_term = true;
    });
    if (!shares_term) continue;
    out.push_back({cand, acs(query, other, query_mean, other_mean).value});
  }
  rank_and_truncate(out, k);
  return out;
}

}  // namespace mcrcf
