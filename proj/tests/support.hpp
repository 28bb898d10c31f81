#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mcrcf/neighbors.hpp"
#include "mcrcf/ratings.hpp"

namespace mcrcf::testing {

// Location of MovieLens 100K u.data, if configured and present.
inline std::optional<std::string> ml100k_path() {
  const char* env = std::getenv("MCRCF_ML100K");
  if (env == nullptr || !std::filesystem::exists(env)) return std::nullopt;
  return std::string(env);
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("mcrcf_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& contents) const {
    std::ofstream out(file(name), std::ios::binary);
    out << contents;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

// Dense corpus: every user rates every item with an integer 1..5. With
// `items` = 100 every user mean, hence every user-side MCR, is an exact
// multiple of 0.01.
inline RatingsDataset dense_corpus(std::size_t users, std::size_t items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> rate(1, 5);
  std::vector<RatingRecord> recs;
  recs.reserve(users * items);
  for (std::size_t u = 1; u <= users; ++u) {
    for (std::size_t i = 1; i <= items; ++i) recs.push_back({u, i, static_cast<double>(rate(rng)), 0});
  }
  return RatingsDataset::from_records(std::move(recs), kScaleMl100k);
}

// Sparse random corpus with a per-user taste offset so neighborhoods carry
// some signal.
inline RatingsDataset sparse_corpus(std::size_t users, std::size_t items, std::size_t per_user,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(1, items);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> item_bias(items + 1);
  for (auto& b : item_bias) b = noise(rng) * 0.8;
  std::vector<RatingRecord> recs;
  for (std::size_t u = 1; u <= users; ++u) {
    double user_bias = noise(rng) * 0.5;
    std::vector<bool> taken(items + 1, false);
    std::size_t n = 0;
    while (n < per_user) {
      std::size_t i = pick(rng);
      if (taken[i]) continue;
      taken[i] = true;
      ++n;
      double r = std::round(3.3 + user_bias + item_bias[i] + noise(rng) * 0.7);
      recs.push_back({u, i, std::clamp(r, 1.0, 5.0), 0});
    }
  }
  return RatingsDataset::from_records(std::move(recs), kScaleMl100k);
}

// True when both lists hold the same ids in the same order, except that
// neighbors whose scores agree within `tol` may appear in any order among
// themselves. Scores that tie exactly in real arithmetic can differ in the last
// bits after floating-point evaluation, so their relative order is noise.
inline bool same_ranking_up_to_ties(const NeighborList& got, const NeighborList& want, double tol) {
  if (got.size() != want.size()) return false;
  std::size_t start = 0;
  while (start < want.size()) {
    std::size_t end = start + 1;
    while (end < want.size() && std::abs(want[end].similarity - want[start].similarity) <= tol) ++end;
    std::vector<Id> a, b;
    for (std::size_t i = start; i < end; ++i) {
      if (std::abs(got[i].similarity - want[i].similarity) > tol) return false;
      a.push_back(got[i].neighbor_id);
      b.push_back(want[i].neighbor_id);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;
    start = end;
  }
  return true;
}

}  // namespace mcrcf::testing
