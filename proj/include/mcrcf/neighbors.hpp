#pragma once

#include <algorithm>
#include <vector>

#include "mcrcf/common.hpp"

namespace mcrcf {

struct ScoredNeighbor {
  Id neighbor_id = 0;
  double similarity = 0.0;

  friend bool operator==(const ScoredNeighbor&, const ScoredNeighbor&) = default;
};

using NeighborList = std::vector<ScoredNeighbor>;

// Sorts by descending similarity (ties by ascending id) and keeps the first k.
inline void rank_and_truncate(NeighborList& list, std::size_t k) {
  auto cmp = [](const ScoredNeighbor& a, const ScoredNeighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.neighbor_id < b.neighbor_id;
  };
  std::size_t keep = std::min(k, list.size());
  std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(keep), list.end(), cmp);
  list.resize(keep);
}

}  // namespace mcrcf
