// Builds a user-based index over a tiny rating table, lists one user's
// neighbors under two scorers, and predicts a missing rating.
#include <cstdio>

#include "mcrcf/mcrcf.hpp"

int main() {
  using namespace mcrcf;

  auto data = RatingsDataset::from_records(
      {
          {1, 10, 5, 0}, {1, 11, 3, 0}, {1, 12, 4, 0},
          {2, 10, 4, 0}, {2, 11, 2, 0}, {2, 13, 5, 0},
          {3, 10, 1, 0}, {3, 11, 5, 0}, {3, 12, 2, 0}, {3, 13, 3, 0},
          {4, 11, 4, 0}, {4, 12, 5, 0}, {4, 13, 1, 0},
      },
      kScaleMl100k);
  MeansTable means = compute_means(data);
  InvertedIndex index = build_index(data, means, Mode::user_based);

  for (ScorerKind kind : {ScorerKind::tf, ScorerKind::bm25}) {
    std::printf("neighbors of user 1 (%s):\n", std::string(to_string(kind)).c_str());
    for (const auto& nb : knn_for_document(index, 1, {3, 10, true}, {kind})) {
      std::printf("  user %llu  %.4f\n", static_cast<unsigned long long>(nb.neighbor_id), nb.similarity);
    }
  }

  auto neighbors = knn_for_document(index, 1, {3, 10}, {ScorerKind::tf});
  Prediction p = predict(Mode::user_based, 1, 13, neighbors, data, means);
  std::printf("predicted rating of user 1 for item 13: %.4f (rounded %g, %s, %zu neighbors)\n", p.value, p.rounded,
              std::string(to_string(p.source)).c_str(), p.neighbor_count_used);
}
