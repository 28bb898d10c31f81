#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>

#include "mcrcf/neighbors.hpp"
#include "mcrcf/ratings.hpp"

namespace mcrcf {

enum class PredictionSource { full, base_only };

inline std::string_view to_string(PredictionSource s) {
  return s == PredictionSource::full ? "full" : "base_only";
}

struct Prediction {
  double value = 0.0;
  double rounded = 0.0;
  PredictionSource source = PredictionSource::base_only;
  std::size_t neighbor_count_used = 0;
};

// Clamp into the scale, then snap to the nearest step; exact half steps go up.
inline double round_to_scale(double value, const RatingScale& scale) {
  double clamped = std::clamp(value, scale.min, scale.max);
  double steps = std::floor((clamped - scale.min) / scale.step + 0.5);
  return std::min(scale.max, scale.min + steps * scale.step);
}

namespace detail {

// base + Σ sim·dev / Σ|sim| over the neighbors for which `deviation` yields a
// value. Falls back to `base` when nothing contributes.
template <typename DeviationFn>
Prediction weighted_deviation(double base, std::span<const ScoredNeighbor> neighbors,
                              const RatingScale& scale, DeviationFn&& deviation) {
  double num = 0.0, den = 0.0;
  std::size_t used = 0;
  for (const auto& n : neighbors) {
    std::optional<double> dev = deviation(n.neighbor_id);
    if (!dev) continue;
    num += n.similarity * *dev;
    den += std::abs(n.similarity);
    ++used;
  }
  Prediction p;
  if (used == 0 || den <= 0.0) {
    p.value = base;
    p.source = PredictionSource::base_only;
  } else {
    p.value = base + num / den;
    p.source = PredictionSource::full;
    p.neighbor_count_used = used;
  }
  p.rounded = round_to_scale(p.value, scale);
  return p;
}

inline Prediction global_fallback(const RatingsDataset& train, const MeansTable& means) {
  Prediction p;
  p.value = means.global_mean;
  p.rounded = round_to_scale(p.value, train.scale());
  return p;
}

}  // namespace detail

// Predicts user a's rating of item j from a's nearest users.
inline Prediction predict_user_based(Id a, Id j, std::span<const ScoredNeighbor> neighbors,
                                     const RatingsDataset& train, const MeansTable& means) {
  auto base = means.user(a);
  if (!base) return detail::global_fallback(train, means);
  return detail::weighted_deviation(*base, neighbors, train.scale(), [&](Id u) -> std::optional<double> {
    auto r = train.rating(u, j);
    auto mu = means.user(u);
    if (!r || !mu) return std::nullopt;
    return *r - *mu;
  });
}

// Predicts user a's rating of item i from the items nearest to i.
inline Prediction predict_item_based(Id a, Id i, std::span<const ScoredNeighbor> neighbors,
                                     const RatingsDataset& train, const MeansTable& means) {
  auto base = means.item(i);
  if (!base) return detail::global_fallback(train, means);
  return detail::weighted_deviation(*base, neighbors, train.scale(), [&](Id j) -> std::optional<double> {
    auto r = train.rating(a, j);
    auto mu = means.item(j);
    if (!r || !mu) return std::nullopt;
    return *r - *mu;
  });
}

inline Prediction predict(Mode mode, Id user, Id item, std::span<const ScoredNeighbor> neighbors,
                          const RatingsDataset& train, const MeansTable& means) {
  return mode == Mode::user_based ? predict_user_based(user, item, neighbors, train, means)
                                  : predict_item_based(user, item, neighbors, train, means);
}

}  // namespace mcrcf
