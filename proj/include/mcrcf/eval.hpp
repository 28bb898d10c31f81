#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mcrcf/baselines.hpp"
#include "mcrcf/index.hpp"
#include "mcrcf/knn.hpp"
#include "mcrcf/predictor.hpp"
#include "mcrcf/ratings.hpp"

namespace mcrcf {

enum class SimilarityKind { tf, tfidf, bm25, dirichlet, jelinek_mercer, acs, wacs, pearson };

inline constexpr SimilarityKind kAllSimilarities[] = {
    SimilarityKind::tf,  SimilarityKind::tfidf, SimilarityKind::bm25, SimilarityKind::dirichlet,
    SimilarityKind::jelinek_mercer, SimilarityKind::acs, SimilarityKind::wacs, SimilarityKind::pearson};

inline bool is_index_backed(SimilarityKind s) {
  return s != SimilarityKind::acs && s != SimilarityKind::wacs && s != SimilarityKind::pearson;
}

inline ScorerKind scorer_kind(SimilarityKind s) {
  switch (s) {
    case SimilarityKind::tf: return ScorerKind::tf;
    case SimilarityKind::tfidf: return ScorerKind::tfidf;
    case SimilarityKind::bm25: return ScorerKind::bm25;
    case SimilarityKind::dirichlet: return ScorerKind::dirichlet;
    case SimilarityKind::jelinek_mercer: return ScorerKind::jelinek_mercer;
    default: throw std::invalid_argument("not an index-backed similarity");
  }
}

inline BaselineKind baseline_kind(SimilarityKind s) {
  switch (s) {
    case SimilarityKind::acs: return BaselineKind::acs;
    case SimilarityKind::wacs: return BaselineKind::wacs;
    case SimilarityKind::pearson: return BaselineKind::pearson;
    default: throw std::invalid_argument("not a brute-force similarity");
  }
}

inline std::string_view to_string(SimilarityKind s) {
  if (is_index_backed(s)) return to_string(scorer_kind(s));
  return to_string(baseline_kind(s));
}

inline SimilarityKind parse_similarity(std::string_view text) {
  if (text == "acs") return SimilarityKind::acs;
  if (text == "wacs") return SimilarityKind::wacs;
  if (text == "pearson") return SimilarityKind::pearson;
  switch (parse_scorer_kind(text)) {
    case ScorerKind::tf: return SimilarityKind::tf;
    case ScorerKind::tfidf: return SimilarityKind::tfidf;
    case ScorerKind::bm25: return SimilarityKind::bm25;
    case ScorerKind::dirichlet: return SimilarityKind::dirichlet;
    case ScorerKind::jelinek_mercer: return SimilarityKind::jelinek_mercer;
  }
  throw std::invalid_argument("unknown similarity: " + std::string(text));
}

enum class Rounding { rounded, raw };

struct ExperimentConfig {
  std::string dataset_path;
  RatingFormat format = RatingFormat::ml100k;
  std::optional<RatingScale> csv_scale;
  std::vector<Mode> modes{Mode::user_based, Mode::item_based};
  std::vector<SimilarityKind> similarities{SimilarityKind::tf};
  std::vector<std::size_t> k_values{10};
  std::size_t m = 10;
  std::uint32_t scale_factor = kDefaultScaleFactor;
  std::size_t split_count = 10;
  double train_fraction = 0.8;
  std::uint64_t base_seed = 1;
  Rounding rounding = Rounding::rounded;
  ScorerConfig scorer;  // k1, b, mu, lambda; `kind` is ignored

  void validate() const {
    if (modes.empty() || similarities.empty() || k_values.empty()) {
      throw std::invalid_argument("modes, similarities and k values must be nonempty");
    }
    if (!std::is_sorted(k_values.begin(), k_values.end())) throw std::invalid_argument("k values must be ascending");
    if (k_values.front() < 1) throw std::invalid_argument("k values must be positive");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (scale_factor < 1 || scale_factor > kMaxScaleFactor) throw std::invalid_argument("scale factor out of range");
    if (split_count < 1) throw std::invalid_argument("split count must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train fraction must lie in (0, 1)");
    scorer.validate();
  }
};

struct EvalRow {
  Mode mode = Mode::user_based;
  SimilarityKind similarity = SimilarityKind::tf;
  std::size_t k = 0;
  double mae_mean = 0.0;  // under the configured rounding
  double mae_std = 0.0;   // sample std-dev over splits
  double coverage = 0.0;  // share of test records predicted from a nonempty neighborhood
  std::size_t splits = 0;
  double raw_mae_mean = 0.0;  // unrounded predictions, for reference
};

// MAE of predicting every test record by its base mean alone.
struct BaselineRow {
  Mode mode = Mode::user_based;
  double mae_mean = 0.0;
  double mae_std = 0.0;
  std::size_t splits = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<BaselineRow> mean_only;

  const EvalRow* find(Mode mode, SimilarityKind sim, std::size_t k) const {
    for (const auto& r : rows) {
      if (r.mode == mode && r.similarity == sim && r.k == k) return &r;
    }
    return nullptr;
  }
  const BaselineRow* baseline(Mode mode) const {
    for (const auto& b : mean_only) {
      if (b.mode == mode) return &b;
    }
    return nullptr;
  }
};

inline double mae(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) throw std::invalid_argument("mae: length mismatch");
  if (predictions.empty()) throw std::invalid_argument("mae: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) sum += std::abs(predictions[i] - truths[i]);
  return sum / static_cast<double>(predictions.size());
}

// Inspection hook invoked once per (split, mode) before predictions start.
// `index` is null when no index-backed similarity is configured.
using SplitObserver = std::function<void(std::size_t split_index, const SplitPair&, Mode, const InvertedIndex*)>;

namespace detail {

struct Accumulator {
  std::vector<double> mae_rounded;
  std::vector<double> mae_raw;
  std::vector<double> coverage;
};

inline std::pair<double, double> mean_and_sample_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace detail

inline EvalReport run_experiment(const RatingsDataset& data, const ExperimentConfig& config,
                                 const SplitObserver& observer = {}) {
  config.validate();
  using Key = std::tuple<Mode, SimilarityKind, std::size_t>;
  std::map<Key, detail::Accumulator> acc;
  std::map<Mode, std::vector<double>> baseline_mae;
  const std::size_t k_max = config.k_values.back();
  const bool rounded = config.rounding == Rounding::rounded;
  const bool any_index = std::any_of(config.similarities.begin(), config.similarities.end(), is_index_backed);

  for (std::size_t s = 0; s < config.split_count; ++s) {
    SplitPair sp = split(data, config.train_fraction, config.base_seed + s);
    const RatingsDataset& train = sp.train;
    MeansTable means = compute_means(train);

    for (Mode mode : config.modes) {
      // Test records grouped by the entity whose neighborhood they need.
      std::map<Id, std::vector<const RatingRecord*>> groups;
      for (const auto& r : sp.test) groups[mode == Mode::user_based ? r.user_id : r.item_id].push_back(&r);
      const double n_test = static_cast<double>(sp.test.size());

      double base_err = 0.0;
      for (const auto& r : sp.test) {
        Prediction p = predict(mode, r.user_id, r.item_id, {}, train, means);
        base_err += std::abs((rounded ? p.rounded : p.value) - r.rating);
      }
      baseline_mae[mode].push_back(base_err / n_test);

      std::optional<InvertedIndex> index;
      if (any_index) index = build_index(train, means, mode, config.scale_factor);
      if (observer) observer(s, sp, mode, index ? &*index : nullptr);

      for (SimilarityKind sim : config.similarities) {
        std::vector<double> err_rounded(config.k_values.size(), 0.0);
        std::vector<double> err_raw(config.k_values.size(), 0.0);
        std::vector<double> full(config.k_values.size(), 0.0);
        ScorerConfig scorer = config.scorer;
        if (is_index_backed(sim)) scorer.kind = scorer_kind(sim);

        for (const auto& [entity, records] : groups) {
          bool known = !train.profile(mode, entity).empty();
          NeighborList brute;
          if (known && !is_index_backed(sim)) {
            brute = brute_knn(train, means, entity, mode, k_max, baseline_kind(sim));
          }
          for (std::size_t ki = 0; ki < config.k_values.size(); ++ki) {
            std::size_t k = config.k_values[ki];
            NeighborList neighbors;
            if (known && is_index_backed(sim)) {
              neighbors = knn_for_document(*index, entity, KnnConfig{k, config.m}, scorer);
            } else if (known) {
              neighbors.assign(brute.begin(), brute.begin() + static_cast<std::ptrdiff_t>(std::min(k, brute.size())));
            }
            for (const RatingRecord* r : records) {
              Prediction p = predict(mode, r->user_id, r->item_id, neighbors, train, means);
              err_rounded[ki] += std::abs(p.rounded - r->rating);
              err_raw[ki] += std::abs(p.value - r->rating);
              if (p.source == PredictionSource::full) full[ki] += 1.0;
            }
          }
        }
        for (std::size_t ki = 0; ki < config.k_values.size(); ++ki) {
          auto& a = acc[{mode, sim, config.k_values[ki]}];
          a.mae_rounded.push_back(err_rounded[ki] / n_test);
          a.mae_raw.push_back(err_raw[ki] / n_test);
          a.coverage.push_back(full[ki] / n_test);
        }
      }
    }
  }

  EvalReport report;
  for (const auto& [key, a] : acc) {
    EvalRow row;
    std::tie(row.mode, row.similarity, row.k) = key;
    auto [mean, sd] = detail::mean_and_sample_std(rounded ? a.mae_rounded : a.mae_raw);
    row.mae_mean = mean;
    row.mae_std = sd;
    row.coverage = detail::mean_and_sample_std(a.coverage).first;
    row.splits = a.mae_rounded.size();
    row.raw_mae_mean = detail::mean_and_sample_std(a.mae_raw).first;
    report.rows.push_back(row);
  }
  for (const auto& [mode, xs] : baseline_mae) {
    auto [mean, sd] = detail::mean_and_sample_std(xs);
    report.mean_only.push_back({mode, mean, sd, xs.size()});
  }
  return report;
}

inline EvalReport run_experiment(const ExperimentConfig& config, const SplitObserver& observer = {}) {
  RatingsDataset data = load_ratings(config.dataset_path, config.format, config.csv_scale);
  return run_experiment(data, config, observer);
}

enum class ReportFormat { csv, tsv };

inline constexpr std::string_view kReportHeader[] = {"mode", "similarity", "k", "mae_mean",
                                                     "mae_std", "coverage", "splits"};

// One line per (mode, similarity, k), sorted by those columns as text / number.
inline void write_report(std::ostream& out, const EvalReport& report, ReportFormat format) {
  const char sep = format == ReportFormat::csv ? ',' : '\t';
  for (std::size_t i = 0; i < std::size(kReportHeader); ++i) out << (i ? std::string(1, sep) : "") << kReportHeader[i];
  out << '\n';
  std::vector<const EvalRow*> rows;
  for (const auto& r : report.rows) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [](const EvalRow* a, const EvalRow* b) {
    return std::tuple(to_string(a->mode), to_string(a->similarity), a->k) <
           std::tuple(to_string(b->mode), to_string(b->similarity), b->k);
  });
  out << std::fixed << std::setprecision(6);
  for (const auto* r : rows) {
    out << to_string(r->mode) << sep << to_string(r->similarity) << sep << r->k << sep << r->mae_mean << sep
        << r->mae_std << sep << r->coverage << sep << r->splits << '\n';
  }
}

inline void emit_report(const EvalReport& report, const std::string& path, ReportFormat format) {
  if (report.rows.empty()) throw std::invalid_argument("cannot emit an empty report");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_report(out, report, format);
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Reads a file produced by emit_report. Only the emitted columns survive.
inline EvalReport parse_report(std::istream& in, ReportFormat format) {
  const std::string delim(1, format == ReportFormat::csv ? ',' : '\t');
  EvalReport report;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty report");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::split_on(line, delim);
    if (f.size() != 7) throw DataError("report line " + std::to_string(line_no) + ": expected 7 columns");
    EvalRow row;
    row.mode = parse_mode(f[0]);
    row.similarity = parse_similarity(f[1]);
    if (!detail::parse_number(f[2], row.k) || !detail::parse_number(f[3], row.mae_mean) ||
        !detail::parse_number(f[4], row.mae_std) || !detail::parse_number(f[5], row.coverage) ||
        !detail::parse_number(f[6], row.splits)) {
      throw DataError("report line " + std::to_string(line_no) + ": bad number");
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace mcrcf
