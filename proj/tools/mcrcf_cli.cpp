#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mcrcf/mcrcf.hpp"

namespace {

using namespace mcrcf;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DatasetFlags {
  std::string input;
  std::string format = "ml100k";
  std::string scale;  // MIN:MAX:STEP, csv only

  void add(CLI::App* cmd, const std::string& flag = "--input") {
    cmd->add_option(flag, input, "ratings file")->required();
    cmd->add_option("--format", format, "ml100k | ml1m_10m | csv")->capture_default_str();
    cmd->add_option("--scale", scale, "rating scale MIN:MAX:STEP for csv input");
  }

  std::optional<RatingScale> csv_scale() const {
    if (scale.empty()) return std::nullopt;
    auto parts = detail::split_on(scale, ":");
    RatingScale s;
    if (parts.size() != 3 || !detail::parse_number(parts[0], s.min) || !detail::parse_number(parts[1], s.max) ||
        !detail::parse_number(parts[2], s.step) || !s.valid()) {
      throw UsageError("--scale expects MIN:MAX:STEP");
    }
    return s;
  }

  RatingsDataset load() const { return load_ratings(input, parse_rating_format(format), csv_scale()); }
};

struct ScorerFlags {
  std::string similarity = "tf";
  ScorerConfig cfg;

  void add(CLI::App* cmd, bool with_similarity = true) {
    if (with_similarity) {
      cmd->add_option("--similarity", similarity, "tf | tfidf | bm25 | dirichlet | jelinek_mercer")
          ->capture_default_str();
    }
    cmd->add_option("--bm25-k1", cfg.bm25_k1)->capture_default_str();
    cmd->add_option("--bm25-b", cfg.bm25_b)->capture_default_str();
    cmd->add_option("--mu", cfg.dirichlet_mu, "Dirichlet smoothing")->capture_default_str();
    cmd->add_option("--lambda", cfg.jm_lambda, "Jelinek-Mercer smoothing")->capture_default_str();
  }

  ScorerConfig resolve() const {
    ScorerConfig out = cfg;
    out.kind = parse_scorer_kind(similarity);
    out.validate();
    return out;
  }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto part : detail::split_on(text, ",")) {
    auto t = detail::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  if (out.empty()) throw UsageError("empty list: '" + text + "'");
  return out;
}

// Fixture format: one "neighbor_id<TAB>similarity" pair per line.
NeighborList read_neighbors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  NeighborList out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto f = detail::split_on(line, "\t");
    ScoredNeighbor nb;
    if (f.size() != 2 || !detail::parse_number(f[0], nb.neighbor_id) || !detail::parse_number(f[1], nb.similarity)) {
      throw DataError(path + " line " + std::to_string(line_no) + ": expected id<TAB>similarity");
    }
    out.push_back(nb);
  }
  return out;
}

void print_neighbors(const NeighborList& list) {
  for (const auto& nb : list) std::printf("%llu\t%.9g\n", static_cast<unsigned long long>(nb.neighbor_id), nb.similarity);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative filtering over mean-centered rating indexes"};
  app.require_subcommand(1);

  // index
  DatasetFlags index_data;
  std::string index_mode = "user";
  std::uint32_t index_sf = kDefaultScaleFactor;
  std::string index_out;
  auto* cmd_index = app.add_subcommand("index", "encode a ratings file and write an index");
  index_data.add(cmd_index);
  cmd_index->add_option("--mode", index_mode, "user | item")->capture_default_str();
  cmd_index->add_option("--scale-factor", index_sf)->check(CLI::Range(1u, kMaxScaleFactor))->capture_default_str();
  cmd_index->add_option("--out", index_out, "index file")->required();

  // knn
  std::string knn_index;
  Id knn_query_id = 0;
  KnnConfig knn_cfg;
  ScorerFlags knn_scorer;
  auto* cmd_knn = app.add_subcommand("knn", "print the neighbors of a stored document");
  cmd_knn->add_option("--index", knn_index)->required();
  cmd_knn->add_option("--query-id", knn_query_id)->required();
  cmd_knn->add_option("--k", knn_cfg.k)->check(CLI::PositiveNumber)->capture_default_str();
  cmd_knn->add_option("--m", knn_cfg.expansion)->check(CLI::PositiveNumber)->capture_default_str();
  cmd_knn->add_flag("--query-norm", knn_cfg.divide_by_query_norm, "divide scores by the query norm (tf, tfidf)");
  knn_scorer.add(cmd_knn);

  // predict
  std::string pred_index, pred_neighbors, pred_mode;
  DatasetFlags pred_train;
  Id pred_user = 0, pred_item = 0;
  KnnConfig pred_cfg;
  ScorerFlags pred_scorer;
  auto* cmd_predict = app.add_subcommand("predict", "predict one rating");
  cmd_predict->add_option("--index", pred_index);
  pred_train.add(cmd_predict, "--train");
  cmd_predict->add_option("--user", pred_user)->required();
  cmd_predict->add_option("--item", pred_item)->required();
  cmd_predict->add_option("--k", pred_cfg.k)->check(CLI::PositiveNumber)->capture_default_str();
  cmd_predict->add_option("--m", pred_cfg.expansion)->check(CLI::PositiveNumber)->capture_default_str();
  cmd_predict->add_option("--neighbors", pred_neighbors, "use a fixed neighbor list instead of the index");
  cmd_predict->add_option("--mode", pred_mode, "user | item (defaults to the index mode)");
  pred_scorer.add(cmd_predict);

  // evaluate
  DatasetFlags eval_data;
  std::string eval_modes = "user,item", eval_sims = "tf", eval_k = "10", eval_rounding = "rounded";
  std::string eval_out, eval_report_format = "csv";
  ExperimentConfig eval_cfg;
  ScorerFlags eval_scorer;
  auto* cmd_eval = app.add_subcommand("evaluate", "run the split x mode x similarity x k sweep");
  eval_data.add(cmd_eval);
  cmd_eval->add_option("--modes", eval_modes)->capture_default_str();
  cmd_eval->add_option("--similarities", eval_sims, "comma list; tf tfidf bm25 dirichlet jelinek_mercer acs wacs pearson")
      ->capture_default_str();
  cmd_eval->add_option("--k-list", eval_k)->capture_default_str();
  cmd_eval->add_option("--m", eval_cfg.m)->check(CLI::PositiveNumber)->capture_default_str();
  cmd_eval->add_option("--scale-factor", eval_cfg.scale_factor)
      ->check(CLI::Range(1u, kMaxScaleFactor))
      ->capture_default_str();
  cmd_eval->add_option("--splits", eval_cfg.split_count)->check(CLI::PositiveNumber)->capture_default_str();
  cmd_eval->add_option("--train-fraction", eval_cfg.train_fraction)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd_eval->add_option("--seed", eval_cfg.base_seed)->capture_default_str();
  cmd_eval->add_option("--rounding", eval_rounding, "rounded | raw")->capture_default_str();
  cmd_eval->add_option("--report-format", eval_report_format, "csv | tsv")->capture_default_str();
  cmd_eval->add_option("--out", eval_out, "report file")->required();
  eval_scorer.add(cmd_eval, false);

  // inspect
  std::string insp_index;
  std::optional<Id> insp_doc;
  auto* cmd_inspect = app.add_subcommand("inspect", "summarize an index file");
  cmd_inspect->add_option("--index", insp_index)->required();
  cmd_inspect->add_option("--doc-id", insp_doc, "also print one document's terms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cmd_index) {
      Mode mode = parse_mode(index_mode);
      RatingsDataset data = index_data.load();
      MeansTable means = compute_means(data);
      InvertedIndex index = build_index(data, means, mode, index_sf);
      index.save(index_out);
      std::cerr << "indexed " << index.doc_count() << " documents (" << to_string(mode) << ", "
                << index.vocabulary_size(Field::prate) << " terms)\n";
    } else if (*cmd_knn) {
      ScorerConfig scorer = knn_scorer.resolve();
      knn_cfg.validate();
      InvertedIndex index = load_index(knn_index);
      print_neighbors(knn_for_document(index, knn_query_id, knn_cfg, scorer));
    } else if (*cmd_predict) {
      ScorerConfig scorer = pred_scorer.resolve();
      pred_cfg.validate();
      if (pred_index.empty() && pred_neighbors.empty()) throw UsageError("predict needs --index or --neighbors");
      if (pred_index.empty() && pred_mode.empty()) throw UsageError("--mode is required without --index");
      RatingsDataset train = pred_train.load();
      MeansTable means = compute_means(train);
      std::optional<InvertedIndex> index;
      if (!pred_index.empty()) index = load_index(pred_index);
      Mode mode = pred_mode.empty() ? index->mode() : parse_mode(pred_mode);
      if (index && index->mode() != mode) throw UsageError("--mode disagrees with the index mode");

      NeighborList neighbors;
      if (!pred_neighbors.empty()) {
        neighbors = read_neighbors(pred_neighbors);
      } else {
        Id entity = mode == Mode::user_based ? pred_user : pred_item;
        if (index->ordinal_of(entity)) neighbors = knn_for_document(*index, entity, pred_cfg, scorer);
      }
      Prediction p = predict(mode, pred_user, pred_item, neighbors, train, means);
      std::printf("value\t%.4f\nrounded\t%g\nsource\t%s\nneighbor_count_used\t%zu\n", p.value, p.rounded,
                  std::string(to_string(p.source)).c_str(), p.neighbor_count_used);
    } else if (*cmd_eval) {
      eval_cfg.dataset_path = eval_data.input;
      eval_cfg.format = parse_rating_format(eval_data.format);
      eval_cfg.csv_scale = eval_data.csv_scale();
      eval_cfg.modes.clear();
      for (const auto& m : split_list(eval_modes)) eval_cfg.modes.push_back(parse_mode(m));
      eval_cfg.similarities.clear();
      for (const auto& s : split_list(eval_sims)) eval_cfg.similarities.push_back(parse_similarity(s));
      eval_cfg.k_values.clear();
      for (const auto& k : split_list(eval_k)) {
        std::size_t v = 0;
        if (!detail::parse_number(k, v) || v == 0) throw UsageError("bad k value: " + k);
        eval_cfg.k_values.push_back(v);
      }
      if (eval_rounding == "rounded") {
        eval_cfg.rounding = Rounding::rounded;
      } else if (eval_rounding == "raw") {
        eval_cfg.rounding = Rounding::raw;
      } else {
        throw UsageError("--rounding expects rounded or raw");
      }
      ReportFormat format;
      if (eval_report_format == "csv") {
        format = ReportFormat::csv;
      } else if (eval_report_format == "tsv") {
        format = ReportFormat::tsv;
      } else {
        throw UsageError("--report-format expects csv or tsv");
      }
      eval_cfg.scorer = eval_scorer.cfg;
      eval_cfg.validate();
      EvalReport report = run_experiment(eval_cfg);
      emit_report(report, eval_out, format);
      for (const auto& b : report.mean_only) {
        std::printf("mean_only\t%s\t%.6f\t%.6f\t%zu\n", std::string(to_string(b.mode)).c_str(), b.mae_mean, b.mae_std,
                    b.splits);
      }
    } else if (*cmd_inspect) {
      InvertedIndex index = load_index(insp_index);
      auto coll = index.collection_stats(Field::prate);
      std::printf("mode\t%s\nscale_factor\t%u\ndocuments\t%zu\nterms\t%zu\ntotal_terms\t%llu\navg_doc_length\t%.6f\n",
                  std::string(to_string(index.mode())).c_str(), index.scale_factor(), index.doc_count(),
                  index.vocabulary_size(Field::prate), static_cast<unsigned long long>(coll.total_terms),
                  coll.avg_doc_length());
      if (insp_doc) {
        auto ord = index.ordinal_of(*insp_doc);
        if (!ord) throw DataError("document " + std::to_string(*insp_doc) + " not in index");
        const auto& d = index.document(*ord);
        std::printf("doc\t%llu\tmean\t%.6f\tnorm\t%.6f\tlength\t%llu\n", static_cast<unsigned long long>(d.doc_id),
                    d.stored_mean, d.norm, static_cast<unsigned long long>(d.length));
        for (const auto& t : index.document_terms(*ord)) std::printf("%s\t%u\n", t.term.str().c_str(), t.freq);
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
