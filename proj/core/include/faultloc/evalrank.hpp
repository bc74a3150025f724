#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "faultloc/datasplit.hpp"
#include "faultloc/features.hpp"
#include "faultloc/models.hpp"

namespace faultloc {

inline const std::vector<std::size_t>& default_ks() {
  static const std::vector<std::size_t> ks{1, 3, 5, 10};
  return ks;
}

// Per-report metrics. `ranking` holds label indices best first; `truth` holds
// distinct label indices and must be non-empty (kPrecondition otherwise).
// A k larger than the ranking uses the whole ranking.
double hit_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> truth, std::size_t k);
double recall_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> truth, std::size_t k);
double average_precision(std::span<const std::size_t> ranking, std::span<const std::size_t> truth);
/// 0 when no truth label is ranked.
double reciprocal_rank(std::span<const std::size_t> ranking, std::span<const std::size_t> truth);

struct MetricsReport {
  std::vector<std::size_t> ks;
  std::map<std::size_t, double> hit_at;
  std::map<std::size_t, double> recall_at;
  double map_score = 0.0;
  double mrr = 0.0;
  std::size_t n_reports = 0;             // reports in the aggregates
  std::size_t excluded_empty_truth = 0;  // dropped: no truth label inside the space
  std::size_t unknown_truth_labels = 0;  // truth labels outside the label space
  std::size_t no_relevant_ranked = 0;    // reports with RR = 0
  bool k_exceeds_labels = false;         // some k > ranking length
};

/// Macro averages over reports with non-empty truth.
MetricsReport aggregate_metrics(const std::vector<std::vector<std::size_t>>& rankings,
                                const std::vector<std::vector<std::size_t>>& truths,
                                const std::vector<std::size_t>& ks = default_ks());

/// Ranks every report with a fitted model and scores it. No refitting.
MetricsReport evaluate(const OvrModel& model, const FittedTransformer& transformer,
                       const std::vector<ProcessedReport>& reports,
                       const std::vector<std::size_t>& ks = default_ks());
MetricsReport evaluate_features(const OvrModel& model, const FeatureMatrix& x,
                                const std::vector<ProcessedReport>& reports,
                                const std::vector<std::size_t>& ks = default_ks());

nlohmann::ordered_json to_json(const MetricsReport& report);

/// Tables 6/7 layout: metric rows, one column per configuration, 4 decimals.
/// A column without metrics prints "failed".
std::string metrics_table_csv(const std::vector<std::pair<std::string, std::optional<MetricsReport>>>& columns,
                              const std::vector<std::size_t>& ks = default_ks());

/// Cartesian product of a grid file {param: [values...]}; keys in file order,
/// last key varying fastest. Throws kConfig on an empty grid or empty list.
std::vector<nlohmann::ordered_json> expand_grid(const nlohmann::ordered_json& grid);

/// Grid keys understood by `apply_config`: TF-IDF keys max_features,
/// ngram_range, min_df; linear keys C, class_weight, tolerance,
/// max_iterations; forest keys n_trees, max_depth, min_samples_split,
/// min_samples_leaf, class_weight, bootstrap. Unknown keys throw kConfig.
void apply_config(const nlohmann::ordered_json& config, ModelKind kind, HyperParams& hyper, FeatureSpec& features);

/// Default search spaces. The forest grid crosses the RF domains with TF-IDF settings.
nlohmann::ordered_json default_grid(ModelKind kind);

struct GridEntry {
  nlohmann::ordered_json config;
  std::vector<double> fold_map;
  double mean_map = 0.0;
  std::optional<std::string> failure;
};

/// Called once per (config, fold) with the fitting reports, held-out reports
/// and the transformer fitted for that fold.
using FoldObserver = std::function<void(std::size_t config, std::size_t fold,
                                        const std::vector<ProcessedReport>& fit,
                                        const std::vector<ProcessedReport>& held_out,
                                        const FittedTransformer& transformer)>;

struct GridOptions {
  ModelKind kind = ModelKind::kLogistic;
  HyperParams base;
  FeatureSpec features;
  std::size_t folds = 3;
  std::uint64_t seed = 42;
  FoldObserver observer;
};

struct GridResult {
  std::vector<GridEntry> entries;
  std::size_t best_index = 0;
  nlohmann::ordered_json best_config;
  HyperParams best_hyper;
  FeatureSpec best_features;
  OvrModel model;  // best config refit on the full training set
  FittedTransformer transformer;
  std::vector<std::string> log;
};

/// k-fold stratified CV on the training set, MAP selection (first config wins
/// ties), refit on all of `train`. Augmented copies ("<id>#aug<n>") follow
/// their source report into its fold and are never scored.
GridResult grid_search(const nlohmann::ordered_json& grid, const TrainingSet& train, const GridOptions& options);

nlohmann::ordered_json to_json(const GridResult& result);

}  // namespace faultloc
