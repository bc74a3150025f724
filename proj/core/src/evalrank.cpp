#include "faultloc/evalrank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "faultloc/csv.hpp"
#include "faultloc/error.hpp"

namespace faultloc {
namespace {

// Neumaier-compensated running sum.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    compensation_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

void require_truth(std::span<const std::size_t> truth) {
  if (truth.empty()) throw Error(ErrorKind::kPrecondition, "metric undefined for an empty truth set");
}

bool contains(std::span<const std::size_t> truth, std::size_t label) {
  return std::find(truth.begin(), truth.end(), label) != truth.end();
}

std::size_t hits_in_prefix(std::span<const std::size_t> ranking, std::span<const std::size_t> truth,
                           std::size_t k) {
  if (k == 0) throw Error(ErrorKind::kPrecondition, "k must be >= 1");
  const std::size_t limit = std::min(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < limit; ++r) hits += contains(truth, ranking[r]) ? 1 : 0;
  return hits;
}

std::string fixed4(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", value);
  return buffer;
}

std::string source_id(const std::string& id) {
  const auto pos = id.rfind("#aug");
  return pos == std::string::npos ? id : id.substr(0, pos);
}

}  // namespace

double hit_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> truth, std::size_t k) {
  require_truth(truth);
  return hits_in_prefix(ranking, truth, k) > 0 ? 1.0 : 0.0;
}

double recall_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> truth, std::size_t k) {
  require_truth(truth);
  return static_cast<double>(hits_in_prefix(ranking, truth, k)) / static_cast<double>(truth.size());
}

double average_precision(std::span<const std::size_t> ranking, std::span<const std::size_t> truth) {
  require_truth(truth);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (!contains(truth, ranking[r])) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(truth.size());
}

double reciprocal_rank(std::span<const std::size_t> ranking, std::span<const std::size_t> truth) {
  require_truth(truth);
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (contains(truth, ranking[r])) return 1.0 / static_cast<double>(r + 1);
  }
  return 0.0;
}

MetricsReport aggregate_metrics(const std::vector<std::vector<std::size_t>>& rankings,
                                const std::vector<std::vector<std::size_t>>& truths,
                                const std::vector<std::size_t>& ks) {
  if (rankings.size() != truths.size()) {
    throw Error(ErrorKind::kDimension, "rankings and truth sets differ in count");
  }
  if (ks.empty()) throw Error(ErrorKind::kConfig, "at least one k is required");
  MetricsReport report;
  report.ks = ks;
  std::map<std::size_t, Accumulator> hit, recall;
  Accumulator ap, rr;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const auto& truth = truths[i];
    if (truth.empty()) {
      ++report.excluded_empty_truth;
      continue;
    }
    const auto& ranking = rankings[i];
    ++report.n_reports;
    for (std::size_t k : ks) {
      if (k > ranking.size()) report.k_exceeds_labels = true;
      hit[k].add(hit_at_k(ranking, truth, k));
      recall[k].add(recall_at_k(ranking, truth, k));
    }
    ap.add(average_precision(ranking, truth));
    const double reciprocal = reciprocal_rank(ranking, truth);
    if (reciprocal == 0.0) ++report.no_relevant_ranked;
    rr.add(reciprocal);
  }
  const double n = static_cast<double>(report.n_reports);
  for (std::size_t k : ks) {
    report.hit_at[k] = report.n_reports ? hit[k].value() / n : 0.0;
    report.recall_at[k] = report.n_reports ? recall[k].value() / n : 0.0;
  }
  report.map_score = report.n_reports ? ap.value() / n : 0.0;
  report.mrr = report.n_reports ? rr.value() / n : 0.0;
  return report;
}

MetricsReport evaluate_features(const OvrModel& model, const FeatureMatrix& x,
                                const std::vector<ProcessedReport>& reports,
                                const std::vector<std::size_t>& ks) {
  if (x.rows.size() != reports.size()) {
    throw Error(ErrorKind::kDimension, "feature rows and reports differ in count");
  }
  const auto scores = score_matrix(model, x);
  std::vector<std::vector<std::size_t>> rankings, truths;
  std::size_t unknown = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    rankings.push_back(rank_labels(scores[i], model.label_space, reports[i].report_id).order);
    std::vector<std::size_t> truth;
    for (const auto& label : reports[i].labels) {
      const std::size_t index = model.label_space.index_of(label);
      if (index < model.label_space.size()) {
        truth.push_back(index);
      } else {
        ++unknown;
      }
    }
    truths.push_back(std::move(truth));
  }
  MetricsReport report = aggregate_metrics(rankings, truths, ks);
  report.unknown_truth_labels = unknown;
  return report;
}

MetricsReport evaluate(const OvrModel& model, const FittedTransformer& transformer,
                       const std::vector<ProcessedReport>& reports, const std::vector<std::size_t>& ks) {
  if (transformer.kind() != model.feature_kind || transformer.dim() != model.dim) {
    throw Error(ErrorKind::kDimension, "feature transformer (" + std::string(to_string(transformer.kind())) +
                                           ", dim " + std::to_string(transformer.dim()) +
                                           ") does not match the model (" +
                                           std::string(to_string(model.feature_kind)) + ", dim " +
                                           std::to_string(model.dim) + ")");
  }
  return evaluate_features(model, transformer.transform(reports), reports, ks);
}

nlohmann::ordered_json to_json(const MetricsReport& report) {
  nlohmann::ordered_json hit = nlohmann::ordered_json::object();
  nlohmann::ordered_json recall = nlohmann::ordered_json::object();
  for (std::size_t k : report.ks) {
    hit[std::to_string(k)] = report.hit_at.at(k);
    recall[std::to_string(k)] = report.recall_at.at(k);
  }
  return {{"hit_at", hit},
          {"recall_at", recall},
          {"map", report.map_score},
          {"mrr", report.mrr},
          {"n_reports", report.n_reports},
          {"excluded_empty_truth", report.excluded_empty_truth},
          {"unknown_truth_labels", report.unknown_truth_labels},
          {"no_relevant_ranked", report.no_relevant_ranked},
          {"k_exceeds_labels", report.k_exceeds_labels}};
}

std::string metrics_table_csv(const std::vector<std::pair<std::string, std::optional<MetricsReport>>>& columns,
                              const std::vector<std::size_t>& ks) {
  std::vector<std::string> header{"Metric"};
  for (const auto& [name, metrics] : columns) header.push_back(name);
  std::string out = csv::join(header) + "\n";

  auto row = [&](const std::string& name, auto&& pick) {
    std::vector<std::string> cells{name};
    for (const auto& [column, metrics] : columns) cells.push_back(metrics ? fixed4(pick(*metrics)) : "failed");
    out += csv::join(cells) + "\n";
  };
  for (std::size_t k : ks) {
    row("Top-" + std::to_string(k) + " Acc.", [k](const MetricsReport& m) { return m.hit_at.at(k); });
  }
  for (std::size_t k : ks) {
    row("Recall@" + std::to_string(k), [k](const MetricsReport& m) { return m.recall_at.at(k); });
  }
  row("MAP", [](const MetricsReport& m) { return m.map_score; });
  row("MRR", [](const MetricsReport& m) { return m.mrr; });
  return out;
}

std::vector<nlohmann::ordered_json> expand_grid(const nlohmann::ordered_json& grid) {
  if (!grid.is_object() || grid.empty()) throw Error(ErrorKind::kConfig, "grid must be a non-empty object");
  std::vector<nlohmann::ordered_json> configs{nlohmann::ordered_json::object()};
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      throw Error(ErrorKind::kConfig, "grid entry '" + key + "' must be a non-empty list");
    }
    std::vector<nlohmann::ordered_json> next;
    next.reserve(configs.size() * values.size());
    for (const auto& partial : configs) {
      for (const auto& value : values) {
        auto config = partial;
        config[key] = value;
        next.push_back(std::move(config));
      }
    }
    configs = std::move(next);
  }
  return configs;
}

void apply_config(const nlohmann::ordered_json& config, ModelKind kind, HyperParams& hyper, FeatureSpec& features) {
  try {
    for (const auto& [key, value] : config.items()) {
      if (key == "max_features" || key == "ngram_range" || key == "min_df") {
        if (features.kind != FeatureKind::kTfidf) {
          throw Error(ErrorKind::kConfig, "grid key '" + key + "' applies to tfidf features only");
        }
        if (key == "max_features") {
          features.tfidf.max_features =
              value.is_null() ? std::nullopt : std::optional<std::size_t>(value.get<std::size_t>());
        } else if (key == "ngram_range") {
          const auto range = value.get<std::vector<std::size_t>>();
          if (range.size() != 2) throw Error(ErrorKind::kConfig, "ngram_range must be [lo, hi]");
          features.tfidf.ngram_lo = range[0];
          features.tfidf.ngram_hi = range[1];
        } else {
          features.tfidf.min_df = value.get<std::size_t>();
        }
        continue;
      }
      if (kind == ModelKind::kRandomForest) {
        auto& f = hyper.forest;
        if (key == "n_trees") {
          f.n_trees = value.get<std::size_t>();
        } else if (key == "max_depth") {
          f.max_depth = value.is_null() ? std::nullopt : std::optional<std::size_t>(value.get<std::size_t>());
        } else if (key == "min_samples_split") {
          f.min_samples_split = value.get<std::size_t>();
        } else if (key == "min_samples_leaf") {
          f.min_samples_leaf = value.get<std::size_t>();
        } else if (key == "class_weight") {
          f.class_weight = parse_class_weight(value.is_null() ? "none" : value.get<std::string>());
        } else if (key == "bootstrap") {
          f.bootstrap = value.get<bool>();
        } else {
          throw Error(ErrorKind::kConfig, "unknown rf grid key '" + key + "'");
        }
      } else {
        auto& l = hyper.linear;
        if (key == "C") {
          l.c = value.get<double>();
        } else if (key == "class_weight") {
          l.class_weight = parse_class_weight(value.is_null() ? "none" : value.get<std::string>());
        } else if (key == "tolerance") {
          l.tolerance = value.get<double>();
        } else if (key == "max_iterations") {
          l.max_iterations = value.get<std::size_t>();
        } else {
          throw Error(ErrorKind::kConfig, "unknown " + std::string(to_string(kind)) + " grid key '" + key + "'");
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad grid value: ") + e.what());
  }
  if (hyper.linear.c <= 0.0) throw Error(ErrorKind::kConfig, "C must be positive");
  if (hyper.forest.n_trees == 0) throw Error(ErrorKind::kConfig, "n_trees must be positive");
  if (hyper.forest.min_samples_split < 2) throw Error(ErrorKind::kConfig, "min_samples_split must be >= 2");
  if (hyper.forest.min_samples_leaf < 1) throw Error(ErrorKind::kConfig, "min_samples_leaf must be >= 1");
  features.tfidf.validate();
}

nlohmann::ordered_json default_grid(ModelKind kind) {
  if (kind == ModelKind::kRandomForest) {
    return nlohmann::ordered_json::parse(R"({
      "n_trees": [5, 10, 20, 100],
      "max_depth": [null, 20, 100],
      "min_samples_split": [2, 5, 10],
      "min_samples_leaf": [2, 5, 10, 20],
      "class_weight": ["balanced_subsample"],
      "max_features": [1000, 5000, 10000, null],
      "ngram_range": [[1, 1], [1, 2], [1, 3]],
      "min_df": [1, 2, 3]
    })");
  }
  return nlohmann::ordered_json::parse(R"({"C": [0.1, 1.0, 10.0], "class_weight": ["none", "balanced"]})");
}

GridResult grid_search(const nlohmann::ordered_json& grid, const TrainingSet& train, const GridOptions& options) {
  const auto configs = expand_grid(grid);
  if (options.folds < 2) throw Error(ErrorKind::kConfig, "grid search needs at least 2 folds");

  std::vector<ProcessedReport> originals;
  std::unordered_map<std::string, std::size_t> original_index;
  for (const auto& report : train.reports) {
    if (source_id(report.report_id) == report.report_id) {
      original_index.emplace(report.report_id, originals.size());
      originals.push_back(report);
    }
  }
  const LabelSpace space = fit_label_space(train.reports);
  const auto fold_members = kfold_indices(originals, options.folds, options.seed);
  std::vector<std::size_t> fold_of(originals.size(), 0);
  for (std::size_t f = 0; f < fold_members.size(); ++f) {
    for (std::size_t i : fold_members[f]) fold_of[i] = f;
  }

  // Fit / held-out report lists per fold; augmented copies go with their source.
  std::vector<std::vector<ProcessedReport>> fit_sets(fold_members.size()), held_sets(fold_members.size());
  for (const auto& report : train.reports) {
    const auto it = original_index.find(source_id(report.report_id));
    const bool is_original = source_id(report.report_id) == report.report_id;
    for (std::size_t f = 0; f < fold_members.size(); ++f) {
      const bool in_fold = it != original_index.end() && fold_of[it->second] == f;
      if (!in_fold) {
        fit_sets[f].push_back(report);
      } else if (is_original) {
        held_sets[f].push_back(report);
      }
    }
  }

  GridResult result;
  result.entries.reserve(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    GridEntry entry;
    entry.config = configs[c];
    try {
      HyperParams hyper = options.base;
      FeatureSpec features = options.features;
      apply_config(configs[c], options.kind, hyper, features);
      for (std::size_t f = 0; f < fit_sets.size(); ++f) {
        const FittedTransformer transformer = fit_transformer(features, fit_sets[f]);
        if (options.observer) options.observer(c, f, fit_sets[f], held_sets[f], transformer);
        const FeatureMatrix x = transformer.transform(fit_sets[f]);
        const auto y = binarize_all(fit_sets[f], space);
        const OvrModel model = train_ovr(options.kind, x, y.rows, space, hyper);
        entry.fold_map.push_back(evaluate(model, transformer, held_sets[f]).map_score);
      }
      Accumulator sum;
      for (double v : entry.fold_map) sum.add(v);
      entry.mean_map = sum.value() / static_cast<double>(entry.fold_map.size());
    } catch (const Error& e) {
      entry.failure = std::string(to_string(e.kind())) + ": " + e.what();
      entry.mean_map = 0.0;
      result.log.push_back("config " + std::to_string(c) + " failed: " + *entry.failure);
    }
    result.log.push_back("config " + std::to_string(c) + " " + entry.config.dump() +
                         " mean MAP " + fixed4(entry.mean_map));
    result.entries.push_back(std::move(entry));
  }

  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < result.entries.size(); ++c) {
    if (result.entries[c].failure) continue;
    if (!best || result.entries[c].mean_map > result.entries[*best].mean_map) best = c;
  }
  if (!best) throw Error(ErrorKind::kConfig, "every grid configuration failed to train");
  result.best_index = *best;
  result.best_config = configs[*best];
  result.best_hyper = options.base;
  result.best_features = options.features;
  apply_config(result.best_config, options.kind, result.best_hyper, result.best_features);
  result.log.push_back("selected config " + std::to_string(*best) + " " + result.best_config.dump());

  result.transformer = fit_transformer(result.best_features, train.reports);
  const FeatureMatrix x = result.transformer.transform(train.reports);
  const auto y = binarize_all(train.reports, space);
  result.model = train_ovr(options.kind, x, y.rows, space, result.best_hyper);
  return result;
}

nlohmann::ordered_json to_json(const GridResult& result) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& entry : result.entries) {
    nlohmann::ordered_json e{{"config", entry.config}, {"fold_map", entry.fold_map}, {"mean_map", entry.mean_map}};
    e["failure"] = entry.failure ? nlohmann::ordered_json(*entry.failure) : nlohmann::ordered_json(nullptr);
    entries.push_back(std::move(e));
  }
  return {{"best_index", result.best_index},
          {"best_config", result.best_config},
          {"entries", entries},
          {"log", result.log}};
}

}  // namespace faultloc
