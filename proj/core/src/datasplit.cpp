#include "faultloc/datasplit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "faultloc/error.hpp"
#include "faultloc/rng.hpp"

namespace faultloc {
namespace {

constexpr double kTieEpsilon = 1e-9;

// Largest-remainder rounding of ratio * n; ties go to the lower index.
std::vector<std::size_t> subset_targets(const std::vector<double>& ratios, std::size_t n) {
  std::vector<std::size_t> targets(ratios.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < ratios.size(); ++j) {
    const double exact = ratios[j] * static_cast<double>(n);
    // Guard against 0.7 * 100 = 70.00000000000001 style representation error.
    const double floored = std::floor(exact + kTieEpsilon);
    targets[j] = static_cast<std::size_t>(floored);
    assigned += targets[j];
    remainders.emplace_back(std::max(0.0, exact - floored), j);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first + kTieEpsilon; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++targets[remainders[r % remainders.size()].second];
  while (assigned > n) {
    auto it = std::max_element(targets.begin(), targets.end());
    --*it;
    --assigned;
  }
  return targets;
}

}  // namespace

void SplitSpec::validate() const {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) {
      throw Error(ErrorKind::kConfig, "split ratios must each lie in (0,1)");
    }
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::kConfig, "split ratios must sum to 1, got " + std::to_string(sum));
  }
}

LabelSpace::LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  for (std::size_t i = 0; i < labels_.size(); ++i) index_.emplace(labels_[i], i);
}

std::size_t LabelSpace::index_of(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? labels_.size() : it->second;
}

LabelSpace fit_label_space(const std::vector<ProcessedReport>& train) {
  if (train.empty()) throw Error(ErrorKind::kPrecondition, "cannot fit a label space on an empty training set");
  std::vector<std::string> labels;
  for (const auto& report : train) {
    if (report.labels.empty()) {
      throw Error(ErrorKind::kPrecondition, "training example '" + report.report_id + "' has no labels");
    }
    labels.insert(labels.end(), report.labels.begin(), report.labels.end());
  }
  return LabelSpace(std::move(labels));
}

BinarizeResult binarize(const LabelSet& labels, const LabelSpace& space) {
  BinarizeResult result;
  result.row.assign(space.size(), 0);
  for (const auto& label : labels) {
    const std::size_t j = space.index_of(label);
    if (j < space.size()) {
      result.row[j] = 1;
    } else {
      ++result.unknown_labels;
    }
  }
  return result;
}

LabelSet debinarize(const MultiHotRow& row, const LabelSpace& space) {
  LabelSet labels;
  for (std::size_t j = 0; j < row.size() && j < space.size(); ++j) {
    if (row[j]) labels.insert(space.label(j));
  }
  return labels;
}

BinarizedMatrix binarize_all(const std::vector<ProcessedReport>& reports, const LabelSpace& space) {
  BinarizedMatrix matrix;
  matrix.rows.reserve(reports.size());
  for (const auto& report : reports) {
    auto result = binarize(report.labels, space);
    matrix.unknown_labels += result.unknown_labels;
    matrix.rows.push_back(std::move(result.row));
  }
  return matrix;
}

std::vector<std::size_t> iterative_stratify(const std::vector<LabelSet>& labels,
                                            const std::vector<double>& ratios,
                                            std::uint64_t seed) {
  const std::size_t n = labels.size();
  const std::size_t subsets = ratios.size();
  Rng rng(seed);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));

  // Label vocabulary in lexicographic order; examples per label in shuffled order.
  std::map<std::string, std::size_t> label_ids;
  for (const auto& set : labels) {
    for (const auto& l : set) label_ids.emplace(l, 0);
  }
  std::size_t next_id = 0;
  for (auto& [name, id] : label_ids) id = next_id++;
  const std::size_t label_count = label_ids.size();

  std::vector<std::vector<std::size_t>> example_labels(n);
  std::vector<std::vector<std::size_t>> pools(label_count);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t e = order[pos];
    for (const auto& l : labels[e]) {
      const std::size_t id = label_ids.at(l);
      example_labels[e].push_back(id);
      pools[id].push_back(e);
    }
  }

  const std::vector<std::size_t> targets = subset_targets(ratios, n);
  std::vector<double> capacity(targets.begin(), targets.end());
  std::vector<std::vector<double>> desired(label_count, std::vector<double>(subsets));
  for (std::size_t l = 0; l < label_count; ++l) {
    for (std::size_t j = 0; j < subsets; ++j) {
      desired[l][j] = ratios[j] * static_cast<double>(pools[l].size());
    }
  }

  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> assignment(n, kUnassigned);
  std::vector<std::size_t> remaining(label_count);
  for (std::size_t l = 0; l < label_count; ++l) remaining[l] = pools[l].size();

  auto assign = [&](std::size_t e, std::size_t subset) {
    assignment[e] = subset;
    capacity[subset] -= 1.0;
    for (std::size_t l : example_labels[e]) {
      desired[l][subset] -= 1.0;
      --remaining[l];
    }
  };

  std::vector<std::size_t> candidates;
  while (true) {
    std::size_t chosen = label_count;
    for (std::size_t l = 0; l < label_count; ++l) {
      if (remaining[l] == 0) continue;
      if (chosen == label_count || remaining[l] < remaining[chosen]) chosen = l;
    }
    if (chosen == label_count) break;

    for (std::size_t e : pools[chosen]) {
      if (assignment[e] != kUnassigned) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < subsets; ++j) best = std::max(best, desired[chosen][j]);
      candidates.clear();
      for (std::size_t j = 0; j < subsets; ++j) {
        if (desired[chosen][j] >= best - kTieEpsilon) candidates.push_back(j);
      }
      if (candidates.size() > 1) {
        double best_capacity = -std::numeric_limits<double>::infinity();
        for (std::size_t j : candidates) best_capacity = std::max(best_capacity, capacity[j]);
        std::erase_if(candidates, [&](std::size_t j) { return capacity[j] < best_capacity - kTieEpsilon; });
      }
      const std::size_t subset =
          candidates.size() == 1 ? candidates.front() : candidates[rng.uniform_index(candidates.size())];
      assign(e, subset);
    }
  }
  // Examples without labels (only reachable from kfold on odd inputs) fill spare capacity.
  for (std::size_t e : order) {
    if (assignment[e] != kUnassigned) continue;
    const auto it = std::max_element(capacity.begin(), capacity.end());
    assign(e, static_cast<std::size_t>(it - capacity.begin()));
  }

  // Rounding reconciliation: move examples from over-full to under-full subsets,
  // picking the move that disturbs per-label proportions least.
  std::vector<std::size_t> sizes(subsets, 0);
  std::vector<std::vector<std::size_t>> label_counts(label_count, std::vector<std::size_t>(subsets, 0));
  for (std::size_t e = 0; e < n; ++e) {
    ++sizes[assignment[e]];
    for (std::size_t l : example_labels[e]) ++label_counts[l][assignment[e]];
  }
  auto ideal = [&](std::size_t l, std::size_t j) {
    return ratios[j] * static_cast<double>(pools[l].size());
  };
  while (true) {
    std::size_t over = subsets, under = subsets;
    long long worst_excess = 0, worst_deficit = 0;
    for (std::size_t j = 0; j < subsets; ++j) {
      const long long diff = static_cast<long long>(sizes[j]) - static_cast<long long>(targets[j]);
      if (diff > worst_excess) { worst_excess = diff; over = j; }
      if (-diff > worst_deficit) { worst_deficit = -diff; under = j; }
    }
    if (over == subsets || under == subsets) break;

    std::size_t best_example = n;
    double best_cost = std::numeric_limits<double>::infinity();
    bool best_safe = false;
    for (std::size_t e : order) {
      if (assignment[e] != over) continue;
      double cost = 0.0;
      bool safe = true;
      for (std::size_t l : example_labels[e]) {
        const double from = static_cast<double>(label_counts[l][over]);
        const double to = static_cast<double>(label_counts[l][under]);
        cost += std::abs(from - 1.0 - ideal(l, over)) - std::abs(from - ideal(l, over));
        cost += std::abs(to + 1.0 - ideal(l, under)) - std::abs(to - ideal(l, under));
        if (label_counts[l][over] == 1 && ideal(l, over) >= 0.5) safe = false;
      }
      if ((safe && !best_safe) || (safe == best_safe && cost < best_cost - kTieEpsilon)) {
        best_example = e;
        best_cost = cost;
        best_safe = safe;
      }
    }
    if (best_example == n) break;
    assignment[best_example] = under;
    --sizes[over];
    ++sizes[under];
    for (std::size_t l : example_labels[best_example]) {
      --label_counts[l][over];
      ++label_counts[l][under];
    }
  }
  return assignment;
}

SplitResult iterative_stratified_split(const std::vector<ProcessedReport>& corpus,
                                       const SplitSpec& spec) {
  spec.validate();
  if (corpus.size() < 3) {
    throw Error(ErrorKind::kPrecondition, "corpus needs at least 3 examples to split, got " +
                                              std::to_string(corpus.size()));
  }
  std::vector<LabelSet> labels;
  labels.reserve(corpus.size());
  for (const auto& report : corpus) {
    if (report.labels.empty()) {
      throw Error(ErrorKind::kPrecondition, "example '" + report.report_id + "' has no labels");
    }
    labels.push_back(report.labels);
  }
  const std::vector<double> ratios(spec.ratios.begin(), spec.ratios.end());
  const auto assignment = iterative_stratify(labels, ratios, spec.seed);

  SplitResult result;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    switch (assignment[i]) {
      case 0: result.train.reports.push_back(corpus[i]); break;
      case 1: result.validation.push_back(corpus[i]); break;
      default: result.test.push_back(corpus[i]); break;
    }
  }
  result.label_space = fit_label_space(result.train.reports);
  result.y_train = binarize_all(result.train.reports, result.label_space).rows;
  auto val = binarize_all(result.validation, result.label_space);
  auto test = binarize_all(result.test, result.label_space);
  result.y_validation = std::move(val.rows);
  result.y_test = std::move(test.rows);
  result.unknown_labels = val.unknown_labels + test.unknown_labels;
  return result;
}

std::vector<std::vector<std::size_t>> kfold_indices(const std::vector<ProcessedReport>& train,
                                                    std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::kConfig, "k-fold needs k >= 2");
  if (k > train.size()) {
    throw Error(ErrorKind::kPrecondition, "k = " + std::to_string(k) + " exceeds training size " +
                                              std::to_string(train.size()));
  }
  std::vector<LabelSet> labels;
  labels.reserve(train.size());
  for (const auto& report : train) labels.push_back(report.labels);
  const std::vector<double> ratios(k, 1.0 / static_cast<double>(k));
  const auto assignment = iterative_stratify(labels, ratios, seed);

  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < train.size(); ++i) folds[assignment[i]].push_back(i);
  return folds;
}

std::vector<std::vector<ProcessedReport>> kfold_stratified(const std::vector<ProcessedReport>& train,
                                                           std::size_t k, std::uint64_t seed) {
  std::vector<std::vector<ProcessedReport>> folds;
  for (const auto& indices : kfold_indices(train, k, seed)) {
    auto& fold = folds.emplace_back();
    for (std::size_t i : indices) fold.push_back(train[i]);
  }
  return folds;
}

nlohmann::json split_manifest(const SplitResult& split, const SplitSpec& spec) {
  auto ids = [](const std::vector<ProcessedReport>& reports) {
    std::vector<std::string> out;
    out.reserve(reports.size());
    for (const auto& r : reports) out.push_back(r.report_id);
    return out;
  };
  return {{"seed", spec.seed},
          {"ratios", spec.ratios},
          {"label_space", split.label_space.labels()},
          {"train", ids(split.train.reports)},
          {"validation", ids(split.validation)},
          {"test", ids(split.test)}};
}

SplitResult materialize_split(const std::vector<ProcessedReport>& corpus,
                              const nlohmann::json& manifest) {
  std::unordered_map<std::string, const ProcessedReport*> by_id;
  for (const auto& report : corpus) by_id.emplace(report.report_id, &report);
  auto collect = [&](const char* key) {
    std::vector<ProcessedReport> out;
    if (!manifest.contains(key)) {
      throw Error(ErrorKind::kSchema, std::string("split manifest lacks '") + key + "'");
    }
    for (const auto& id : manifest.at(key)) {
      auto it = by_id.find(id.get<std::string>());
      if (it == by_id.end()) {
        throw Error(ErrorKind::kMissingArtifact,
                    "split manifest references unknown report id '" + id.get<std::string>() + "'");
      }
      out.push_back(*it->second);
    }
    return out;
  };
  SplitResult result;
  result.train.reports = collect("train");
  result.validation = collect("validation");
  result.test = collect("test");
  result.label_space = fit_label_space(result.train.reports);
  result.y_train = binarize_all(result.train.reports, result.label_space).rows;
  auto val = binarize_all(result.validation, result.label_space);
  auto test = binarize_all(result.test, result.label_space);
  result.y_validation = std::move(val.rows);
  result.y_test = std::move(test.rows);
  result.unknown_labels = val.unknown_labels + test.unknown_labels;
  return result;
}

}  // namespace faultloc
