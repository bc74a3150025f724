#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faultloc/textprep.hpp"

namespace faultloc {

struct SplitSpec {
  std::array<double, 3> ratios{0.70, 0.20, 0.10};  // train, validation, test
  std::uint64_t seed = 42;

  /// Throws kConfig unless every ratio is in (0,1) and they sum to 1 (within 1e-9).
  void validate() const;
};

/// Sorted label vocabulary, fitted on training labels only.
class LabelSpace {
 public:
  LabelSpace() = default;
  explicit LabelSpace(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  /// Index of `label`, or size() when absent.
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const { return index_of(label) < size(); }

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t> index_;
};

using MultiHotRow = std::vector<std::uint8_t>;
using MultiHotMatrix = std::vector<MultiHotRow>;

struct BinarizeResult {
  MultiHotRow row;
  std::size_t unknown_labels = 0;  // labels outside the space, dropped
};

/// Throws kPrecondition when `train` is empty or holds an example without labels.
LabelSpace fit_label_space(const std::vector<ProcessedReport>& train);

BinarizeResult binarize(const LabelSet& labels, const LabelSpace& space);
LabelSet debinarize(const MultiHotRow& row, const LabelSpace& space);

struct BinarizedMatrix {
  MultiHotMatrix rows;
  std::size_t unknown_labels = 0;
};

BinarizedMatrix binarize_all(const std::vector<ProcessedReport>& reports, const LabelSpace& space);

/// Training partition. Augmentation accepts only this type, so validation and
/// test data cannot be passed to it by accident.
struct TrainingSet {
  std::vector<ProcessedReport> reports;
};

struct SplitResult {
  TrainingSet train;
  std::vector<ProcessedReport> validation;
  std::vector<ProcessedReport> test;
  LabelSpace label_space;
  MultiHotMatrix y_train;
  MultiHotMatrix y_validation;
  MultiHotMatrix y_test;
  std::size_t unknown_labels = 0;  // validation/test labels absent from train
};

/// Iterative multi-label stratification into `ratios.size()` subsets.
/// Returns the subset index for each input example (input order). Subset
/// sizes equal the largest-remainder rounding of ratio * N.
std::vector<std::size_t> iterative_stratify(const std::vector<LabelSet>& labels,
                                            const std::vector<double>& ratios,
                                            std::uint64_t seed);

/// Throws kPrecondition for fewer than 3 examples or an unlabeled example,
/// kConfig for invalid ratios.
SplitResult iterative_stratified_split(const std::vector<ProcessedReport>& corpus,
                                       const SplitSpec& spec);

/// k folds from the same procedure with equal ratios; folds are disjoint and
/// their union is `train`.
std::vector<std::vector<ProcessedReport>> kfold_stratified(const std::vector<ProcessedReport>& train,
                                                           std::size_t k, std::uint64_t seed);
std::vector<std::vector<std::size_t>> kfold_indices(const std::vector<ProcessedReport>& train,
                                                    std::size_t k, std::uint64_t seed);

/// {seed, ratios, train:[ids], validation:[ids], test:[ids]}.
nlohmann::json split_manifest(const SplitResult& split, const SplitSpec& spec);

/// Rebuilds a split from a manifest; every id must exist in `corpus`.
SplitResult materialize_split(const std::vector<ProcessedReport>& corpus,
                              const nlohmann::json& manifest);

}  // namespace faultloc
