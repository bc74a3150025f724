#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "faultloc/datasplit.hpp"
#include "faultloc/features.hpp"
#include "faultloc/textprep.hpp"

namespace faultloc {

enum class ModelKind { kLogistic, kSvm, kRandomForest };
enum class ClassWeight { kNone, kBalanced, kBalancedSubsample };
enum class SplitFeatures { kSqrt, kAll };

std::string_view to_string(ModelKind kind);
std::string_view to_string(ClassWeight weight);
ModelKind parse_model_kind(std::string_view text);
ClassWeight parse_class_weight(std::string_view text);

/// Logistic regression / linear SVM settings.
struct LinearHyper {
  double c = 1.0;
  double tolerance = 1e-4;
  std::size_t max_iterations = 1000;
  ClassWeight class_weight = ClassWeight::kNone;
};

/// Random forest settings. Default grid domains:
/// n_trees {5,10,20,100}, max_depth {none,20,100}, min_samples_split {2,5,10},
/// min_samples_leaf {2,5,10,20}.
struct ForestHyper {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;  // nullopt = unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  ClassWeight class_weight = ClassWeight::kBalancedSubsample;
  SplitFeatures features_per_split = SplitFeatures::kSqrt;
  bool bootstrap = true;
  std::uint64_t seed = 42;
};

struct HyperParams {
  LinearHyper linear;
  ForestHyper forest;
};

nlohmann::json to_json(ModelKind kind, const HyperParams& hyper);
HyperParams hyper_from_json(ModelKind kind, const nlohmann::json& json);

/// Binary label column as +1/-1 targets plus per-sample weights.
struct BinaryProblem {
  const FeatureMatrix* x = nullptr;
  std::vector<int> y;             // +1 / -1
  std::vector<double> weight;     // c_i
};

/// w/b plus diagnostics. A constant submodel ignores w/b and returns
/// `constant_score` (the training base rate) for every input.
struct LinearSubmodel {
  std::vector<double> weights;
  double bias = 0.0;
  bool constant = false;
  double constant_score = 0.0;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;  // LR: final objective gradient norm
  bool converged = true;

  double margin(const SparseVector& x) const;
};

/// (1/C)*||w||^2/2 + sum_i c_i * log(1 + exp(-y_i (w.x_i + b))), with gradient.
struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> gradient;  // d weights followed by d bias
};
ObjectiveValue logistic_objective(const BinaryProblem& problem, double c,
                                  std::span<const double> weights, double bias);

/// Balanced weights n / (2 * n_class) or all ones.
std::vector<double> class_weights(std::span<const int> y, ClassWeight weighting);

/// Newton-CG with backtracking line search, from w = 0, b = 0.
LinearSubmodel train_logistic_binary(const BinaryProblem& problem, const LinearHyper& hyper);
/// Dual coordinate descent for the L2-regularised hinge loss; the intercept is
/// a constant feature of value 1.
LinearSubmodel train_svm_binary(const BinaryProblem& problem, const LinearHyper& hyper);

double sigmoid(double z);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;         // weighted positive fraction at the node
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  double predict(const SparseVector& x) const;
  std::size_t depth() const;
};

struct ForestSubmodel {
  std::vector<DecisionTree> trees;
  bool constant = false;
  double constant_score = 0.0;

  double score(const SparseVector& x) const;
};

/// Weighted Gini impurity 1 - p^2 - q^2 of a node.
double gini(double positive_weight, double negative_weight);

/// Forest for a single label. `label_index` keys the per-tree RNG streams.
ForestSubmodel train_forest_binary(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                                   const ForestHyper& hyper, std::size_t label_index);

/// One-vs-rest ranker: one binary submodel per label-space entry.
class OvrModel {
 public:
  static constexpr int kVersion = 1;

  ModelKind kind = ModelKind::kLogistic;
  FeatureKind feature_kind = FeatureKind::kTfidf;
  std::size_t dim = 0;
  LabelSpace label_space;
  HyperParams hyper;
  std::vector<LinearSubmodel> linear;  // lr / svm
  std::vector<ForestSubmodel> forest;  // rf
  std::vector<std::size_t> degenerate_labels;  // label indices with constant submodels

  /// lr: sigmoid probabilities; svm: signed margins; rf: mean leaf values.
  std::vector<double> score(const SparseVector& x) const;
};

/// Throws kDimension when X and Y disagree or Y width differs from the space.
OvrModel train_logistic_ovr(const FeatureMatrix& x, const MultiHotMatrix& y,
                            const LabelSpace& space, const LinearHyper& hyper);
OvrModel train_svm_ovr(const FeatureMatrix& x, const MultiHotMatrix& y, const LabelSpace& space,
                       const LinearHyper& hyper);
OvrModel train_random_forest(const FeatureMatrix& x, const MultiHotMatrix& y,
                             const LabelSpace& space, const ForestHyper& hyper);
OvrModel train_ovr(ModelKind kind, const FeatureMatrix& x, const MultiHotMatrix& y,
                   const LabelSpace& space, const HyperParams& hyper);

/// Throws kDimension if x has a column outside the model's dimension.
std::vector<double> score_labels(const OvrModel& model, const SparseVector& x);
/// Throws kDimension on a feature-kind or dimension mismatch.
std::vector<std::vector<double>> score_matrix(const OvrModel& model, const FeatureMatrix& x);

struct RankedPrediction {
  std::string report_id;
  std::vector<std::size_t> order;  // label indices, best first
  std::vector<double> scores;      // aligned with order

  std::vector<std::pair<std::string, double>> labeled(const LabelSpace& space) const;
};

/// Stable descending sort; equal scores keep label-index order.
/// Throws kInvalidInput on a non-finite score, kDimension on a size mismatch.
RankedPrediction rank_labels(std::span<const double> scores, const LabelSpace& space,
                             std::string report_id = {});

/// Everything needed to score raw text: model, featuriser and text config.
struct ModelBundle {
  static constexpr int kVersion = 1;

  OvrModel model;
  std::optional<FittedTransformer> transformer;
  std::optional<PreprocessConfig> preprocess;
};

nlohmann::json to_json(const OvrModel& model);
OvrModel ovr_model_from_json(const nlohmann::json& json);
nlohmann::json to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const nlohmann::json& json);

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
/// Throws kParse (with byte offset) on malformed JSON, kVersion when the file
/// is newer than this build understands.
ModelBundle load_model(const std::filesystem::path& path);
ModelBundle parse_model(std::string_view text);

}  // namespace faultloc
