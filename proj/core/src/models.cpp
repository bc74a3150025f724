#include "faultloc/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "faultloc/error.hpp"
#include "faultloc/io.hpp"
#include "faultloc/rng.hpp"

namespace faultloc {
namespace {

double dot(std::span<const double> w, const SparseVector& x) {
  double sum = 0.0;
  for (std::size_t k = 0; k < x.index.size(); ++k) sum += w[x.index[k]] * x.value[k];
  return sum;
}

void axpy(double a, const SparseVector& x, std::span<double> w) {
  for (std::size_t k = 0; k < x.index.size(); ++k) w[x.index[k]] += a * x.value[k];
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double squared_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return sum;
}

void check_training_shapes(const FeatureMatrix& x, const MultiHotMatrix& y, const LabelSpace& space) {
  if (x.rows.size() != y.size()) {
    throw Error(ErrorKind::kDimension, "feature rows (" + std::to_string(x.rows.size()) +
                                           ") and label rows (" + std::to_string(y.size()) + ") differ");
  }
  for (const auto& row : y) {
    if (row.size() != space.size()) {
      throw Error(ErrorKind::kDimension, "label row width differs from the label space size");
    }
  }
}

std::vector<std::uint8_t> label_column(const MultiHotMatrix& y, std::size_t j) {
  std::vector<std::uint8_t> column(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) column[i] = y[i][j] ? 1 : 0;
  return column;
}

// Base rate when the column is all-0 or all-1, otherwise nullopt.
std::optional<double> degenerate_rate(std::span<const std::uint8_t> column) {
  const std::size_t positives = static_cast<std::size_t>(std::count(column.begin(), column.end(), 1));
  if (column.empty() || positives == 0) return 0.0;
  if (positives == column.size()) return 1.0;
  return std::nullopt;
}

BinaryProblem make_problem(const FeatureMatrix& x, std::span<const std::uint8_t> column,
                           ClassWeight weighting) {
  BinaryProblem problem;
  problem.x = &x;
  problem.y.reserve(column.size());
  for (auto v : column) problem.y.push_back(v ? 1 : -1);
  problem.weight = class_weights(problem.y, weighting);
  return problem;
}

std::string_view to_string(SplitFeatures rule) { return rule == SplitFeatures::kSqrt ? "sqrt" : "all"; }

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogistic: return "lr";
    case ModelKind::kSvm: return "svm";
    case ModelKind::kRandomForest: return "rf";
  }
  return "lr";
}

std::string_view to_string(ClassWeight weight) {
  switch (weight) {
    case ClassWeight::kNone: return "none";
    case ClassWeight::kBalanced: return "balanced";
    case ClassWeight::kBalancedSubsample: return "balanced_subsample";
  }
  return "none";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "lr" || text == "logistic") return ModelKind::kLogistic;
  if (text == "svm") return ModelKind::kSvm;
  if (text == "rf" || text == "random_forest") return ModelKind::kRandomForest;
  throw Error(ErrorKind::kConfig, "unknown model kind '" + std::string(text) + "'");
}

ClassWeight parse_class_weight(std::string_view text) {
  if (text == "none" || text.empty()) return ClassWeight::kNone;
  if (text == "balanced") return ClassWeight::kBalanced;
  if (text == "balanced_subsample") return ClassWeight::kBalancedSubsample;
  throw Error(ErrorKind::kConfig, "unknown class weight '" + std::string(text) + "'");
}

nlohmann::json to_json(ModelKind kind, const HyperParams& hyper) {
  if (kind == ModelKind::kRandomForest) {
    const auto& f = hyper.forest;
    return {{"n_trees", f.n_trees},
            {"max_depth", f.max_depth ? nlohmann::json(*f.max_depth) : nlohmann::json(nullptr)},
            {"min_samples_split", f.min_samples_split},
            {"min_samples_leaf", f.min_samples_leaf},
            {"class_weight", to_string(f.class_weight)},
            {"features_per_split", to_string(f.features_per_split)},
            {"bootstrap", f.bootstrap},
            {"seed", f.seed}};
  }
  const auto& l = hyper.linear;
  return {{"C", l.c},
          {"tolerance", l.tolerance},
          {"max_iterations", l.max_iterations},
          {"class_weight", to_string(l.class_weight)}};
}

HyperParams hyper_from_json(ModelKind kind, const nlohmann::json& json) {
  HyperParams hyper;
  try {
    if (kind == ModelKind::kRandomForest) {
      auto& f = hyper.forest;
      f.n_trees = json.value("n_trees", f.n_trees);
      if (json.contains("max_depth") && !json.at("max_depth").is_null()) {
        f.max_depth = json.at("max_depth").get<std::size_t>();
      }
      f.min_samples_split = json.value("min_samples_split", f.min_samples_split);
      f.min_samples_leaf = json.value("min_samples_leaf", f.min_samples_leaf);
      f.class_weight = parse_class_weight(json.value("class_weight", std::string("balanced_subsample")));
      const std::string rule = json.value("features_per_split", std::string("sqrt"));
      if (rule != "sqrt" && rule != "all") throw Error(ErrorKind::kConfig, "features_per_split must be sqrt or all");
      f.features_per_split = rule == "sqrt" ? SplitFeatures::kSqrt : SplitFeatures::kAll;
      f.bootstrap = json.value("bootstrap", f.bootstrap);
      f.seed = json.value("seed", f.seed);
    } else {
      auto& l = hyper.linear;
      l.c = json.value("C", l.c);
      l.tolerance = json.value("tolerance", l.tolerance);
      l.max_iterations = json.value("max_iterations", l.max_iterations);
      l.class_weight = parse_class_weight(json.value("class_weight", std::string("none")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed hyperparameters: ") + e.what());
  }
  if (hyper.linear.c <= 0.0) throw Error(ErrorKind::kConfig, "C must be positive");
  if (hyper.forest.n_trees == 0) throw Error(ErrorKind::kConfig, "n_trees must be positive");
  if (hyper.forest.min_samples_split < 2) throw Error(ErrorKind::kConfig, "min_samples_split must be >= 2");
  if (hyper.forest.min_samples_leaf < 1) throw Error(ErrorKind::kConfig, "min_samples_leaf must be >= 1");
  return hyper;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> class_weights(std::span<const int> y, ClassWeight weighting) {
  std::vector<double> weights(y.size(), 1.0);
  if (weighting == ClassWeight::kNone) return weights;
  const double n = static_cast<double>(y.size());
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double negatives = n - positives;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double count = y[i] > 0 ? positives : negatives;
    weights[i] = count > 0 ? n / (2.0 * count) : 0.0;
  }
  return weights;
}

double LinearSubmodel::margin(const SparseVector& x) const { return dot(weights, x) + bias; }

ObjectiveValue logistic_objective(const BinaryProblem& problem, double c,
                                  std::span<const double> weights, double bias) {
  const FeatureMatrix& x = *problem.x;
  ObjectiveValue out;
  out.gradient.assign(weights.size() + 1, 0.0);
  out.value = 0.5 / c * squared_norm(weights);
  for (std::size_t j = 0; j < weights.size(); ++j) out.gradient[j] = weights[j] / c;
  std::span<double> grad_w(out.gradient.data(), weights.size());
  double grad_b = 0.0;
  for (std::size_t i = 0; i < x.rows.size(); ++i) {
    const double m = problem.y[i] * (dot(weights, x.rows[i]) + bias);
    out.value += problem.weight[i] * softplus(-m);
    const double coef = -problem.weight[i] * problem.y[i] * sigmoid(-m);
    axpy(coef, x.rows[i], grad_w);
    grad_b += coef;
  }
  out.gradient.back() = grad_b;
  return out;
}

LinearSubmodel train_logistic_binary(const BinaryProblem& problem, const LinearHyper& hyper) {
  const FeatureMatrix& x = *problem.x;
  const std::size_t d = x.dim;
  const std::size_t n = x.rows.size();
  const double c = hyper.c;

  LinearSubmodel model;
  model.weights.assign(d, 0.0);
  std::vector<double> curvature(n);
  std::vector<double> step(d + 1), residual(d + 1), direction(d + 1), hessian_direction(d + 1);
  std::vector<double> trial(d);

  auto objective_only = [&](std::span<const double> w, double b) {
    double value = 0.5 / c * squared_norm(w);
    for (std::size_t i = 0; i < n; ++i) value += problem.weight[i] * softplus(-problem.y[i] * (dot(w, x.rows[i]) + b));
    return value;
  };

  auto hessian_times = [&](std::span<const double> v, std::span<double> out) {
    std::span<const double> v_w = v.first(d);
    const double v_b = v[d];
    for (std::size_t j = 0; j < d; ++j) out[j] = v_w[j] / c;
    double out_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (curvature[i] == 0.0) continue;
      const double t = curvature[i] * (dot(v_w, x.rows[i]) + v_b);
      axpy(t, x.rows[i], out.first(d));
      out_b += t;
    }
    out[d] = out_b;
  };

  ObjectiveValue current = logistic_objective(problem, c, model.weights, model.bias);
  std::size_t iteration = 0;
  model.converged = false;
  while (true) {
    const double gnorm = std::sqrt(squared_norm(current.gradient));
    model.gradient_norm = gnorm;
    if (gnorm <= hyper.tolerance) {
      model.converged = true;
      break;
    }
    if (iteration >= hyper.max_iterations) break;
    ++iteration;

    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(dot(model.weights, x.rows[i]) + model.bias);
      curvature[i] = problem.weight[i] * p * (1.0 - p);
    }

    // Truncated conjugate gradient on H s = -g.
    std::fill(step.begin(), step.end(), 0.0);
    for (std::size_t j = 0; j <= d; ++j) residual[j] = -current.gradient[j];
    direction = residual;
    double rr = squared_norm(residual);
    const double target = std::min(0.5, std::sqrt(gnorm)) * gnorm;
    const std::size_t cg_limit = std::min<std::size_t>(d + 1, 500);
    for (std::size_t k = 0; k < cg_limit && std::sqrt(rr) > target; ++k) {
      hessian_times(direction, hessian_direction);
      double curvature_along = 0.0;
      for (std::size_t j = 0; j <= d; ++j) curvature_along += direction[j] * hessian_direction[j];
      if (curvature_along <= 0.0) break;
      const double alpha = rr / curvature_along;
      for (std::size_t j = 0; j <= d; ++j) {
        step[j] += alpha * direction[j];
        residual[j] -= alpha * hessian_direction[j];
      }
      const double rr_next = squared_norm(residual);
      const double beta = rr_next / rr;
      for (std::size_t j = 0; j <= d; ++j) direction[j] = residual[j] + beta * direction[j];
      rr = rr_next;
    }
    if (squared_norm(step) == 0.0) {
      for (std::size_t j = 0; j <= d; ++j) step[j] = -current.gradient[j];
    }

    double slope = 0.0;
    for (std::size_t j = 0; j <= d; ++j) slope += current.gradient[j] * step[j];
    if (slope >= 0.0) {
      for (std::size_t j = 0; j <= d; ++j) step[j] = -current.gradient[j];
      slope = -gnorm * gnorm;
    }

    double scale = 1.0;
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt, scale *= 0.5) {
      for (std::size_t j = 0; j < d; ++j) trial[j] = model.weights[j] + scale * step[j];
      const double trial_bias = model.bias + scale * step[d];
      if (objective_only(trial, trial_bias) <= current.value + 1e-4 * scale * slope) {
        model.weights = trial;
        model.bias = trial_bias;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    current = logistic_objective(problem, c, model.weights, model.bias);
  }
  model.iterations = iteration;
  return model;
}

LinearSubmodel train_svm_binary(const BinaryProblem& problem, const LinearHyper& hyper) {
  const FeatureMatrix& x = *problem.x;
  const std::size_t n = x.rows.size();
  LinearSubmodel model;
  model.weights.assign(x.dim, 0.0);
  std::vector<double> alpha(n, 0.0), diagonal(n), upper(n);
  for (std::size_t i = 0; i < n; ++i) {
    diagonal[i] = squared_norm(x.rows[i].value) + 1.0;
    upper[i] = hyper.c * problem.weight[i];
  }

  model.converged = false;
  std::size_t iteration = 0;
  while (iteration < hyper.max_iterations) {
    ++iteration;
    double max_pg = -std::numeric_limits<double>::infinity();
    double min_pg = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (upper[i] <= 0.0) continue;
      const double yi = problem.y[i];
      const double g = yi * model.margin(x.rows[i]) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] >= upper[i]) {
        pg = std::max(g, 0.0);
      }
      max_pg = std::max(max_pg, pg);
      min_pg = std::min(min_pg, pg);
      if (std::abs(pg) > 1e-12) {
        const double previous = alpha[i];
        alpha[i] = std::clamp(previous - g / diagonal[i], 0.0, upper[i]);
        const double delta = (alpha[i] - previous) * yi;
        if (delta != 0.0) {
          axpy(delta, x.rows[i], model.weights);
          model.bias += delta;
        }
      }
    }
    if (max_pg - min_pg <= hyper.tolerance) {
      model.converged = true;
      break;
    }
  }
  model.iterations = iteration;
  return model;
}

double gini(double positive_weight, double negative_weight) {
  const double total = positive_weight + negative_weight;
  if (total <= 0.0) return 0.0;
  const double p = positive_weight / total;
  const double q = negative_weight / total;
  return 1.0 - p * p - q * q;
}

double DecisionTree::predict(const SparseVector& x) const {
  std::size_t node = 0;
  while (nodes[node].feature >= 0) {
    const auto feature = static_cast<std::uint32_t>(nodes[node].feature);
    auto it = std::lower_bound(x.index.begin(), x.index.end(), feature);
    const double value =
        (it != x.index.end() && *it == feature) ? x.value[static_cast<std::size_t>(it - x.index.begin())] : 0.0;
    node = static_cast<std::size_t>(value <= nodes[node].threshold ? nodes[node].left : nodes[node].right);
  }
  return nodes[node].value;
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [node, level] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, level);
    if (nodes[node].feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(nodes[node].left), level + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[node].right), level + 1);
    }
  }
  return deepest;
}

double ForestSubmodel::score(const SparseVector& x) const {
  if (constant) return constant_score;
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict(x);
  return sum / static_cast<double>(trees.size());
}

namespace {

// CART growth on sparse rows with implicit zeros.
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const std::uint8_t> y, std::vector<double> weight,
              const ForestHyper& hyper, Rng& rng)
      : x_(x), y_(y), weight_(std::move(weight)), hyper_(hyper), rng_(rng) {
    max_features_ = hyper.features_per_split == SplitFeatures::kAll
                        ? x.dim
                        : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.dim))));
    max_features_ = std::max<std::size_t>(1, max_features_);
  }

  DecisionTree build() {
    std::vector<std::uint32_t> root;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      if (weight_[i] > 0.0) root.push_back(static_cast<std::uint32_t>(i));
    }
    DecisionTree tree;
    tree.nodes.emplace_back();
    struct Work {
      std::size_t node;
      std::vector<std::uint32_t> samples;
      std::size_t depth;
    };
    std::vector<Work> stack;
    stack.push_back({0, std::move(root), 0});
    while (!stack.empty()) {
      Work work = std::move(stack.back());
      stack.pop_back();
      double pos = 0.0, neg = 0.0;
      for (auto s : work.samples) (y_[s] ? pos : neg) += weight_[s];
      tree.nodes[work.node].value = pos + neg > 0.0 ? pos / (pos + neg) : 0.0;

      const std::size_t count = work.samples.size();
      if ((hyper_.max_depth && work.depth >= *hyper_.max_depth) || count < hyper_.min_samples_split ||
          count < 2 * hyper_.min_samples_leaf || pos == 0.0 || neg == 0.0) {
        continue;
      }
      const auto split = find_split(work.samples, pos, neg);
      if (!split) continue;

      std::vector<std::uint32_t> left, right;
      for (auto s : work.samples) {
        (value_of(s, split->feature) <= split->threshold ? left : right).push_back(s);
      }
      const auto left_index = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[work.node];
      node.feature = static_cast<std::int32_t>(split->feature);
      node.threshold = split->threshold;
      node.left = left_index;
      node.right = left_index + 1;
      stack.push_back({static_cast<std::size_t>(left_index + 1), std::move(right), work.depth + 1});
      stack.push_back({static_cast<std::size_t>(left_index), std::move(left), work.depth + 1});
    }
    return tree;
  }

 private:
  struct Split {
    std::uint32_t feature;
    double threshold;
    double impurity;
  };
  struct Entry {
    std::uint32_t feature;
    double value;
    std::uint32_t sample;
  };

  double value_of(std::uint32_t sample, std::uint32_t feature) const {
    const auto& row = x_.rows[sample];
    auto it = std::lower_bound(row.index.begin(), row.index.end(), feature);
    if (it == row.index.end() || *it != feature) return 0.0;
    return row.value[static_cast<std::size_t>(it - row.index.begin())];
  }

  std::optional<Split> find_split(const std::vector<std::uint32_t>& samples, double pos, double neg) {
    // Bucket the node's nonzeros by feature; only sampled buckets get sorted.
    if (counts_.size() != x_.dim) counts_.assign(x_.dim, 0);
    present_.clear();
    for (auto s : samples) {
      const auto& row = x_.rows[s];
      for (std::size_t k = 0; k < row.index.size(); ++k) {
        if (row.value[k] == 0.0) continue;
        if (counts_[row.index[k]]++ == 0) present_.push_back(row.index[k]);
      }
    }
    std::sort(present_.begin(), present_.end());
    offsets_.resize(present_.size() + 1);
    offsets_[0] = 0;
    for (std::size_t g = 0; g < present_.size(); ++g) {
      offsets_[g + 1] = offsets_[g] + counts_[present_[g]];
      counts_[present_[g]] = static_cast<std::uint32_t>(g);  // now the bucket slot
    }
    entries_.resize(offsets_.back());
    cursor_.assign(offsets_.begin(), offsets_.end() - 1);
    for (auto s : samples) {
      const auto& row = x_.rows[s];
      for (std::size_t k = 0; k < row.index.size(); ++k) {
        if (row.value[k] != 0.0) entries_[cursor_[counts_[row.index[k]]]++] = {row.index[k], row.value[k], s};
      }
    }
    for (auto f : present_) counts_[f] = 0;

    // Partial Fisher-Yates over the present features until max_features of
    // them vary inside the node; absent features are constant zero.
    order_.resize(present_.size());
    for (std::size_t g = 0; g < order_.size(); ++g) order_[g] = g;
    std::optional<Split> best;
    std::size_t visited = 0;
    for (std::size_t i = 0; i < order_.size() && visited < max_features_; ++i) {
      std::swap(order_[i], order_[i + rng_.uniform_index(order_.size() - i)]);
      const std::size_t b = offsets_[order_[i]];
      const std::size_t e = offsets_[order_[i] + 1];
      std::sort(entries_.begin() + static_cast<std::ptrdiff_t>(b), entries_.begin() + static_cast<std::ptrdiff_t>(e),
                [](const Entry& l, const Entry& r) { return l.value != r.value ? l.value < r.value : l.sample < r.sample; });
      const bool varies = (e - b) < samples.size() || entries_[b].value != entries_[e - 1].value;
      if (!varies) continue;
      ++visited;
      const auto candidate = evaluate(b, e, samples.size(), pos, neg);
      if (candidate && (!best || candidate->impurity < best->impurity)) best = candidate;
    }
    return best;
  }

  std::optional<Split> evaluate(std::size_t begin, std::size_t end, std::size_t node_count, double pos,
                                double neg) const {
    struct Item {
      double value;
      double pos;
      double neg;
      std::size_t count;
    };
    std::vector<Item> items;
    items.reserve(end - begin + 1);
    double nz_pos = 0.0, nz_neg = 0.0;
    bool zero_added = false;
    const std::size_t zero_count = node_count - (end - begin);
    for (std::size_t k = begin; k < end; ++k) {
      const Entry& entry = entries_[k];
      if (!zero_added && entry.value > 0.0) {
        zero_added = true;
        if (zero_count > 0) items.push_back({0.0, 0.0, 0.0, zero_count});
      }
      const double w = weight_[entry.sample];
      Item item{entry.value, y_[entry.sample] ? w : 0.0, y_[entry.sample] ? 0.0 : w, 1};
      nz_pos += item.pos;
      nz_neg += item.neg;
      items.push_back(item);
    }
    if (!zero_added && zero_count > 0) items.push_back({0.0, 0.0, 0.0, zero_count});
    for (auto& item : items) {
      if (item.value == 0.0 && item.count == zero_count && item.pos == 0.0 && item.neg == 0.0) {
        item.pos = std::max(0.0, pos - nz_pos);
        item.neg = std::max(0.0, neg - nz_neg);
      }
    }

    const double total = pos + neg;
    std::optional<Split> best;
    double left_pos = 0.0, left_neg = 0.0;
    std::size_t left_count = 0;
    for (std::size_t k = 0; k + 1 < items.size(); ++k) {
      left_pos += items[k].pos;
      left_neg += items[k].neg;
      left_count += items[k].count;
      if (items[k].value == items[k + 1].value) continue;
      const std::size_t right_count = node_count - left_count;
      if (left_count < hyper_.min_samples_leaf || right_count < hyper_.min_samples_leaf) continue;
      const double right_pos = pos - left_pos;
      const double right_neg = neg - left_neg;
      const double left_weight = left_pos + left_neg;
      const double right_weight = right_pos + right_neg;
      const double impurity =
          (left_weight * gini(left_pos, left_neg) + right_weight * gini(right_pos, right_neg)) / total;
      if (!best || impurity < best->impurity) {
        double threshold = items[k].value + (items[k + 1].value - items[k].value) / 2.0;
        if (threshold >= items[k + 1].value) threshold = items[k].value;
        best = Split{entries_[begin].feature, threshold, impurity};
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  std::span<const std::uint8_t> y_;
  std::vector<double> weight_;
  const ForestHyper& hyper_;
  Rng& rng_;
  std::size_t max_features_ = 1;
  std::vector<Entry> entries_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> present_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> cursor_;
  std::vector<std::size_t> order_;
};

}  // namespace

ForestSubmodel train_forest_binary(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                                   const ForestHyper& hyper, std::size_t label_index) {
  ForestSubmodel forest;
  if (auto rate = degenerate_rate(y)) {
    forest.constant = true;
    forest.constant_score = *rate;
    return forest;
  }
  const std::size_t n = y.size();
  std::vector<int> signed_y(n);
  for (std::size_t i = 0; i < n; ++i) signed_y[i] = y[i] ? 1 : -1;
  const auto global_weights = class_weights(signed_y, hyper.class_weight == ClassWeight::kBalanced
                                                          ? ClassWeight::kBalanced
                                                          : ClassWeight::kNone);
  forest.trees.reserve(hyper.n_trees);
  for (std::size_t t = 0; t < hyper.n_trees; ++t) {
    Rng rng = Rng::substream(hyper.seed, {label_index, t});
    std::vector<double> counts(n, 1.0);
    if (hyper.bootstrap) {
      std::fill(counts.begin(), counts.end(), 0.0);
      for (std::size_t draw = 0; draw < n; ++draw) counts[rng.uniform_index(n)] += 1.0;
    }
    std::vector<double> weight(n);
    if (hyper.class_weight == ClassWeight::kBalancedSubsample) {
      double drawn_pos = 0.0, drawn_neg = 0.0;
      for (std::size_t i = 0; i < n; ++i) (y[i] ? drawn_pos : drawn_neg) += counts[i];
      const double drawn = drawn_pos + drawn_neg;
      for (std::size_t i = 0; i < n; ++i) {
        const double class_count = y[i] ? drawn_pos : drawn_neg;
        weight[i] = class_count > 0.0 ? counts[i] * drawn / (2.0 * class_count) : 0.0;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) weight[i] = counts[i] * global_weights[i];
    }
    TreeBuilder builder(x, y, std::move(weight), hyper, rng);
    forest.trees.push_back(builder.build());
  }
  return forest;
}

std::vector<double> OvrModel::score(const SparseVector& x) const {
  std::vector<double> scores(label_space.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    switch (kind) {
      case ModelKind::kLogistic:
        scores[j] = linear[j].constant ? linear[j].constant_score : sigmoid(linear[j].margin(x));
        break;
      case ModelKind::kSvm:
        scores[j] = linear[j].constant ? linear[j].constant_score : linear[j].margin(x);
        break;
      case ModelKind::kRandomForest:
        scores[j] = forest[j].score(x);
        break;
    }
  }
  return scores;
}

namespace {

OvrModel train_linear_ovr(ModelKind kind, const FeatureMatrix& x, const MultiHotMatrix& y,
                          const LabelSpace& space, const LinearHyper& hyper) {
  check_training_shapes(x, y, space);
  OvrModel model;
  model.kind = kind;
  model.feature_kind = x.kind;
  model.dim = x.dim;
  model.label_space = space;
  model.hyper.linear = hyper;
  model.linear.reserve(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) {
    const auto column = label_column(y, j);
    if (auto rate = degenerate_rate(column)) {
      LinearSubmodel constant;
      constant.constant = true;
      constant.constant_score = *rate;
      model.linear.push_back(std::move(constant));
      model.degenerate_labels.push_back(j);
      continue;
    }
    const auto problem = make_problem(x, column, hyper.class_weight);
    model.linear.push_back(kind == ModelKind::kLogistic ? train_logistic_binary(problem, hyper)
                                                        : train_svm_binary(problem, hyper));
  }
  return model;
}

}  // namespace

OvrModel train_logistic_ovr(const FeatureMatrix& x, const MultiHotMatrix& y, const LabelSpace& space,
                            const LinearHyper& hyper) {
  return train_linear_ovr(ModelKind::kLogistic, x, y, space, hyper);
}

OvrModel train_svm_ovr(const FeatureMatrix& x, const MultiHotMatrix& y, const LabelSpace& space,
                       const LinearHyper& hyper) {
  return train_linear_ovr(ModelKind::kSvm, x, y, space, hyper);
}

OvrModel train_random_forest(const FeatureMatrix& x, const MultiHotMatrix& y, const LabelSpace& space,
                             const ForestHyper& hyper) {
  check_training_shapes(x, y, space);
  OvrModel model;
  model.kind = ModelKind::kRandomForest;
  model.feature_kind = x.kind;
  model.dim = x.dim;
  model.label_space = space;
  model.hyper.forest = hyper;
  model.forest.reserve(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) {
    const auto column = label_column(y, j);
    model.forest.push_back(train_forest_binary(x, column, hyper, j));
    if (model.forest.back().constant) model.degenerate_labels.push_back(j);
  }
  return model;
}

OvrModel train_ovr(ModelKind kind, const FeatureMatrix& x, const MultiHotMatrix& y, const LabelSpace& space,
                   const HyperParams& hyper) {
  switch (kind) {
    case ModelKind::kLogistic: return train_logistic_ovr(x, y, space, hyper.linear);
    case ModelKind::kSvm: return train_svm_ovr(x, y, space, hyper.linear);
    case ModelKind::kRandomForest: return train_random_forest(x, y, space, hyper.forest);
  }
  throw Error(ErrorKind::kConfig, "unknown model kind");
}

std::vector<double> score_labels(const OvrModel& model, const SparseVector& x) {
  if (!x.index.empty() && x.index.back() >= model.dim) {
    throw Error(ErrorKind::kDimension, "input has feature column " + std::to_string(x.index.back()) +
                                           " but the model dimension is " + std::to_string(model.dim));
  }
  return model.score(x);
}

std::vector<std::vector<double>> score_matrix(const OvrModel& model, const FeatureMatrix& x) {
  if (x.kind != model.feature_kind) {
    throw Error(ErrorKind::kDimension, "model expects " + std::string(to_string(model.feature_kind)) +
                                           " features, got " + std::string(to_string(x.kind)));
  }
  if (x.dim != model.dim) {
    throw Error(ErrorKind::kDimension, "model dimension " + std::to_string(model.dim) +
                                           " differs from feature dimension " + std::to_string(x.dim));
  }
  std::vector<std::vector<double>> out;
  out.reserve(x.rows.size());
  for (const auto& row : x.rows) out.push_back(score_labels(model, row));
  return out;
}

std::vector<std::pair<std::string, double>> RankedPrediction::labeled(const LabelSpace& space) const {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) out.emplace_back(space.label(order[k]), scores[k]);
  return out;
}

RankedPrediction rank_labels(std::span<const double> scores, const LabelSpace& space, std::string report_id) {
  if (scores.size() != space.size()) {
    throw Error(ErrorKind::kDimension, "score vector length " + std::to_string(scores.size()) +
                                           " differs from label space size " + std::to_string(space.size()));
  }
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (!std::isfinite(scores[j])) {
      throw Error(ErrorKind::kInvalidInput, "non-finite score for label '" + space.label(j) + "'");
    }
  }
  RankedPrediction ranked;
  ranked.report_id = std::move(report_id);
  ranked.order.resize(scores.size());
  std::iota(ranked.order.begin(), ranked.order.end(), 0);
  std::stable_sort(ranked.order.begin(), ranked.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  ranked.scores.reserve(scores.size());
  for (std::size_t j : ranked.order) ranked.scores.push_back(scores[j]);
  return ranked;
}

nlohmann::json to_json(const OvrModel& model) {
  nlohmann::json params = nlohmann::json::array();
  if (model.kind == ModelKind::kRandomForest) {
    for (const auto& f : model.forest) {
      nlohmann::json trees = nlohmann::json::array();
      for (const auto& tree : f.trees) {
        std::vector<std::int32_t> feature, left, right;
        std::vector<double> threshold, value;
        for (const auto& node : tree.nodes) {
          feature.push_back(node.feature);
          threshold.push_back(node.threshold);
          left.push_back(node.left);
          right.push_back(node.right);
          value.push_back(node.value);
        }
        trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                         {"right", right}, {"value", value}});
      }
      params.push_back({{"constant", f.constant}, {"constant_score", f.constant_score}, {"trees", trees}});
    }
  } else {
    for (const auto& l : model.linear) {
      params.push_back({{"constant", l.constant},
                        {"constant_score", l.constant_score},
                        {"weights", l.weights},
                        {"bias", l.bias},
                        {"iterations", l.iterations},
                        {"gradient_norm", l.gradient_norm},
                        {"converged", l.converged}});
    }
  }
  return {{"version", OvrModel::kVersion},
          {"kind", to_string(model.kind)},
          {"feature_kind", to_string(model.feature_kind)},
          {"dim", model.dim},
          {"hyper", to_json(model.kind, model.hyper)},
          {"label_space", model.label_space.labels()},
          {"degenerate_labels", model.degenerate_labels},
          {"params", params}};
}

OvrModel ovr_model_from_json(const nlohmann::json& json) {
  OvrModel model;
  try {
    const int version = json.at("version").get<int>();
    if (version > OvrModel::kVersion) {
      throw Error(ErrorKind::kVersion, "model bundle version " + std::to_string(version) +
                                           " is newer than supported version " +
                                           std::to_string(OvrModel::kVersion));
    }
    model.kind = parse_model_kind(json.at("kind").get<std::string>());
    model.feature_kind = parse_feature_kind(json.at("feature_kind").get<std::string>());
    model.dim = json.at("dim").get<std::size_t>();
    model.hyper = hyper_from_json(model.kind, json.at("hyper"));
    model.label_space = LabelSpace(json.at("label_space").get<std::vector<std::string>>());
    model.degenerate_labels = json.value("degenerate_labels", std::vector<std::size_t>{});
    const auto& params = json.at("params");
    if (params.size() != model.label_space.size()) {
      throw Error(ErrorKind::kSchema, "model has " + std::to_string(params.size()) + " submodels for " +
                                          std::to_string(model.label_space.size()) + " labels");
    }
    for (const auto& p : params) {
      if (model.kind == ModelKind::kRandomForest) {
        ForestSubmodel f;
        f.constant = p.at("constant").get<bool>();
        f.constant_score = p.at("constant_score").get<double>();
        for (const auto& t : p.at("trees")) {
          const auto feature = t.at("feature").get<std::vector<std::int32_t>>();
          const auto threshold = t.at("threshold").get<std::vector<double>>();
          const auto left = t.at("left").get<std::vector<std::int32_t>>();
          const auto right = t.at("right").get<std::vector<std::int32_t>>();
          const auto value = t.at("value").get<std::vector<double>>();
          const std::size_t count = feature.size();
          if (threshold.size() != count || left.size() != count || right.size() != count ||
              value.size() != count || count == 0) {
            throw Error(ErrorKind::kSchema, "malformed tree arrays");
          }
          DecisionTree tree;
          for (std::size_t k = 0; k < count; ++k) {
            if (feature[k] >= 0 &&
                (left[k] <= static_cast<std::int32_t>(k) || right[k] <= static_cast<std::int32_t>(k) ||
                 left[k] >= static_cast<std::int32_t>(count) || right[k] >= static_cast<std::int32_t>(count) ||
                 static_cast<std::size_t>(feature[k]) >= model.dim)) {
              throw Error(ErrorKind::kSchema, "tree node " + std::to_string(k) + " has invalid links");
            }
            tree.nodes.push_back({feature[k], threshold[k], left[k], right[k], value[k]});
          }
          f.trees.push_back(std::move(tree));
        }
        if (!f.constant && f.trees.empty()) throw Error(ErrorKind::kSchema, "forest without trees");
        model.forest.push_back(std::move(f));
      } else {
        LinearSubmodel l;
        l.constant = p.at("constant").get<bool>();
        l.constant_score = p.at("constant_score").get<double>();
        l.weights = p.at("weights").get<std::vector<double>>();
        l.bias = p.at("bias").get<double>();
        l.iterations = p.value("iterations", std::size_t{0});
        l.gradient_norm = p.value("gradient_norm", 0.0);
        l.converged = p.value("converged", true);
        if (!l.constant && l.weights.size() != model.dim) {
          throw Error(ErrorKind::kSchema, "weight vector length differs from model dimension");
        }
        model.linear.push_back(std::move(l));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed model: ") + e.what());
  }
  return model;
}

nlohmann::json to_json(const ModelBundle& bundle) {
  nlohmann::json json = to_json(bundle.model);
  json["feature_ref"] = bundle.transformer ? to_json(*bundle.transformer) : nlohmann::json(nullptr);
  json["preprocess"] = bundle.preprocess ? to_json(*bundle.preprocess) : nlohmann::json(nullptr);
  return json;
}

ModelBundle bundle_from_json(const nlohmann::json& json) {
  ModelBundle bundle;
  bundle.model = ovr_model_from_json(json);
  if (json.contains("feature_ref") && !json.at("feature_ref").is_null()) {
    bundle.transformer = transformer_from_json(json.at("feature_ref"));
    if (bundle.transformer->dim() != bundle.model.dim) {
      throw Error(ErrorKind::kDimension, "bundled feature transformer dimension differs from the model");
    }
  }
  if (json.contains("preprocess") && !json.at("preprocess").is_null()) {
    bundle.preprocess = preprocess_config_from_json(json.at("preprocess"));
  }
  return bundle;
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
  io::write_file(path, to_json(bundle).dump() + "\n");
}

ModelBundle parse_model(std::string_view text) {
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParse, "model bundle is not valid JSON (byte " + std::to_string(e.byte) +
                                       "): " + e.what());
  }
  return bundle_from_json(json);
}

ModelBundle load_model(const std::filesystem::path& path) { return parse_model(io::read_file(path)); }

}  // namespace faultloc
