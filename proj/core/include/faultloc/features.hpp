#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "faultloc/textprep.hpp"

namespace faultloc {

/// Sparse row with strictly increasing column indices.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
  double norm() const;
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

enum class FeatureKind { kTfidf, kDense };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

/// Report-aligned feature rows. Dense inputs are stored row-wise in the same
/// sparse layout so every model consumes one format.
struct FeatureMatrix {
  FeatureKind kind = FeatureKind::kTfidf;
  std::size_t dim = 0;
  std::vector<SparseVector> rows;

  std::size_t size() const { return rows.size(); }
};

struct TfidfConfig {
  std::optional<std::size_t> max_features;  // nullopt = unlimited
  std::size_t ngram_lo = 1;
  std::size_t ngram_hi = 1;
  std::size_t min_df = 1;

  void validate() const;
  friend bool operator==(const TfidfConfig&, const TfidfConfig&) = default;
};

/// Fitted TF-IDF vectoriser. Vocabulary columns are in lexicographic order;
/// idf = ln((1 + N) / (1 + df)) + 1; rows are raw counts * idf, L2-normalised.
class TfidfModel {
 public:
  static constexpr int kVersion = 1;

  TfidfModel() = default;
  TfidfModel(TfidfConfig config, std::vector<std::string> vocabulary, std::vector<double> idf);

  const TfidfConfig& config() const { return config_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  std::size_t dim() const { return vocabulary_.size(); }
  /// Column of an n-gram (tokens joined by single spaces), if in vocabulary.
  std::optional<std::uint32_t> column(const std::string& ngram) const;

  SparseVector transform(const std::vector<std::string>& tokens) const;
  FeatureMatrix transform(const std::vector<ProcessedReport>& reports) const;

 private:
  TfidfConfig config_;
  std::vector<std::string> vocabulary_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::uint32_t> columns_;
};

/// All n-grams of `tokens` with lo <= n <= hi, in document order.
std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, std::size_t lo,
                                        std::size_t hi);

/// Vocabulary from training documents only. Throws kEmptyVocabulary when
/// min_df prunes every term. With more than max_features candidates, the most
/// frequent terms (total raw count) are kept, ties lexicographic.
TfidfModel fit_tfidf(const std::vector<std::vector<std::string>>& train_documents,
                     const TfidfConfig& config);
TfidfModel fit_tfidf(const std::vector<ProcessedReport>& train, const TfidfConfig& config);

SparseVector transform_tfidf(const TfidfModel& model, const std::vector<std::string>& tokens);

nlohmann::json to_json(const TfidfConfig& config);
TfidfConfig tfidf_config_from_json(const nlohmann::json& json);
nlohmann::json to_json(const TfidfModel& model);
TfidfModel tfidf_model_from_json(const nlohmann::json& json);
void save_tfidf(const TfidfModel& model, const std::filesystem::path& path);
TfidfModel load_tfidf(const std::filesystem::path& path);

/// Dense vectors keyed by report id, e.g. precomputed sentence embeddings.
struct DenseMatrix {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::size_t dim = 0;
};

/// CSV `id,v0,v1,...` (header optional) or JSONL `{id, vector:[...]}`.
/// Rows come back aligned to `expected_ids`. Throws naming the missing or
/// duplicate id, or the row number of a ragged/unparseable row.
DenseMatrix load_dense_vectors(const std::filesystem::path& path,
                               const std::vector<std::string>& expected_ids);
DenseMatrix parse_dense_vectors(std::string_view text, bool jsonl,
                                const std::vector<std::string>& expected_ids);

/// Per-dimension mean / population standard deviation; constant dimensions
/// get std = 1 so they map to zero.
class Standardizer {
 public:
  static constexpr int kVersion = 1;

  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> stddev)
      : mean_(std::move(mean)), stddev_(std::move(stddev)) {}

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }
  std::size_t dim() const { return mean_.size(); }

  std::vector<double> apply(std::span<const double> row) const;
  DenseMatrix apply(const DenseMatrix& matrix) const;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

/// Requires at least two rows.
Standardizer fit_standardizer(const DenseMatrix& train);
DenseMatrix apply_standardizer(const Standardizer& standardizer, const DenseMatrix& matrix);

nlohmann::json to_json(const Standardizer& standardizer);
Standardizer standardizer_from_json(const nlohmann::json& json);

FeatureMatrix to_feature_matrix(const DenseMatrix& dense);

/// Featuriser selected for a pipeline: TF-IDF over tokens, or standardised
/// dense vectors looked up by report id.
struct FeatureSpec {
  FeatureKind kind = FeatureKind::kTfidf;
  TfidfConfig tfidf;
  const DenseMatrix* dense = nullptr;  // all vectors available, any order
};

class FittedTransformer {
 public:
  FittedTransformer() = default;
  explicit FittedTransformer(TfidfModel tfidf);
  FittedTransformer(Standardizer standardizer, const DenseMatrix* source);

  FeatureKind kind() const { return kind_; }
  std::size_t dim() const;
  const TfidfModel& tfidf() const { return tfidf_; }
  const Standardizer& standardizer() const { return standardizer_; }

  FeatureMatrix transform(const std::vector<ProcessedReport>& reports) const;
  /// TF-IDF only: featurise free tokens (prediction path).
  SparseVector transform_tokens(const std::vector<std::string>& tokens) const;

 private:
  FeatureKind kind_ = FeatureKind::kTfidf;
  TfidfModel tfidf_;
  Standardizer standardizer_;
  const DenseMatrix* source_ = nullptr;
  std::unordered_map<std::string, std::size_t> source_rows_;
};

/// Fits the transformer on `train` only.
FittedTransformer fit_transformer(const FeatureSpec& spec, const std::vector<ProcessedReport>& train);

nlohmann::json to_json(const FittedTransformer& transformer);
/// Dense transformers reload without a vector source; they cannot featurise text.
FittedTransformer transformer_from_json(const nlohmann::json& json);

}  // namespace faultloc
