#include "faultloc/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "faultloc/csv.hpp"
#include "faultloc/error.hpp"
#include "faultloc/io.hpp"

namespace faultloc {
namespace {

double parse_double(std::string_view text, const std::string& where) {
  const std::string trimmed = csv::trim(text);
  double value = 0.0;
  const char* begin = trimmed.data();
  const char* end = begin + trimmed.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (trimmed.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorKind::kParse, where + ": '" + trimmed + "' is not a finite number");
  }
  return value;
}

// Compensated (Neumaier) summation.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace

double SparseVector::norm() const {
  double sum = 0.0;
  for (double v : value) sum += v * v;
  return std::sqrt(sum);
}

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::kTfidf ? "tfidf" : "dense";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "tfidf") return FeatureKind::kTfidf;
  if (text == "dense" || text == "embeddings") return FeatureKind::kDense;
  throw Error(ErrorKind::kConfig, "unknown feature kind '" + std::string(text) + "'");
}

void TfidfConfig::validate() const {
  if (ngram_lo < 1 || ngram_lo > ngram_hi) throw Error(ErrorKind::kConfig, "ngram range must satisfy 1 <= lo <= hi");
  if (min_df < 1) throw Error(ErrorKind::kConfig, "min_df must be >= 1");
  if (max_features && *max_features == 0) throw Error(ErrorKind::kConfig, "max_features must be positive");
}

TfidfModel::TfidfModel(TfidfConfig config, std::vector<std::string> vocabulary, std::vector<double> idf)
    : config_(config), vocabulary_(std::move(vocabulary)), idf_(std::move(idf)) {
  if (vocabulary_.size() != idf_.size()) {
    throw Error(ErrorKind::kDimension, "TF-IDF vocabulary and idf lengths differ");
  }
  columns_.reserve(vocabulary_.size());
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!columns_.emplace(vocabulary_[i], static_cast<std::uint32_t>(i)).second) {
      throw Error(ErrorKind::kDuplicate, "duplicate vocabulary entry '" + vocabulary_[i] + "'");
    }
  }
}

std::optional<std::uint32_t> TfidfModel::column(const std::string& ngram) const {
  auto it = columns_.find(ngram);
  if (it == columns_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, std::size_t lo,
                                        std::size_t hi) {
  std::vector<std::string> out;
  for (std::size_t n = lo; n <= hi; ++n) {
    if (tokens.size() < n) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t k = 1; k < n; ++k) {
        gram.push_back(' ');
        gram += tokens[i + k];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

TfidfModel fit_tfidf(const std::vector<std::vector<std::string>>& documents, const TfidfConfig& config) {
  config.validate();
  if (documents.empty()) throw Error(ErrorKind::kPrecondition, "cannot fit TF-IDF on an empty corpus");

  struct TermStats {
    std::size_t df = 0;
    std::size_t total = 0;
  };
  std::unordered_map<std::string, TermStats> stats;
  for (const auto& document : documents) {
    std::unordered_set<std::string> seen;
    for (auto& gram : extract_ngrams(document, config.ngram_lo, config.ngram_hi)) {
      auto& entry = stats[gram];
      ++entry.total;
      if (seen.insert(std::move(gram)).second) ++entry.df;
    }
  }

  std::vector<std::pair<std::string, TermStats>> kept;
  for (auto& [term, s] : stats) {
    if (s.df >= config.min_df) kept.emplace_back(term, s);
  }
  if (kept.empty()) {
    throw Error(ErrorKind::kEmptyVocabulary,
                "TF-IDF vocabulary is empty after pruning with min_df = " + std::to_string(config.min_df) +
                    "; lower min_df");
  }
  if (config.max_features && kept.size() > *config.max_features) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second.total != b.second.total) return a.second.total > b.second.total;
      return a.first < b.first;
    });
    kept.resize(*config.max_features);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  const double n = static_cast<double>(documents.size());
  std::vector<std::string> vocabulary;
  std::vector<double> idf;
  vocabulary.reserve(kept.size());
  idf.reserve(kept.size());
  for (auto& [term, s] : kept) {
    vocabulary.push_back(term);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(s.df))) + 1.0);
  }
  return TfidfModel(config, std::move(vocabulary), std::move(idf));
}

TfidfModel fit_tfidf(const std::vector<ProcessedReport>& train, const TfidfConfig& config) {
  std::vector<std::vector<std::string>> documents;
  documents.reserve(train.size());
  for (const auto& report : train) documents.push_back(report.tokens);
  return fit_tfidf(documents, config);
}

SparseVector TfidfModel::transform(const std::vector<std::string>& tokens) const {
  std::unordered_map<std::uint32_t, std::size_t> counts;
  for (const auto& gram : extract_ngrams(tokens, config_.ngram_lo, config_.ngram_hi)) {
    if (auto col = column(gram)) ++counts[*col];
  }
  std::vector<std::pair<std::uint32_t, double>> entries;
  entries.reserve(counts.size());
  for (const auto& [col, count] : counts) entries.emplace_back(col, static_cast<double>(count) * idf_[col]);
  std::sort(entries.begin(), entries.end());

  SparseVector out;
  double sum = 0.0;
  for (const auto& [col, v] : entries) sum += v * v;
  const double norm = std::sqrt(sum);
  if (norm == 0.0) return out;
  out.index.reserve(entries.size());
  out.value.reserve(entries.size());
  for (const auto& [col, v] : entries) {
    out.index.push_back(col);
    out.value.push_back(v / norm);
  }
  return out;
}

FeatureMatrix TfidfModel::transform(const std::vector<ProcessedReport>& reports) const {
  FeatureMatrix matrix{FeatureKind::kTfidf, dim(), {}};
  matrix.rows.reserve(reports.size());
  for (const auto& report : reports) matrix.rows.push_back(transform(report.tokens));
  return matrix;
}

SparseVector transform_tfidf(const TfidfModel& model, const std::vector<std::string>& tokens) {
  return model.transform(tokens);
}

nlohmann::json to_json(const TfidfConfig& config) {
  nlohmann::json json;
  json["max_features"] = config.max_features ? nlohmann::json(*config.max_features) : nlohmann::json(nullptr);
  json["ngram_range"] = {config.ngram_lo, config.ngram_hi};
  json["min_df"] = config.min_df;
  return json;
}

TfidfConfig tfidf_config_from_json(const nlohmann::json& json) {
  TfidfConfig config;
  try {
    if (json.contains("max_features") && !json.at("max_features").is_null()) {
      config.max_features = json.at("max_features").get<std::size_t>();
    }
    if (json.contains("ngram_range")) {
      config.ngram_lo = json.at("ngram_range").at(0).get<std::size_t>();
      config.ngram_hi = json.at("ngram_range").at(1).get<std::size_t>();
    }
    if (json.contains("min_df")) config.min_df = json.at("min_df").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed TF-IDF config: ") + e.what());
  }
  config.validate();
  return config;
}

nlohmann::json to_json(const TfidfModel& model) {
  return {{"version", TfidfModel::kVersion},
          {"config", to_json(model.config())},
          {"vocabulary", model.vocabulary()},
          {"idf", model.idf()}};
}

TfidfModel tfidf_model_from_json(const nlohmann::json& json) {
  try {
    const int version = json.at("version").get<int>();
    if (version > TfidfModel::kVersion) {
      throw Error(ErrorKind::kVersion, "TF-IDF model version " + std::to_string(version) +
                                           " is newer than supported version " +
                                           std::to_string(TfidfModel::kVersion));
    }
    return TfidfModel(tfidf_config_from_json(json.at("config")),
                      json.at("vocabulary").get<std::vector<std::string>>(),
                      json.at("idf").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed TF-IDF model: ") + e.what());
  }
}

void save_tfidf(const TfidfModel& model, const std::filesystem::path& path) {
  io::write_file(path, to_json(model).dump() + "\n");
}

TfidfModel load_tfidf(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParse, "TF-IDF model '" + path.string() + "' at byte " +
                                       std::to_string(e.byte) + ": " + e.what());
  }
  return tfidf_model_from_json(json);
}

DenseMatrix parse_dense_vectors(std::string_view text, bool jsonl,
                                const std::vector<std::string>& expected_ids) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::size_t dim = 0;

  auto accept = [&](std::string id, std::vector<double> vector, const std::string& where) {
    if (vector.empty()) throw Error(ErrorKind::kParse, where + ": empty vector");
    if (rows.empty()) {
      dim = vector.size();
    } else if (vector.size() != dim) {
      throw Error(ErrorKind::kDimension, where + ": ragged vector of dimension " +
                                             std::to_string(vector.size()) + ", expected " +
                                             std::to_string(dim));
    }
    ids.push_back(std::move(id));
    rows.push_back(std::move(vector));
  };

  if (jsonl) {
    std::size_t start = 0, line_number = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      const std::string line = csv::trim(text.substr(start, end - start));
      start = end + 1;
      ++line_number;
      if (line.empty()) continue;
      const std::string where = "row " + std::to_string(line_number);
      try {
        const auto object = nlohmann::json::parse(line);
        accept(object.at("id").is_string() ? object.at("id").get<std::string>() : object.at("id").dump(),
               object.at("vector").get<std::vector<double>>(), where);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kParse, where + ": " + e.what());
      }
    }
  } else {
    const auto parsed = csv::parse(text);
    for (std::size_t r = 0; r < parsed.size(); ++r) {
      const auto& fields = parsed[r].fields;
      if (r == 0 && !fields.empty() && csv::trim(fields[0]) == "id") continue;
      const std::string where = "row " + std::to_string(parsed[r].line);
      std::vector<double> vector;
      vector.reserve(fields.size() > 0 ? fields.size() - 1 : 0);
      for (std::size_t c = 1; c < fields.size(); ++c) vector.push_back(parse_double(fields[c], where));
      accept(csv::trim(fields[0]), std::move(vector), where);
    }
  }

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!position.emplace(ids[i], i).second) {
      throw Error(ErrorKind::kDuplicate, "duplicate vector id '" + ids[i] + "'");
    }
  }
  DenseMatrix out;
  out.dim = dim;
  out.ids = expected_ids;
  out.rows.reserve(expected_ids.size());
  for (const auto& id : expected_ids) {
    auto it = position.find(id);
    if (it == position.end()) throw Error(ErrorKind::kMissingArtifact, "no vector for report id '" + id + "'");
    out.rows.push_back(rows[it->second]);
  }
  return out;
}

DenseMatrix load_dense_vectors(const std::filesystem::path& path,
                               const std::vector<std::string>& expected_ids) {
  const auto ext = path.extension().string();
  return parse_dense_vectors(io::read_file(path), ext == ".jsonl" || ext == ".ndjson", expected_ids);
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean_.size()) {
    throw Error(ErrorKind::kDimension, "standardizer expects dimension " + std::to_string(mean_.size()) +
                                           ", got " + std::to_string(row.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean_[j]) / stddev_[j];
  return out;
}

DenseMatrix Standardizer::apply(const DenseMatrix& matrix) const {
  DenseMatrix out{matrix.ids, {}, matrix.dim};
  out.rows.reserve(matrix.rows.size());
  for (const auto& row : matrix.rows) out.rows.push_back(apply(row));
  return out;
}

Standardizer fit_standardizer(const DenseMatrix& train) {
  if (train.rows.size() < 2) {
    throw Error(ErrorKind::kPrecondition, "standardizer needs at least 2 training rows");
  }
  const std::size_t dim = train.rows.front().size();
  const double n = static_cast<double>(train.rows.size());
  std::vector<double> mean(dim), stddev(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    Accumulator sum;
    double lo = train.rows.front()[j], hi = lo;
    for (const auto& row : train.rows) {
      if (row.size() != dim) throw Error(ErrorKind::kDimension, "ragged training matrix");
      sum.add(row[j]);
      lo = std::min(lo, row[j]);
      hi = std::max(hi, row[j]);
    }
    mean[j] = sum.value() / n;
    if (lo == hi) {
      mean[j] = lo;
      stddev[j] = 1.0;
      continue;
    }
    Accumulator squares;
    for (const auto& row : train.rows) {
      const double d = row[j] - mean[j];
      squares.add(d * d);
    }
    const double sd = std::sqrt(squares.value() / n);
    stddev[j] = sd > 0.0 ? sd : 1.0;
  }
  return Standardizer(std::move(mean), std::move(stddev));
}

DenseMatrix apply_standardizer(const Standardizer& standardizer, const DenseMatrix& matrix) {
  return standardizer.apply(matrix);
}

nlohmann::json to_json(const Standardizer& standardizer) {
  return {{"version", Standardizer::kVersion},
          {"mean", standardizer.mean()},
          {"std", standardizer.stddev()}};
}

Standardizer standardizer_from_json(const nlohmann::json& json) {
  try {
    const int version = json.at("version").get<int>();
    if (version > Standardizer::kVersion) {
      throw Error(ErrorKind::kVersion, "standardizer version " + std::to_string(version) +
                                           " is newer than supported version " +
                                           std::to_string(Standardizer::kVersion));
    }
    auto mean = json.at("mean").get<std::vector<double>>();
    auto stddev = json.at("std").get<std::vector<double>>();
    if (mean.size() != stddev.size()) throw Error(ErrorKind::kDimension, "standardizer mean/std lengths differ");
    return Standardizer(std::move(mean), std::move(stddev));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed standardizer: ") + e.what());
  }
}

FeatureMatrix to_feature_matrix(const DenseMatrix& dense) {
  FeatureMatrix matrix{FeatureKind::kDense, dense.dim, {}};
  matrix.rows.reserve(dense.rows.size());
  for (const auto& row : dense.rows) {
    SparseVector sparse;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 0.0) {
        sparse.index.push_back(static_cast<std::uint32_t>(j));
        sparse.value.push_back(row[j]);
      }
    }
    matrix.rows.push_back(std::move(sparse));
  }
  return matrix;
}

FittedTransformer::FittedTransformer(TfidfModel tfidf)
    : kind_(FeatureKind::kTfidf), tfidf_(std::move(tfidf)) {}

FittedTransformer::FittedTransformer(Standardizer standardizer, const DenseMatrix* source)
    : kind_(FeatureKind::kDense), standardizer_(std::move(standardizer)), source_(source) {
  if (source_) {
    for (std::size_t i = 0; i < source_->ids.size(); ++i) source_rows_.emplace(source_->ids[i], i);
  }
}

std::size_t FittedTransformer::dim() const {
  return kind_ == FeatureKind::kTfidf ? tfidf_.dim() : standardizer_.dim();
}

FeatureMatrix FittedTransformer::transform(const std::vector<ProcessedReport>& reports) const {
  if (kind_ == FeatureKind::kTfidf) return tfidf_.transform(reports);
  if (!source_) throw Error(ErrorKind::kMissingArtifact, "dense transformer has no vector source attached");
  DenseMatrix dense{{}, {}, standardizer_.dim()};
  for (const auto& report : reports) {
    auto it = source_rows_.find(report.report_id);
    if (it == source_rows_.end()) {
      throw Error(ErrorKind::kMissingArtifact, "no dense vector for report id '" + report.report_id + "'");
    }
    dense.ids.push_back(report.report_id);
    dense.rows.push_back(standardizer_.apply(source_->rows[it->second]));
  }
  return to_feature_matrix(dense);
}

SparseVector FittedTransformer::transform_tokens(const std::vector<std::string>& tokens) const {
  if (kind_ != FeatureKind::kTfidf) {
    throw Error(ErrorKind::kInvalidInput, "dense-feature models need precomputed vectors, not text");
  }
  return tfidf_.transform(tokens);
}

FittedTransformer fit_transformer(const FeatureSpec& spec, const std::vector<ProcessedReport>& train) {
  if (spec.kind == FeatureKind::kTfidf) return FittedTransformer(fit_tfidf(train, spec.tfidf));
  if (!spec.dense) throw Error(ErrorKind::kMissingArtifact, "dense features requested without a vector file");
  std::unordered_map<std::string, std::size_t> rows;
  for (std::size_t i = 0; i < spec.dense->ids.size(); ++i) rows.emplace(spec.dense->ids[i], i);
  DenseMatrix fit_rows{{}, {}, spec.dense->dim};
  for (const auto& report : train) {
    auto it = rows.find(report.report_id);
    if (it == rows.end()) {
      throw Error(ErrorKind::kMissingArtifact, "no dense vector for report id '" + report.report_id + "'");
    }
    fit_rows.ids.push_back(report.report_id);
    fit_rows.rows.push_back(spec.dense->rows[it->second]);
  }
  return FittedTransformer(fit_standardizer(fit_rows), spec.dense);
}

nlohmann::json to_json(const FittedTransformer& transformer) {
  if (transformer.kind() == FeatureKind::kTfidf) {
    return {{"kind", "tfidf"}, {"model", to_json(transformer.tfidf())}};
  }
  return {{"kind", "dense"}, {"standardizer", to_json(transformer.standardizer())}};
}

FittedTransformer transformer_from_json(const nlohmann::json& json) {
  try {
    const auto kind = parse_feature_kind(json.at("kind").get<std::string>());
    if (kind == FeatureKind::kTfidf) return FittedTransformer(tfidf_model_from_json(json.at("model")));
    return FittedTransformer(standardizer_from_json(json.at("standardizer")), nullptr);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed feature transformer: ") + e.what());
  }
}

}  // namespace faultloc
