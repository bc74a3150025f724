#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "faultloc/features.hpp"
#include "helpers.hpp"
#include "synth.hpp"

namespace faultloc {
namespace {

using Docs = std::vector<std::vector<std::string>>;

const Docs kDocs{{"robot", "arm"}, {"robot", "error"}};

double weight(const TfidfModel& model, const SparseVector& v, const std::string& term) {
  const auto col = model.column(term);
  for (std::size_t i = 0; i < v.nnz(); ++i) {
    if (col && v.index[i] == *col) return v.value[i];
  }
  return 0.0;
}

TEST(Tfidf, SmoothedIdf) {
  const auto model = fit_tfidf(kDocs, TfidfConfig{});
  EXPECT_EQ(model.vocabulary(), (std::vector<std::string>{"arm", "error", "robot"}));
  EXPECT_NEAR(model.idf()[2], std::log(3.0 / 3.0) + 1.0, 1e-15);
  EXPECT_NEAR(model.idf()[0], std::log(3.0 / 2.0) + 1.0, 1e-15);
  EXPECT_NEAR(model.idf()[0], 1.405465, 1e-6);
  EXPECT_DOUBLE_EQ(model.idf()[0], model.idf()[1]);
}

TEST(Tfidf, NormalisedRow) {
  const auto model = fit_tfidf(kDocs, TfidfConfig{});
  const auto v = transform_tfidf(model, {"robot", "arm"});
  const double a = std::log(1.5) + 1.0;
  const double norm = std::sqrt(a * a + 1.0);
  EXPECT_NEAR(weight(model, v, "arm"), a / norm, 1e-15);
  EXPECT_NEAR(weight(model, v, "robot"), 1.0 / norm, 1e-15);
  // 0.81482 is a hand rounding, 1.2e-5 off the exact value.
  EXPECT_NEAR(weight(model, v, "arm"), 0.81482, 5e-5);
  EXPECT_NEAR(weight(model, v, "robot"), 0.57974, 5e-5);
}

TEST(Tfidf, MinDfPrunesEverything) {
  TfidfConfig config;
  config.min_df = 3;
  EXPECT_FAULT(fit_tfidf(kDocs, config), ErrorKind::kEmptyVocabulary);
  const auto msg = testing::error_message([&] { fit_tfidf(kDocs, config); });
  EXPECT_NE(msg.find("min_df"), std::string::npos) << msg;
}

TEST(Tfidf, Bigrams) {
  TfidfConfig config;
  config.ngram_hi = 2;
  EXPECT_TRUE(fit_tfidf(kDocs, config).column("robot arm").has_value());
  EXPECT_EQ(extract_ngrams({"a", "b", "c"}, 1, 2), (std::vector<std::string>{"a", "b", "c", "a b", "b c"}));
}

TEST(Tfidf, OutOfVocabularyIsZero) {
  const auto model = fit_tfidf(kDocs, TfidfConfig{});
  EXPECT_EQ(transform_tfidf(model, {"unknown", "words"}).nnz(), 0u);
}

TEST(Tfidf, RawTermCount) {
  const auto model = fit_tfidf(kDocs, TfidfConfig{});
  const auto v = transform_tfidf(model, {"robot", "robot", "arm"});
  const double a = std::log(1.5) + 1.0;
  EXPECT_NEAR(weight(model, v, "robot") / weight(model, v, "arm"), 2.0 / a, 1e-12);
}

TEST(Tfidf, MaxFeaturesByCountThenLexicographic) {
  const Docs docs{{"b", "b", "a", "c"}, {"c", "d"}};
  TfidfConfig config;
  config.max_features = 2;
  // counts: b 2, c 2, a 1, d 1
  EXPECT_EQ(fit_tfidf(docs, config).vocabulary(), (std::vector<std::string>{"b", "c"}));
  config.max_features = 3;
  EXPECT_EQ(fit_tfidf(docs, config).vocabulary(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Tfidf, ConfigValidation) {
  TfidfConfig config;
  config.ngram_lo = 2;
  config.ngram_hi = 1;
  EXPECT_ANY_THROW(config.validate());
  config = {};
  config.min_df = 0;
  EXPECT_ANY_THROW(config.validate());
}

TEST(Tfidf, RowNormsZeroOrOne) {
  const auto corpus = synth::pareto_corpus(1, 300, 10, 1.0, 1);
  TfidfConfig config;
  config.ngram_hi = 2;
  config.min_df = 2;
  const auto model = fit_tfidf(corpus, config);
  for (const auto& row : model.transform(corpus).rows) {
    const double n = row.norm();
    EXPECT_TRUE(std::abs(n) < 1e-9 || std::abs(n - 1.0) < 1e-9) << n;
  }
}

TEST(Tfidf, SentinelNeverEntersVocabulary) {
  std::vector<ProcessedReport> train{{"1", {"robot", "arm"}, {"A"}}, {"2", {"robot"}, {"B"}}};
  const auto model = fit_transformer(FeatureSpec{}, train);
  EXPECT_FALSE(model.tfidf().column("zzsentinel").has_value());
  EXPECT_EQ(model.transform_tokens({"zzsentinel"}).nnz(), 0u);
}

TEST(Tfidf, SaveLoadTransformsIdentically) {
  const auto corpus = synth::pareto_corpus(6, 200, 8, 1.0, 1);
  TfidfConfig config;
  config.ngram_hi = 3;
  const auto model = fit_tfidf(corpus, config);
  const auto path = std::filesystem::temp_directory_path() / "faultloc_tfidf_roundtrip.json";
  save_tfidf(model, path);
  const auto loaded = load_tfidf(path);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded.config(), model.config());
  for (const auto& r : corpus) EXPECT_EQ(loaded.transform(r.tokens), model.transform(r.tokens));
}

std::string dense_csv(const std::vector<std::string>& ids, std::size_t dim) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    for (std::size_t j = 0; j < dim; ++j) out << ',' << (i + j) * 0.5;
    out << '\n';
  }
  return out.str();
}

TEST(Dense, AlignedToExpectedIds) {
  const auto m = parse_dense_vectors(dense_csv({"a", "b", "c"}, 768), false, {"c", "a", "b"});
  EXPECT_EQ(m.dim, 768u);
  ASSERT_EQ(m.rows.size(), 3u);
  EXPECT_EQ(m.ids, (std::vector<std::string>{"c", "a", "b"}));
  EXPECT_DOUBLE_EQ(m.rows[0][0], 1.0);
}

TEST(Dense, MissingIdNamed) {
  const auto msg = testing::error_message(
      [] { parse_dense_vectors(dense_csv({"a", "b"}, 4), false, {"a", "b", "missing7"}); });
  EXPECT_NE(msg.find("missing7"), std::string::npos) << msg;
}

TEST(Dense, RaggedRowNumbered) {
  const auto msg = testing::error_message([] { parse_dense_vectors("a,1,2\nb,1\n", false, {"a", "b"}); });
  EXPECT_NE(msg.find('2'), std::string::npos) << msg;
  EXPECT_FALSE(msg.empty());
}

TEST(Dense, JsonlInput) {
  const auto m = parse_dense_vectors("{\"id\":\"a\",\"vector\":[1,2]}\n{\"id\":\"b\",\"vector\":[3,4]}\n", true,
                                     {"b", "a"});
  EXPECT_EQ(m.rows[0], (std::vector<double>{3, 4}));
}

TEST(Standardizer, Examples) {
  DenseMatrix train{{"a", "b"}, {{0.0, 5.0}, {2.0, 5.0}}, 2};
  const auto s = fit_standardizer(train);
  EXPECT_DOUBLE_EQ(s.mean()[0], 1.0);
  EXPECT_DOUBLE_EQ(s.stddev()[0], 1.0);
  EXPECT_DOUBLE_EQ(s.stddev()[1], 1.0);
  const auto z = apply_standardizer(s, train);
  EXPECT_DOUBLE_EQ(z.rows[0][0], -1.0);
  EXPECT_DOUBLE_EQ(z.rows[1][0], 1.0);
  EXPECT_DOUBLE_EQ(z.rows[0][1], 0.0);
  EXPECT_ANY_THROW(fit_standardizer(DenseMatrix{{"a"}, {{1.0}}, 1}));
}

TEST(Standardizer, TrainColumnsCentredAndScaled) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> normal(3.0, 2.5);
  DenseMatrix m;
  m.dim = 6;
  for (int i = 0; i < 50; ++i) {
    m.ids.push_back(std::to_string(i));
    std::vector<double> row;
    for (int j = 0; j < 5; ++j) row.push_back(normal(gen));
    row.push_back(4.0);
    m.rows.push_back(row);
  }
  const auto z = apply_standardizer(fit_standardizer(m), m);
  for (std::size_t j = 0; j < 6; ++j) {
    double mean = 0.0;
    double sq = 0.0;
    for (const auto& row : z.rows) mean += row[j];
    mean /= 50.0;
    for (const auto& row : z.rows) sq += (row[j] - mean) * (row[j] - mean);
    EXPECT_LE(std::abs(mean), 1e-9);
    if (j < 5) EXPECT_NEAR(std::sqrt(sq / 50.0), 1.0, 1e-9);
  }
}

TEST(Transformer, DenseFitsOnTrainRowsOnly) {
  DenseMatrix all{{"t1", "t2", "v1"}, {{0.0}, {2.0}, {1000.0}}, 1};
  FeatureSpec spec;
  spec.kind = FeatureKind::kDense;
  spec.dense = &all;
  std::vector<ProcessedReport> train{{"t1", {}, {"A"}}, {"t2", {}, {"B"}}};
  const auto t = fit_transformer(spec, train);
  EXPECT_DOUBLE_EQ(t.standardizer().mean()[0], 1.0);
  EXPECT_DOUBLE_EQ(t.standardizer().stddev()[0], 1.0);
}

}  // namespace
}  // namespace faultloc
