#include <gtest/gtest.h>

#include <set>

#include "faultloc/datasplit.hpp"
#include "helpers.hpp"
#include "synth.hpp"

namespace faultloc {
namespace {

std::vector<ProcessedReport> single_label(const std::vector<std::pair<std::string, std::size_t>>& counts) {
  std::vector<ProcessedReport> out;
  for (const auto& [label, n] : counts) {
    for (std::size_t i = 0; i < n; ++i) out.push_back({label + std::to_string(i), {"tok"}, {label}});
  }
  return out;
}

std::size_t count_with(const std::vector<ProcessedReport>& reports, const std::string& label) {
  std::size_t n = 0;
  for (const auto& r : reports) n += r.labels.contains(label);
  return n;
}

TEST(Split, SingleLabelDegeneratesToSizes) {
  const auto split = iterative_stratified_split(single_label({{"A", 100}}), SplitSpec{});
  EXPECT_EQ(split.train.reports.size(), 70u);
  EXPECT_EQ(split.validation.size(), 20u);
  EXPECT_EQ(split.test.size(), 10u);
}

TEST(Split, DefaultRatios) {
  SplitSpec spec;
  EXPECT_DOUBLE_EQ(spec.ratios[0], 0.70);
  EXPECT_DOUBLE_EQ(spec.ratios[1], 0.20);
  EXPECT_DOUBLE_EQ(spec.ratios[2], 0.10);
  EXPECT_EQ(spec.seed, 42u);
}

TEST(Split, FourLabelTrainShares) {
  const auto corpus = single_label({{"A", 100}, {"B", 60}, {"C", 30}, {"D", 10}});
  const auto split = iterative_stratified_split(corpus, SplitSpec{});
  for (const std::string label : {"A", "B", "C", "D"}) {
    const double share = static_cast<double>(count_with(split.train.reports, label)) /
                         static_cast<double>(count_with(corpus, label));
    EXPECT_NEAR(share, 0.70, 0.05) << label;
  }
}

TEST(Split, PartitionAndLabelSpaceFromTrain) {
  const auto corpus = synth::pareto_corpus(3, 400, 15, 1.2, 10);
  const auto split = iterative_stratified_split(corpus, SplitSpec{});
  std::multiset<std::string> ids;
  for (const auto* part : {&split.train.reports, &split.validation, &split.test}) {
    for (const auto& r : *part) ids.insert(r.report_id);
  }
  EXPECT_EQ(ids.size(), corpus.size());
  EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), corpus.size());
  EXPECT_EQ(split.label_space, fit_label_space(split.train.reports));
  EXPECT_EQ(split.y_train.size(), split.train.reports.size());
}

TEST(Split, SameSeedSameManifest) {
  const auto corpus = synth::pareto_corpus(9, 300, 10, 1.0, 10);
  SplitSpec spec;
  EXPECT_EQ(split_manifest(iterative_stratified_split(corpus, spec), spec).dump(),
            split_manifest(iterative_stratified_split(corpus, spec), spec).dump());
}

TEST(Split, ManifestMaterializes) {
  const auto corpus = synth::pareto_corpus(4, 200, 8, 1.0, 10);
  SplitSpec spec;
  const auto split = iterative_stratified_split(corpus, spec);
  const auto again = materialize_split(corpus, split_manifest(split, spec));
  ASSERT_EQ(again.test.size(), split.test.size());
  for (std::size_t i = 0; i < split.test.size(); ++i) EXPECT_EQ(again.test[i].report_id, split.test[i].report_id);
  EXPECT_EQ(again.label_space, split.label_space);
}

TEST(Split, Errors) {
  SplitSpec bad;
  bad.ratios = {0.7, 0.2, 0.2};
  EXPECT_FAULT(iterative_stratified_split(single_label({{"A", 10}}), bad), ErrorKind::kConfig);
  EXPECT_FAULT(iterative_stratified_split(single_label({{"A", 2}}), SplitSpec{}), ErrorKind::kPrecondition);
  auto corpus = single_label({{"A", 10}});
  corpus[3].labels.clear();
  EXPECT_FAULT(iterative_stratified_split(corpus, SplitSpec{}), ErrorKind::kPrecondition);
}

TEST(KFold, UniformThrees) {
  const auto folds = kfold_stratified(single_label({{"A", 9}}), 3, 42);
  ASSERT_EQ(folds.size(), 3u);
  for (const auto& f : folds) EXPECT_EQ(f.size(), 3u);
}

TEST(KFold, TwoFoldsThreeATwoB) {
  const auto folds = kfold_stratified(single_label({{"A", 6}, {"B", 4}}), 2, 42);
  ASSERT_EQ(folds.size(), 2u);
  for (const auto& f : folds) {
    EXPECT_EQ(count_with(f, "A"), 3u);
    EXPECT_EQ(count_with(f, "B"), 2u);
  }
}

TEST(KFold, DisjointCover) {
  const auto train = synth::pareto_corpus(5, 250, 12, 1.1, 10);
  const auto idx = kfold_indices(train, 3, 42);
  std::vector<int> seen(train.size(), 0);
  for (const auto& fold : idx) {
    for (auto i : fold) ++seen[i];
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(KFold, TooFewExamples) { EXPECT_ANY_THROW(kfold_stratified(single_label({{"A", 2}}), 3, 42)); }

TEST(LabelSpace, SortedFromTrain) {
  std::vector<ProcessedReport> train{{"1", {"t"}, {"B"}}, {"2", {"t"}, {"A", "B"}}};
  EXPECT_EQ(fit_label_space(train).labels(), (std::vector<std::string>{"A", "B"}));
  train.push_back({"3", {"t"}, {}});
  EXPECT_FAULT(fit_label_space(train), ErrorKind::kPrecondition);
}

TEST(Binarize, Examples) {
  const LabelSpace space({"A", "B", "C"});
  EXPECT_EQ(binarize({"A"}, space).row, (MultiHotRow{1, 0, 0}));
  EXPECT_EQ(binarize({"A", "C"}, space).row, (MultiHotRow{1, 0, 1}));
  const auto unknown = binarize({"D"}, space);
  EXPECT_EQ(unknown.row, (MultiHotRow{0, 0, 0}));
  EXPECT_EQ(unknown.unknown_labels, 1u);
  EXPECT_EQ(debinarize(MultiHotRow{1, 0, 1}, space), (LabelSet{"A", "C"}));
}

}  // namespace
}  // namespace faultloc
