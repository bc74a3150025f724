#include <gtest/gtest.h>

#include <algorithm>

#include "faultloc/augment.hpp"
#include "faultloc/rng.hpp"
#include "helpers.hpp"
#include "synth.hpp"

namespace faultloc {
namespace {

using Entries = std::map<std::string, std::vector<std::string>>;

}  // namespace
}  // namespace faultloc

namespace faultloc {
namespace {

TEST(SynonymReplace, SingleEligiblePosition) {
  Rng rng(1);
  const Thesaurus thesaurus(Entries{{"error", {"fault"}}});
  const auto out = synonym_replace({"robot", "error"}, thesaurus, 0.5, rng);
  EXPECT_EQ(out.tokens, (std::vector<std::string>{"robot", "fault"}));
  EXPECT_EQ(out.edits, 1u);
}

TEST(SynonymReplace, EmptyThesaurusIsIdentity) {
  Rng rng(1);
  const auto out = synonym_replace({"robot", "error"}, Thesaurus{}, 0.5, rng);
  EXPECT_EQ(out.tokens, (std::vector<std::string>{"robot", "error"}));
  EXPECT_TRUE(out.flagged);
}

TEST(SynonymReplace, EveryPosition) {
  Rng rng(1);
  const Thesaurus thesaurus(Entries{{"save", {"store"}}});
  EXPECT_EQ(synonym_replace({"save", "save"}, thesaurus, 1.0, rng).tokens,
            (std::vector<std::string>{"store", "store"}));
}

TEST(SynonymReplace, LengthPreserved) {
  const auto thesaurus = Thesaurus::defaults();
  const auto corpus = synth::pareto_corpus(2, 100, 5, 1.0, 1);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Rng rng(i);
    EXPECT_EQ(synonym_replace(corpus[i].tokens, thesaurus, 0.3, rng).tokens.size(), corpus[i].tokens.size());
  }
}

TEST(RandomSwap, TooShort) {
  Rng rng(1);
  const auto out = random_swap({"a"}, 0.5, rng);
  EXPECT_EQ(out.tokens, std::vector<std::string>{"a"});
  EXPECT_TRUE(out.flagged);
}

TEST(RandomSwap, PairSwaps) {
  Rng rng(1);
  EXPECT_EQ(random_swap({"a", "b"}, 0.1, rng).tokens, (std::vector<std::string>{"b", "a"}));
}

TEST(RandomSwap, Permutation) {
  const auto corpus = synth::pareto_corpus(3, 100, 5, 1.0, 1);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Rng rng(i);
    auto out = random_swap(corpus[i].tokens, 0.3, rng).tokens;
    auto in = corpus[i].tokens;
    std::sort(out.begin(), out.end());
    std::sort(in.begin(), in.end());
    EXPECT_EQ(out, in);
  }
}

TEST(EditCount, AtLeastOne) {
  EXPECT_EQ(edit_count(0.1, 3), 1u);
  EXPECT_EQ(edit_count(0.1, 25), 3u);
  EXPECT_EQ(edit_count(1.0, 4), 4u);
}

TEST(Thesaurus, Invariants) {
  EXPECT_FAULT(Thesaurus(Entries{{"save", {"save"}}}), ErrorKind::kConfig);
  EXPECT_FAULT(Thesaurus(Entries{{"save", {""}}}), ErrorKind::kConfig);
  EXPECT_FAULT(Thesaurus(Entries{{"save", {"Store"}}}), ErrorKind::kConfig);
  const auto parsed = parse_thesaurus("# comment\nsave: store, keep\n");
  ASSERT_NE(parsed.synonyms("save"), nullptr);
  EXPECT_EQ(parsed.synonyms("save")->size(), 2u);
}

TEST(Plan, Validation) {
  AugmentPlan plan;
  plan.factor = 0;
  EXPECT_ANY_THROW(plan.validate());
  plan = {};
  plan.edit_rate = 0.0;
  EXPECT_ANY_THROW(plan.validate());
  plan = {};
  plan.target_threshold = 0;
  EXPECT_ANY_THROW(plan.validate());
}

TrainingSet small_train() {
  TrainingSet train;
  for (int i = 0; i < 30; ++i) train.reports.push_back({"c" + std::to_string(i), {"save", "error", "robot"}, {"common"}});
  for (int i = 0; i < 3; ++i) train.reports.push_back({"r" + std::to_string(i), {"save", "file"}, {"common", "rare"}});
  return train;
}

TEST(AugmentSet, FullDoubles) {
  const auto train = small_train();
  AugmentPlan plan;
  const auto out = augment_training_set(train, plan, training_label_counts(train), Thesaurus::defaults());
  EXPECT_EQ(out.reports.size(), 2 * train.reports.size());
}

TEST(AugmentSet, TargetedRareLabel) {
  const auto train = small_train();
  AugmentPlan plan;
  plan.scope = AugmentScope::kTargeted;
  auto counts = training_label_counts(train);
  counts["rare"] = 7;
  const auto out = augment_training_set(train, plan, counts, Thesaurus::defaults());
  EXPECT_EQ(out.reports.size(), train.reports.size() + 3);
  EXPECT_EQ(out.source_examples, 3u);
}

TEST(AugmentSet, TargetedNothingRare) {
  TrainingSet train;
  for (int i = 0; i < 30; ++i) train.reports.push_back({std::to_string(i), {"save"}, {"common"}});
  AugmentPlan plan;
  plan.scope = AugmentScope::kTargeted;
  EXPECT_EQ(augment_training_set(train, plan, training_label_counts(train), Thesaurus::defaults()).reports.size(), 30u);
}

TEST(AugmentSet, CopiesKeepLabelsAndDeterministic) {
  TrainingSet train{synth::pareto_corpus(8, 120, 10, 1.1, 3)};
  for (auto technique : {AugmentTechnique::kSynonymReplacement, AugmentTechnique::kRandomSwap}) {
    AugmentPlan plan;
    plan.technique = technique;
    plan.factor = 2;
    const auto a = augment_training_set(train, plan, training_label_counts(train), Thesaurus::defaults());
    const auto b = augment_training_set(train, plan, training_label_counts(train), Thesaurus::defaults());
    ASSERT_EQ(a.reports.size(), 3 * train.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
      EXPECT_EQ(a.reports[i].tokens, b.reports[i].tokens);
      const auto& id = a.reports[i].report_id;
      const auto source = id.substr(0, id.find("#aug"));
      const auto it = std::find_if(train.reports.begin(), train.reports.end(),
                                   [&](const ProcessedReport& r) { return r.report_id == source; });
      ASSERT_NE(it, train.reports.end()) << id;
      EXPECT_EQ(a.reports[i].labels, it->labels);
    }
  }
}

TEST(Variants, FiveNamedWithSameLabelSpace) {
  TrainingSet train{synth::pareto_corpus(8, 120, 10, 1.1, 3)};
  const auto variants = make_training_variants(train, AugmentPlan{}, Thesaurus::defaults());
  ASSERT_EQ(variants.size(), 5u);
  std::set<std::string> names;
  for (const auto& v : variants) {
    names.insert(v.name);
    EXPECT_EQ(v.label_space, variants[0].label_space);
  }
  EXPECT_EQ(names, (std::set<std::string>{"original", "sr_full", "rs_full", "sr_targeted", "rs_targeted"}));
}

}  // namespace
}  // namespace faultloc
