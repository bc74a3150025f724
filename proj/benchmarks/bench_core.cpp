#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "faultloc/datasplit.hpp"
#include "faultloc/evalrank.hpp"
#include "faultloc/features.hpp"
#include "faultloc/models.hpp"
#include "synth.hpp"

namespace {

using namespace faultloc;

struct Fixture {
  std::vector<ProcessedReport> reports;
  TfidfModel tfidf;
  FeatureMatrix x;
  LabelSpace space;
  MultiHotMatrix y;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture f;
    f.reports = synth::planted_corpus(synth::PlantedSpec{}).reports;
    f.tfidf = fit_tfidf(f.reports, TfidfConfig{});
    f.x = f.tfidf.transform(f.reports);
    f.space = fit_label_space(f.reports);
    f.y = binarize_all(f.reports, f.space).rows;
    return f;
  }();
  return f;
}

void BM_TfidfFit(benchmark::State& state) {
  TfidfConfig config;
  config.ngram_hi = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_tfidf(fixture().reports, config));
}
BENCHMARK(BM_TfidfFit)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_TfidfTransform(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fixture().tfidf.transform(fixture().reports));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(fixture().reports.size()));
}
BENCHMARK(BM_TfidfTransform)->Unit(benchmark::kMillisecond);

void BM_TrainOvr(benchmark::State& state) {
  const auto kind = static_cast<ModelKind>(state.range(0));
  HyperParams hyper;
  hyper.forest.n_trees = 20;
  for (auto _ : state) benchmark::DoNotOptimize(train_ovr(kind, fixture().x, fixture().y, fixture().space, hyper));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_TrainOvr)
    ->Arg(static_cast<int>(ModelKind::kLogistic))
    ->Arg(static_cast<int>(ModelKind::kSvm))
    ->Arg(static_cast<int>(ModelKind::kRandomForest))
    ->Unit(benchmark::kMillisecond);

void BM_IterativeStratify(benchmark::State& state) {
  std::vector<LabelSet> labels;
  for (const auto& r : fixture().reports) labels.push_back(r.labels);
  for (auto _ : state) benchmark::DoNotOptimize(iterative_stratify(labels, {0.7, 0.2, 0.1}, 42));
}
BENCHMARK(BM_IterativeStratify)->Unit(benchmark::kMillisecond);

void BM_AggregateMetrics(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::vector<std::vector<std::size_t>> rankings;
  std::vector<std::vector<std::size_t>> truths;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::size_t> r(31);
    std::iota(r.begin(), r.end(), 0);
    std::shuffle(r.begin(), r.end(), gen);
    rankings.push_back(r);
    const std::size_t a = gen() % 31;
    truths.push_back({r[a], r[(a + 1 + gen() % 30) % 31]});
  }
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_metrics(rankings, truths));
}
BENCHMARK(BM_AggregateMetrics);

}  // namespace

BENCHMARK_MAIN();
