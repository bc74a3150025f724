#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "faultloc/rng.hpp"

namespace faultloc::synth {
namespace {

std::size_t draw_weighted(Rng& rng, const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

std::vector<double> power_weights(std::size_t labels, double alpha) {
  std::vector<double> w(labels);
  for (std::size_t j = 0; j < labels; ++j) w[j] = std::pow(static_cast<double>(j + 1), -alpha);
  return w;
}

// Label index sets per report: count from `shares`, labels by weight without
// replacement, then top up labels below `min_occurrence`.
std::vector<std::set<std::size_t>> assign_labels(Rng& rng, std::size_t n, const std::vector<double>& weights,
                                                 const std::vector<double>& shares, std::size_t min_occurrence) {
  std::vector<std::set<std::size_t>> out(n);
  std::vector<std::size_t> counts(weights.size(), 0);
  const std::size_t max_per_report = std::min(shares.size(), weights.size());
  for (auto& labels : out) {
    const std::size_t k = std::min(draw_weighted(rng, shares) + 1, max_per_report);
    auto w = weights;
    while (labels.size() < k) {
      const std::size_t j = draw_weighted(rng, w);
      labels.insert(j);
      w[j] = 0.0;
    }
    for (auto j : labels) ++counts[j];
  }
  for (std::size_t j = 0; j < weights.size(); ++j) {
    std::size_t guard = 0;
    while (counts[j] < min_occurrence && guard++ < 100 * n) {
      auto& labels = out[rng.uniform_index(n)];
      if (labels.size() >= max_per_report || labels.contains(j)) continue;
      labels.insert(j);
      ++counts[j];
    }
  }
  return out;
}

std::string noise_word(std::size_t i) { return "tok" + std::to_string(i); }

}  // namespace

std::string label_name(std::size_t j) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "L%03zu", j);
  return buf;
}

std::vector<ProcessedReport> pareto_corpus(std::uint64_t seed, std::size_t n, std::size_t labels, double alpha,
                                           std::size_t min_occurrence) {
  Rng rng(seed);
  const auto sets = assign_labels(rng, n, power_weights(labels, alpha), reference_label_count_shares(), min_occurrence);
  std::vector<ProcessedReport> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ProcessedReport r;
    r.report_id = "P" + std::to_string(i);
    for (std::size_t t = 0; t < 8; ++t) r.tokens.push_back(noise_word(rng.uniform_index(200)));
    for (auto j : sets[i]) r.labels.insert(label_name(j));
    out.push_back(std::move(r));
  }
  return out;
}

PlantedCorpus planted_corpus(const PlantedSpec& spec) {
  Rng rng(spec.seed);
  PlantedCorpus corpus;
  corpus.label_weight = spec.label_weights.empty() ? power_weights(spec.labels, spec.alpha) : spec.label_weights;
  const auto sets = assign_labels(rng, spec.reports, corpus.label_weight, spec.label_count_shares, spec.min_occurrence);

  corpus.reports.resize(spec.reports);
  for (std::size_t i = 0; i < spec.reports; ++i) {
    auto& r = corpus.reports[i];
    r.report_id = "R" + std::to_string(i);
    for (std::size_t t = 0; t < spec.noise_tokens; ++t) r.tokens.push_back(noise_word(rng.uniform_index(spec.noise_vocabulary)));
    for (auto j : sets[i]) r.labels.insert(label_name(j));
  }

  for (std::size_t j = 0; j < corpus.label_weight.size(); ++j) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "sig%03zu", j);
    corpus.keyword[label_name(j)] = buf;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < spec.reports; ++i) {
      if (sets[i].contains(j)) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    const auto quota = static_cast<std::size_t>(std::llround(spec.keyword_rate * static_cast<double>(members.size())));
    for (std::size_t m = 0; m < quota; ++m) {
      auto& tokens = corpus.reports[members[m]].tokens;
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(tokens.size() + 1)), buf);
    }
  }
  return corpus;
}

std::vector<std::size_t> oracle_ranking(const PlantedCorpus& corpus, const ProcessedReport& report) {
  const std::set<std::string> present(report.tokens.begin(), report.tokens.end());
  std::vector<std::size_t> order(corpus.label_weight.size());
  std::iota(order.begin(), order.end(), 0);
  auto signalled = [&](std::size_t j) { return present.contains(corpus.keyword.at(label_name(j))); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (signalled(a) != signalled(b)) return signalled(a);
    return corpus.label_weight[a] > corpus.label_weight[b];
  });
  return order;
}

std::string reports_csv(const std::vector<ProcessedReport>& reports) {
  std::string out = "Date,Bug ID,Bug Title,Prio.,Description,Paths\n";
  for (const auto& r : reports) {
    std::string title;
    std::string description;
    for (std::size_t t = 0; t < r.tokens.size(); ++t) {
      auto& dest = t < 4 ? title : description;
      if (!dest.empty()) dest += ' ';
      dest += r.tokens[t];
    }
    std::string paths;
    for (const auto& label : r.labels) {
      if (!paths.empty()) paths += ',';
      paths += "Root/" + label + "/File.cs";
    }
    out += "2024-01-01," + r.report_id + "," + title + ",2," + description + ",\"" + paths + "\"\n";
  }
  return out;
}

}  // namespace faultloc::synth
