#pragma once

// Seeded synthetic corpora for tests and acceptance runs.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "faultloc/textprep.hpp"

namespace faultloc::synth {

// Share of reports with 1..5 labels in the reference corpus (428/138/61/20/13 of 660).
inline const std::vector<double>& reference_label_count_shares() {
  static const std::vector<double> shares{428, 138, 61, 20, 13};
  return shares;
}

// Rank-frequency exponent of the 80/20 Pareto rule, log_4(5).
inline constexpr double kParetoShape = 1.160964047443681;

std::string label_name(std::size_t j);

/// Multi-label corpus with power-law label weights (j+1)^-alpha. Every label
/// is seeded into at least `min_occurrence` reports. Tokens are noise.
std::vector<ProcessedReport> pareto_corpus(std::uint64_t seed, std::size_t n, std::size_t labels, double alpha,
                                           std::size_t min_occurrence);

struct PlantedSpec {
  std::size_t reports = 600;
  std::size_t labels = 30;
  double keyword_rate = 0.8;
  double alpha = kParetoShape;
  std::vector<double> label_weights;  // replaces the power law when non-empty
  std::vector<double> label_count_shares = reference_label_count_shares();
  std::size_t noise_vocabulary = 300;
  std::size_t noise_tokens = 20;
  std::size_t min_occurrence = 3;
  std::uint64_t seed = 42;
};

struct PlantedCorpus {
  std::vector<ProcessedReport> reports;
  std::map<std::string, std::string> keyword;  // label -> keyword
  std::vector<double> label_weight;            // generative prior, by label index
};

/// Each label owns one keyword that appears in exactly round(rate * count)
/// of that label's reports (chosen at random); everything else is shared noise.
PlantedCorpus planted_corpus(const PlantedSpec& spec);

/// Bayes-optimal ranking under the generator: labels whose keyword occurs,
/// then the rest by prior weight. Indices refer to the sorted label names.
std::vector<std::size_t> oracle_ranking(const PlantedCorpus& corpus, const ProcessedReport& report);

/// Table-1-shaped CSV (Date,Bug ID,Bug Title,Prio.,Description,Paths) whose
/// paths live under Root/<label>/ so parent-directory labels recover `label`.
std::string reports_csv(const std::vector<ProcessedReport>& reports);

}  // namespace faultloc::synth
