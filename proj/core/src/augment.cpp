#include "faultloc/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "faultloc/csv.hpp"
#include "faultloc/error.hpp"
#include "faultloc/io.hpp"

namespace faultloc {
namespace {

bool is_token(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
  });
}

}  // namespace

Thesaurus::Thesaurus(std::map<std::string, std::vector<std::string>> entries)
    : entries_(std::move(entries)) {
  for (auto it = entries_.begin(); it != entries_.end();) {
    const auto& [token, synonyms] = *it;
    if (!is_token(token)) throw Error(ErrorKind::kConfig, "thesaurus key '" + token + "' is not a lowercase token");
    for (const auto& s : synonyms) {
      if (!is_token(s)) {
        throw Error(ErrorKind::kConfig, "thesaurus synonym '" + s + "' for '" + token +
                                            "' is not a lowercase token");
      }
      if (s == token) throw Error(ErrorKind::kConfig, "thesaurus entry '" + token + "' lists itself");
    }
    it = synonyms.empty() ? entries_.erase(it) : std::next(it);
  }
}

Thesaurus Thesaurus::defaults() {
  return Thesaurus({
      {"abort", {"cancel", "terminate"}},
      {"button", {"control"}},
      {"change", {"modify", "alter"}},
      {"check", {"verify", "validate"}},
      {"connection", {"link"}},
      {"crash", {"fail", "abort"}},
      {"create", {"add", "make"}},
      {"delete", {"remove", "erase"}},
      {"display", {"show", "render"}},
      {"error", {"fault", "failure", "bug"}},
      {"fail", {"crash", "break"}},
      {"fast", {"quick"}},
      {"file", {"document"}},
      {"fix", {"repair", "correct"}},
      {"freeze", {"hang", "stall"}},
      {"hang", {"freeze", "stall"}},
      {"incorrect", {"wrong", "invalid"}},
      {"issue", {"problem", "defect"}},
      {"load", {"read", "open"}},
      {"message", {"notification"}},
      {"missing", {"absent"}},
      {"problem", {"issue", "defect"}},
      {"program", {"routine", "module"}},
      {"remove", {"delete"}},
      {"robot", {"manipulator"}},
      {"run", {"execute"}},
      {"save", {"store", "write"}},
      {"show", {"display"}},
      {"slow", {"sluggish"}},
      {"start", {"launch", "begin"}},
      {"stop", {"halt", "terminate"}},
      {"update", {"refresh"}},
      {"user", {"operator"}},
      {"value", {"setting"}},
      {"warning", {"alert"}},
      {"window", {"dialog"}},
      {"wrong", {"incorrect"}},
  });
}

const std::vector<std::string>* Thesaurus::synonyms(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

Thesaurus parse_thesaurus(std::string_view text) {
  std::map<std::string, std::vector<std::string>> entries;
  std::size_t start = 0;
  std::size_t line_number = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = csv::trim(text.substr(start, end - start));
    start = end + 1;
    ++line_number;
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorKind::kConfig, "thesaurus line " + std::to_string(line_number) +
                                          ": expected 'token: syn1, syn2'");
    }
    auto& synonyms = entries[csv::trim(std::string_view(line).substr(0, colon))];
    for (auto& s : csv::split_list(std::string_view(line).substr(colon + 1), ',')) {
      if (std::find(synonyms.begin(), synonyms.end(), s) == synonyms.end()) synonyms.push_back(std::move(s));
    }
  }
  return Thesaurus(std::move(entries));
}

Thesaurus load_thesaurus(const std::filesystem::path& path) {
  return parse_thesaurus(io::read_file(path));
}

void AugmentPlan::validate() const {
  if (factor < 1) throw Error(ErrorKind::kConfig, "augmentation factor must be >= 1");
  if (!(edit_rate > 0.0 && edit_rate <= 1.0)) throw Error(ErrorKind::kConfig, "edit_rate must lie in (0,1]");
  if (target_threshold < 1) throw Error(ErrorKind::kConfig, "target threshold must be >= 1");
}

std::string_view to_string(AugmentTechnique technique) {
  return technique == AugmentTechnique::kSynonymReplacement ? "synonym_replacement" : "random_swap";
}

std::string_view to_string(AugmentScope scope) {
  return scope == AugmentScope::kFull ? "full" : "targeted";
}

AugmentTechnique parse_technique(std::string_view text) {
  if (text == "synonym_replacement" || text == "sr") return AugmentTechnique::kSynonymReplacement;
  if (text == "random_swap" || text == "rs") return AugmentTechnique::kRandomSwap;
  throw Error(ErrorKind::kConfig, "unknown augmentation technique '" + std::string(text) + "'");
}

AugmentScope parse_scope(std::string_view text) {
  if (text == "full") return AugmentScope::kFull;
  if (text == "targeted") return AugmentScope::kTargeted;
  throw Error(ErrorKind::kConfig, "unknown augmentation scope '" + std::string(text) + "'");
}

std::size_t edit_count(double edit_rate, std::size_t token_count) {
  // 1e-9 keeps 0.1 * 30 = 3.0000000000000004 from rounding up to 4.
  const double raw = std::ceil(edit_rate * static_cast<double>(token_count) - 1e-9);
  return std::max<std::size_t>(1, raw > 0 ? static_cast<std::size_t>(raw) : 0);
}

EditResult synonym_replace(const std::vector<std::string>& tokens, const Thesaurus& thesaurus,
                           double edit_rate, Rng& rng) {
  EditResult result{tokens, 0, false};
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (thesaurus.synonyms(tokens[i])) eligible.push_back(i);
  }
  if (eligible.empty()) {
    result.flagged = true;
    return result;
  }
  const std::size_t n = std::min(edit_count(edit_rate, tokens.size()), eligible.size());
  // Partial Fisher-Yates: the first n entries become a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.uniform_index(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
    const std::size_t pos = eligible[i];
    const auto& synonyms = *thesaurus.synonyms(tokens[pos]);
    result.tokens[pos] = synonyms[rng.uniform_index(synonyms.size())];
    ++result.edits;
  }
  return result;
}

EditResult random_swap(const std::vector<std::string>& tokens, double edit_rate, Rng& rng) {
  EditResult result{tokens, 0, false};
  if (tokens.size() < 2) {
    result.flagged = true;
    return result;
  }
  const std::size_t n = edit_count(edit_rate, tokens.size());
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t i = rng.uniform_index(tokens.size());
    std::size_t j = rng.uniform_index(tokens.size() - 1);
    if (j >= i) ++j;
    std::swap(result.tokens[i], result.tokens[j]);
    ++result.edits;
  }
  return result;
}

std::map<std::string, std::size_t> training_label_counts(const TrainingSet& train) {
  std::map<std::string, std::size_t> counts;
  for (const auto& report : train.reports) {
    for (const auto& label : report.labels) ++counts[label];
  }
  return counts;
}

AugmentedSet augment_training_set(const TrainingSet& train, const AugmentPlan& plan,
                                  const std::map<std::string, std::size_t>& label_counts,
                                  const Thesaurus& thesaurus) {
  plan.validate();
  AugmentedSet out;
  out.reports = train.reports;

  auto eligible = [&](const ProcessedReport& report) {
    if (plan.scope == AugmentScope::kFull) return true;
    return std::any_of(report.labels.begin(), report.labels.end(), [&](const std::string& label) {
      auto it = label_counts.find(label);
      const std::size_t count = it == label_counts.end() ? 0 : it->second;
      return count < plan.target_threshold;
    });
  };

  for (const auto& report : train.reports) {
    if (!eligible(report)) continue;
    ++out.source_examples;
    for (std::size_t copy = 1; copy <= plan.factor; ++copy) {
      Rng rng = Rng::substream(plan.seed, {hash_string(report.report_id), copy,
                                           static_cast<std::uint64_t>(plan.technique)});
      EditResult edited = plan.technique == AugmentTechnique::kSynonymReplacement
                              ? synonym_replace(report.tokens, thesaurus, plan.edit_rate, rng)
                              : random_swap(report.tokens, plan.edit_rate, rng);
      if (edited.flagged || edited.tokens == report.tokens) ++out.flagged_copies;
      out.reports.push_back(ProcessedReport{report.report_id + "#aug" + std::to_string(copy),
                                            std::move(edited.tokens), report.labels});
    }
  }
  return out;
}

std::string variant_name(AugmentTechnique technique, AugmentScope scope) {
  std::string name = technique == AugmentTechnique::kSynonymReplacement ? "sr" : "rs";
  name += scope == AugmentScope::kFull ? "_full" : "_targeted";
  return name;
}

std::vector<TrainingVariant> make_training_variants(const TrainingSet& train,
                                                    const AugmentPlan& base,
                                                    const Thesaurus& thesaurus) {
  const LabelSpace original_space = fit_label_space(train.reports);
  const auto counts = training_label_counts(train);

  std::vector<TrainingVariant> variants;
  variants.push_back({"original", train, original_space});
  for (auto scope : {AugmentScope::kFull, AugmentScope::kTargeted}) {
    for (auto technique : {AugmentTechnique::kSynonymReplacement, AugmentTechnique::kRandomSwap}) {
      AugmentPlan plan = base;
      plan.technique = technique;
      plan.scope = scope;
      auto augmented = augment_training_set(train, plan, counts, thesaurus);
      TrainingVariant variant{variant_name(technique, scope), TrainingSet{std::move(augmented.reports)}, {}};
      variant.label_space = fit_label_space(variant.train.reports);
      if (!(variant.label_space == original_space)) {
        throw Error(ErrorKind::kPrecondition, "label space of variant '" + variant.name +
                                                  "' differs from the original training labels");
      }
      variants.push_back(std::move(variant));
    }
  }
  return variants;
}

}  // namespace faultloc
