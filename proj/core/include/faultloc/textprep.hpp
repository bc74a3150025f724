#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "faultloc/corpus.hpp"

namespace faultloc {

/// Template phrase remover. Each pattern is an ECMAScript regular expression;
/// plain phrases such as "Detailed Description:" work as-is.
class TemplateStripper {
 public:
  TemplateStripper() = default;
  /// Throws kConfig naming the offending pattern if any fails to compile.
  explicit TemplateStripper(std::vector<std::string> patterns);

  std::string strip(std::string_view text) const;
  const std::vector<std::string>& patterns() const { return sources_; }

 private:
  std::vector<std::string> sources_;
  std::vector<std::regex> compiled_;
};

/// Rule-based English lemmatizer: exception dictionary first, then ordered
/// suffix rules (ies, sses, es, s, ing, ed). Tokens containing digits pass
/// through unchanged.
class Lemmatizer {
 public:
  Lemmatizer() = default;
  explicit Lemmatizer(std::map<std::string, std::string> exceptions)
      : exceptions_(std::move(exceptions)) {}

  std::string lemmatize(std::string_view token) const;
  const std::map<std::string, std::string>& exceptions() const { return exceptions_; }

 private:
  std::map<std::string, std::string> exceptions_;
};

struct PreprocessConfig {
  TemplateStripper templates;
  std::set<std::string, std::less<>> stopwords;
  Lemmatizer lemmatizer;
  bool decamel_enabled = true;

  /// Embedded template phrases, stopwords and lemma exceptions.
  static PreprocessConfig defaults();
};

const std::vector<std::string>& default_template_patterns();
const std::vector<std::string>& default_stopwords();
const std::map<std::string, std::string>& default_lemma_exceptions();

/// One pattern per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> load_template_patterns(const std::filesystem::path& path);
/// One word per line, lowercased.
std::set<std::string, std::less<>> load_stopwords(const std::filesystem::path& path);
/// CSV `token,lemma`; an optional header row `token,lemma` is skipped.
std::map<std::string, std::string> load_lemma_exceptions(const std::filesystem::path& path);

nlohmann::json to_json(const PreprocessConfig& config);
PreprocessConfig preprocess_config_from_json(const nlohmann::json& json);

std::string strip_templates(std::string_view text, const TemplateStripper& templates);

/// Splits identifiers at lower/digit->upper boundaries and before the last
/// capital of an acronym run that precedes a capitalised word:
/// "parseHTMLDoc" -> "parse HTML Doc". Case is preserved.
std::string decamel(std::string_view text);

/// Lowercase, punctuation -> space, whitespace tokenisation, stopword removal,
/// lemmatisation. Any byte outside [A-Za-z0-9] and whitespace counts as
/// punctuation, so every token matches [a-z0-9]+. A lemma that is itself a
/// stopword is dropped as well.
std::vector<std::string> normalize(std::string_view text, const PreprocessConfig& config);

struct ProcessedReport {
  std::string report_id;
  std::vector<std::string> tokens;
  LabelSet labels;

  std::string processed_text() const;
};

struct CleaningRecord {
  std::string report_id;
  std::string reason;
};

struct PreprocessOutcome {
  std::optional<ProcessedReport> report;
  std::optional<CleaningRecord> removal;
};

/// tokens = normalize(decamel(strip_templates(title + " " + description))).
/// Reports with an empty description or no surviving tokens are rejected.
PreprocessOutcome preprocess_report(const LabeledExample& example, const PreprocessConfig& config);
PreprocessOutcome preprocess_report(const BugReport& report, const PreprocessConfig& config);

/// Tokens for free text (prediction path); no description requirement.
std::vector<std::string> preprocess_text(std::string_view text, const PreprocessConfig& config);

struct PreprocessedCorpus {
  std::vector<ProcessedReport> reports;
  std::vector<CleaningRecord> removals;
};

PreprocessedCorpus preprocess_corpus(const std::vector<LabeledExample>& examples,
                                     const PreprocessConfig& config);

/// `{id, processed_text, label_list}` per line; `variant` is added when given.
nlohmann::json to_json(const ProcessedReport& report);
std::string processed_jsonl(const std::vector<ProcessedReport>& reports,
                            std::string_view variant = {});
std::vector<ProcessedReport> parse_processed_jsonl(std::string_view text);
std::vector<ProcessedReport> load_processed(const std::filesystem::path& path);

}  // namespace faultloc
