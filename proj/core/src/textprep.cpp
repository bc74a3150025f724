#include "faultloc/textprep.hpp"

#include <algorithm>

#include "faultloc/csv.hpp"
#include "faultloc/error.hpp"
#include "faultloc/io.hpp"

namespace faultloc {
namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_consonant(std::string_view word, std::size_t i) {
  switch (word[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return false;
    case 'y':
      return i == 0 || !is_consonant(word, i - 1);
    default:
      return true;
  }
}

bool has_vowel(std::string_view word) {
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (!is_consonant(word, i)) return true;
  }
  return false;
}

// Number of vowel-consonant sequences, [C](VC)^m[V].
int measure(std::string_view word) {
  int m = 0;
  bool previous_vowel = false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const bool vowel = !is_consonant(word, i);
    if (previous_vowel && !vowel) ++m;
    previous_vowel = vowel;
  }
  return m;
}

bool ends_cvc(std::string_view word) {
  const std::size_t n = word.size();
  if (n < 3) return false;
  if (!is_consonant(word, n - 3) || is_consonant(word, n - 2) || !is_consonant(word, n - 1)) {
    return false;
  }
  const char last = word[n - 1];
  return last != 'w' && last != 'x' && last != 'y';
}

// Stem clean-up after removing -ing / -ed.
std::string restore_stem(std::string stem) {
  if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz")) return stem + "e";
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && is_consonant(stem, n - 1)) {
    const char c = stem[n - 1];
    if (c != 'l' && c != 's' && c != 'z') stem.pop_back();
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
  return stem;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.push_back(csv::trim(std::string_view(text).substr(start, end - start)));
    start = end + 1;
  }
  return lines;
}

}  // namespace

TemplateStripper::TemplateStripper(std::vector<std::string> patterns)
    : sources_(std::move(patterns)) {
  compiled_.reserve(sources_.size());
  for (const auto& pattern : sources_) {
    if (pattern.empty()) throw Error(ErrorKind::kConfig, "empty template pattern");
    try {
      compiled_.emplace_back(pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw Error(ErrorKind::kConfig,
                  "invalid template pattern '" + pattern + "': " + e.what());
    }
  }
}

std::string TemplateStripper::strip(std::string_view text) const {
  std::string out(text);
  for (const auto& re : compiled_) out = std::regex_replace(out, re, "");
  return out;
}

std::string Lemmatizer::lemmatize(std::string_view token) const {
  if (auto it = exceptions_.find(std::string(token)); it != exceptions_.end()) return it->second;
  if (std::any_of(token.begin(), token.end(), is_digit)) return std::string(token);

  const std::size_t n = token.size();
  if (n > 4 && ends_with(token, "ies")) return std::string(token.substr(0, n - 3)) + "y";
  if (ends_with(token, "sses")) return std::string(token.substr(0, n - 2));
  if (n > 3 && ends_with(token, "es")) {
    const std::string_view stem = token.substr(0, n - 2);
    if (ends_with(stem, "x") || ends_with(stem, "z") || ends_with(stem, "ch") ||
        ends_with(stem, "sh")) {
      return std::string(stem);
    }
    return std::string(token.substr(0, n - 1));
  }
  if (ends_with(token, "ss") || ends_with(token, "us") || ends_with(token, "is")) {
    return std::string(token);
  }
  if (n > 3 && ends_with(token, "s")) return std::string(token.substr(0, n - 1));
  if (ends_with(token, "eed")) return std::string(token);
  if (ends_with(token, "ing") && has_vowel(token.substr(0, n - 3))) {
    return restore_stem(std::string(token.substr(0, n - 3)));
  }
  if (ends_with(token, "ed") && has_vowel(token.substr(0, n - 2))) {
    return restore_stem(std::string(token.substr(0, n - 2)));
  }
  return std::string(token);
}

const std::vector<std::string>& default_template_patterns() {
  static const std::vector<std::string> patterns = {
      "Detailed Description:",
      "Steps to Reproduce:",
      "Repro Steps:",
      "Expected Result:",
      "Actual Result:",
      "System Info:",
  };
  return patterns;
}

// English function-word list (the common NLTK corpus list).
const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're",
      "you've", "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he",
      "him", "his", "himself", "she", "she's", "her", "hers", "herself", "it", "it's",
      "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
      "who", "whom", "this", "that", "that'll", "these", "those", "am", "is", "are",
      "was", "were", "be", "been", "being", "have", "has", "had", "having", "do",
      "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because",
      "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
      "between", "into", "through", "during", "before", "after", "above", "below",
      "to", "from", "up", "down", "in", "out", "on", "off", "over", "under", "again",
      "further", "then", "once", "here", "there", "when", "where", "why", "how",
      "all", "any", "both", "each", "few", "more", "most", "other", "some", "such",
      "no", "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s",
      "t", "can", "will", "just", "don", "don't", "should", "should've", "now", "d",
      "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't",
      "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't",
      "haven", "haven't", "isn", "isn't", "ma", "mightn", "mightn't", "mustn",
      "mustn't", "needn", "needn't", "shan", "shan't", "shouldn", "shouldn't", "wasn",
      "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't",
  };
  return words;
}

const std::map<std::string, std::string>& default_lemma_exceptions() {
  static const std::map<std::string, std::string> exceptions = {
      {"analyses", "analysis"}, {"anything", "anything"}, {"broken", "break"},
      {"broke", "break"},       {"children", "child"},    {"data", "data"},
      {"everything", "everything"}, {"freezing", "freeze"}, {"froze", "freeze"},
      {"frozen", "freeze"},     {"indices", "index"},     {"matrices", "matrix"},
      {"nothing", "nothing"},   {"series", "series"},     {"setting", "setting"},
      {"settings", "setting"},  {"something", "something"}, {"species", "species"},
      {"string", "string"},     {"used", "use"},          {"using", "use"},
      {"warning", "warning"},   {"warnings", "warning"},  {"written", "write"},
      {"wrote", "write"},
  };
  return exceptions;
}

PreprocessConfig PreprocessConfig::defaults() {
  PreprocessConfig config;
  config.templates = TemplateStripper(default_template_patterns());
  config.stopwords.insert(default_stopwords().begin(), default_stopwords().end());
  config.lemmatizer = Lemmatizer(default_lemma_exceptions());
  return config;
}

std::vector<std::string> load_template_patterns(const std::filesystem::path& path) {
  std::vector<std::string> patterns;
  for (auto& line : read_lines(path)) {
    if (line.empty() || line.front() == '#') continue;
    patterns.push_back(std::move(line));
  }
  return patterns;
}

std::set<std::string, std::less<>> load_stopwords(const std::filesystem::path& path) {
  std::set<std::string, std::less<>> words;
  for (auto& line : read_lines(path)) {
    if (line.empty() || line.front() == '#') continue;
    std::transform(line.begin(), line.end(), line.begin(),
                   [](char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; });
    words.insert(std::move(line));
  }
  return words;
}

std::map<std::string, std::string> load_lemma_exceptions(const std::filesystem::path& path) {
  std::map<std::string, std::string> exceptions;
  const auto rows = csv::parse(io::read_file(path));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& fields = rows[r].fields;
    if (r == 0 && fields.size() == 2 && csv::trim(fields[0]) == "token" &&
        csv::trim(fields[1]) == "lemma") {
      continue;
    }
    if (fields.size() != 2) {
      throw Error(ErrorKind::kConfig, "lemma exception line " + std::to_string(rows[r].line) +
                                          ": expected 'token,lemma'");
    }
    exceptions[csv::trim(fields[0])] = csv::trim(fields[1]);
  }
  return exceptions;
}

nlohmann::json to_json(const PreprocessConfig& config) {
  return {{"templates", config.templates.patterns()},
          {"stopwords", std::vector<std::string>(config.stopwords.begin(), config.stopwords.end())},
          {"lemma_exceptions", config.lemmatizer.exceptions()},
          {"decamel", config.decamel_enabled}};
}

PreprocessConfig preprocess_config_from_json(const nlohmann::json& json) {
  PreprocessConfig config;
  try {
    config.templates = TemplateStripper(json.at("templates").get<std::vector<std::string>>());
    for (const auto& word : json.at("stopwords")) config.stopwords.insert(word.get<std::string>());
    config.lemmatizer =
        Lemmatizer(json.at("lemma_exceptions").get<std::map<std::string, std::string>>());
    config.decamel_enabled = json.value("decamel", true);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed preprocessing config: ") + e.what());
  }
  return config;
}

std::string strip_templates(std::string_view text, const TemplateStripper& templates) {
  return templates.strip(text);
}

std::string decamel(std::string_view text) {
  std::string out;
  out.reserve(text.size() + text.size() / 4);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (i > 0 && is_upper(c)) {
      const char prev = text[i - 1];
      const bool lower_to_upper = is_lower(prev) || is_digit(prev);
      const bool acronym_end =
          is_upper(prev) && i + 1 < text.size() && is_lower(text[i + 1]);
      if (lower_to_upper || acronym_end) out.push_back(' ');
    }
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> normalize(std::string_view text, const PreprocessConfig& config) {
  std::string folded;
  folded.reserve(text.size());
  for (char c : text) {
    if (is_upper(c)) {
      folded.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (is_lower(c) || is_digit(c) || is_space(c)) {
      folded.push_back(c);
    } else {
      folded.push_back(' ');
    }
  }

  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < folded.size()) {
    while (i < folded.size() && is_space(folded[i])) ++i;
    std::size_t j = i;
    while (j < folded.size() && !is_space(folded[j])) ++j;
    if (j > i) {
      const std::string_view word(folded.data() + i, j - i);
      if (!config.stopwords.contains(word)) {
        std::string lemma = config.lemmatizer.lemmatize(word);
        if (!lemma.empty() && !config.stopwords.contains(lemma)) tokens.push_back(std::move(lemma));
      }
    }
    i = j;
  }
  return tokens;
}

std::vector<std::string> preprocess_text(std::string_view text, const PreprocessConfig& config) {
  std::string stripped = strip_templates(text, config.templates);
  if (config.decamel_enabled) stripped = decamel(stripped);
  return normalize(stripped, config);
}

std::string ProcessedReport::processed_text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

namespace {

PreprocessOutcome preprocess_fields(const std::string& id, const std::string& title,
                                    const std::string& description, LabelSet labels,
                                    const PreprocessConfig& config) {
  PreprocessOutcome outcome;
  if (csv::trim(description).empty()) {
    outcome.removal = CleaningRecord{id, "empty description"};
    return outcome;
  }
  auto tokens = preprocess_text(title + " " + description, config);
  if (tokens.empty()) {
    outcome.removal = CleaningRecord{id, "no tokens after preprocessing"};
    return outcome;
  }
  outcome.report = ProcessedReport{id, std::move(tokens), std::move(labels)};
  return outcome;
}

}  // namespace

PreprocessOutcome preprocess_report(const LabeledExample& example, const PreprocessConfig& config) {
  if (example.labels.empty()) {
    return {std::nullopt, CleaningRecord{example.report_id, "no linked fix labels"}};
  }
  return preprocess_fields(example.report_id, example.title, example.description,
                           example.labels, config);
}

PreprocessOutcome preprocess_report(const BugReport& report, const PreprocessConfig& config) {
  if (report.paths.empty()) {
    return {std::nullopt, CleaningRecord{report.id, "no linked fix paths"}};
  }
  return preprocess_fields(report.id, report.title, report.description, {}, config);
}

PreprocessedCorpus preprocess_corpus(const std::vector<LabeledExample>& examples,
                                     const PreprocessConfig& config) {
  PreprocessedCorpus corpus;
  corpus.reports.reserve(examples.size());
  for (const auto& example : examples) {
    auto outcome = preprocess_report(example, config);
    if (outcome.report) {
      corpus.reports.push_back(std::move(*outcome.report));
    } else {
      corpus.removals.push_back(std::move(*outcome.removal));
    }
  }
  return corpus;
}

nlohmann::json to_json(const ProcessedReport& report) {
  return {{"id", report.report_id},
          {"processed_text", report.processed_text()},
          {"label_list", report.labels}};
}

std::string processed_jsonl(const std::vector<ProcessedReport>& reports, std::string_view variant) {
  std::string out;
  for (const auto& report : reports) {
    auto object = to_json(report);
    if (!variant.empty()) object["variant"] = std::string(variant);
    out += object.dump() + "\n";
  }
  return out;
}

std::vector<ProcessedReport> parse_processed_jsonl(std::string_view text) {
  std::vector<ProcessedReport> reports;
  std::size_t start = 0;
  std::size_t line_number = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = csv::trim(text.substr(start, end - start));
    start = end + 1;
    ++line_number;
    if (line.empty()) continue;
    try {
      const auto object = nlohmann::json::parse(line);
      ProcessedReport report;
      report.report_id = object.at("id").get<std::string>();
      const auto text_field = object.at("processed_text").get<std::string>();
      for (auto& token : csv::split_list(text_field, ' ')) report.tokens.push_back(std::move(token));
      for (const auto& label : object.at("label_list")) report.labels.insert(label.get<std::string>());
      reports.push_back(std::move(report));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kParse,
                  "processed corpus line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return reports;
}

std::vector<ProcessedReport> load_processed(const std::filesystem::path& path) {
  return parse_processed_jsonl(io::read_file(path));
}

}  // namespace faultloc
