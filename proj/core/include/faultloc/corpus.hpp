#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace faultloc {

/// One resolved bug report as exported from the issue tracker.
/// `priority` is carried for bookkeeping only and never used as a feature.
struct BugReport {
  std::string id;
  std::string date;
  std::string title;
  std::string description;
  int priority = 0;
  std::vector<std::string> paths;
};

/// Curated file -> subfolder label table. Each file maps to exactly one label.
class PathMapping {
 public:
  PathMapping() = default;

  /// Throws kDuplicate on a repeated file key.
  void add(std::string file, std::string label);

  /// Exact key match first, then the longest key that is a whole-component
  /// suffix of `path` (so "SubX/File-A.cs" matches "Root/P/F/SubX/File-A.cs").
  std::optional<std::string> lookup(std::string_view path) const;

  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

using LabelSet = std::set<std::string>;

/// A report joined with its subfolder labels, before text preprocessing.
struct LabeledExample {
  std::string report_id;
  std::string title;
  std::string description;
  LabelSet labels;

  std::string text() const { return title + " " + description; }
};

struct CorpusStats {
  std::size_t report_count = 0;
  std::size_t label_count = 0;
  std::map<std::size_t, std::size_t> labels_per_report_histogram;
  std::optional<double> mean_labels_per_report;  // absent on an empty corpus
  /// Sorted by count descending, then label ascending.
  std::vector<std::pair<std::string, std::size_t>> label_frequency;
};

enum class ReportFormat { kCsv, kJsonl };

ReportFormat report_format_from_path(const std::filesystem::path& path);

std::vector<BugReport> load_reports(const std::filesystem::path& path, ReportFormat format);
std::vector<BugReport> parse_reports_csv(std::string_view text);
std::vector<BugReport> parse_reports_jsonl(std::string_view text);

PathMapping load_path_mapping(const std::filesystem::path& path);
PathMapping parse_path_mapping_csv(std::string_view text);

struct DeriveResult {
  std::vector<LabeledExample> examples;
  std::size_t mapped_paths = 0;
  std::size_t fallback_paths = 0;  // paths labeled by their parent directory
};

/// Parent directory of `path` with a trailing slash ("./" for bare file names).
std::string parent_directory_label(std::string_view path);

DeriveResult derive_labels(const std::vector<BugReport>& reports, const PathMapping& mapping);

struct FilterResult {
  std::vector<LabeledExample> examples;
  std::size_t removed_examples = 0;
  std::vector<std::string> removed_labels;  // only filled by filter_rare_labels
};

inline constexpr std::size_t kMaxLabelsPerReport = 5;
inline constexpr std::size_t kDefaultMinLabelOccurrence = 10;

/// Drops examples whose label set is larger than `max_labels`.
FilterResult filter_diffuse(std::vector<LabeledExample> examples,
                            std::size_t max_labels = kMaxLabelsPerReport);

/// Strips labels seen fewer than `min_occurrence` times (counted once over the
/// input) and drops examples left without labels. A single pass: stripping can
/// push other labels below the threshold, and those are kept.
FilterResult filter_rare_labels(std::vector<LabeledExample> examples,
                                std::size_t min_occurrence = kDefaultMinLabelOccurrence);

std::map<std::string, std::size_t> count_labels(const std::vector<LabeledExample>& examples);

CorpusStats corpus_stats(const std::vector<LabeledExample>& examples);

std::string label_frequency_csv(const CorpusStats& stats);
nlohmann::json stats_summary_json(const CorpusStats& stats);

/// Mean rendered with two decimals, e.g. "1.56"; "n/a" when absent.
std::string format_mean(const std::optional<double>& mean);

nlohmann::json to_json(const LabeledExample& example);
std::string labeled_examples_jsonl(const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> parse_labeled_examples_jsonl(std::string_view text);

}  // namespace faultloc
