#include "faultloc/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include "faultloc/csv.hpp"
#include "faultloc/error.hpp"
#include "faultloc/io.hpp"

namespace faultloc {
namespace {

std::string normalize_path(std::string_view path) {
  std::string out(csv::trim(path));
  std::replace(out.begin(), out.end(), '\\', '/');
  return out;
}

std::size_t require_column(const std::vector<std::string>& header,
                           std::initializer_list<std::string_view> names) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string cell = csv::trim(header[i]);
    for (auto name : names) {
      if (cell == name) return i;
    }
  }
  throw Error(ErrorKind::kSchema,
              "missing required column '" + std::string(*names.begin()) + "'");
}

int parse_priority(const std::string& cell, const std::string& where) {
  const std::string value = csv::trim(cell);
  if (value.empty()) return 0;
  std::size_t consumed = 0;
  int parsed = 0;
  try {
    parsed = std::stoi(value, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != value.size()) {
    throw Error(ErrorKind::kParse, where + ": priority '" + value + "' is not an integer");
  }
  return parsed;
}

void check_unique_ids(const std::vector<BugReport>& reports) {
  std::unordered_set<std::string> seen;
  std::vector<std::string> duplicates;
  for (const auto& report : reports) {
    if (!seen.insert(report.id).second) duplicates.push_back(report.id);
  }
  if (duplicates.empty()) return;
  std::string listed;
  for (const auto& id : duplicates) {
    if (!listed.empty()) listed += ", ";
    listed += id;
  }
  throw Error(ErrorKind::kDuplicate, "duplicate bug id(s): " + listed);
}

std::string json_scalar_to_string(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_null()) return {};
  return value.dump();
}

}  // namespace

void PathMapping::add(std::string file, std::string label) {
  file = normalize_path(file);
  label = normalize_path(label);
  if (!entries_.emplace(file, std::move(label)).second) {
    throw Error(ErrorKind::kDuplicate, "duplicate file key in path mapping: " + file);
  }
}

std::optional<std::string> PathMapping::lookup(std::string_view raw_path) const {
  const std::string path = normalize_path(raw_path);
  if (auto it = entries_.find(path); it != entries_.end()) return it->second;

  const std::string* best = nullptr;
  std::size_t best_length = 0;
  for (const auto& [key, label] : entries_) {
    if (key.size() >= path.size() || key.size() <= best_length) continue;
    if (path.compare(path.size() - key.size(), key.size(), key) != 0) continue;
    if (path[path.size() - key.size() - 1] != '/') continue;
    best = &label;
    best_length = key.size();
  }
  if (best) return *best;
  return std::nullopt;
}

ReportFormat report_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson") return ReportFormat::kJsonl;
  return ReportFormat::kCsv;
}

std::vector<BugReport> load_reports(const std::filesystem::path& path, ReportFormat format) {
  const std::string text = io::read_file(path);
  return format == ReportFormat::kCsv ? parse_reports_csv(text) : parse_reports_jsonl(text);
}

std::vector<BugReport> parse_reports_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(ErrorKind::kSchema, "report CSV has no header row");
  const auto& header = rows.front().fields;
  const std::size_t date_col = require_column(header, {"Date"});
  const std::size_t id_col = require_column(header, {"Bug ID"});
  const std::size_t title_col = require_column(header, {"Bug Title"});
  const std::size_t prio_col = require_column(header, {"Prio.", "Priority"});
  const std::size_t desc_col = require_column(header, {"Description"});
  const std::size_t paths_col = require_column(header, {"Paths"});

  std::vector<BugReport> reports;
  reports.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "row " + std::to_string(r) + " (line " + std::to_string(row.line) + ")";
    if (row.fields.size() != header.size()) {
      throw Error(ErrorKind::kParse, where + ": expected " + std::to_string(header.size()) +
                                         " fields, found " + std::to_string(row.fields.size()));
    }
    BugReport report;
    report.id = csv::trim(row.fields[id_col]);
    if (report.id.empty()) throw Error(ErrorKind::kParse, where + ": empty Bug ID");
    report.date = csv::trim(row.fields[date_col]);
    report.title = row.fields[title_col];
    report.description = row.fields[desc_col];
    report.priority = parse_priority(row.fields[prio_col], where);
    report.paths = csv::split_list(row.fields[paths_col], ',');
    reports.push_back(std::move(report));
  }
  check_unique_ids(reports);
  return reports;
}

std::vector<BugReport> parse_reports_jsonl(std::string_view text) {
  std::vector<BugReport> reports;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = csv::trim(text.substr(start, end - start));
    start = end + 1;
    ++line_number;
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_number);
    nlohmann::json object;
    try {
      object = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
    if (!object.is_object()) throw Error(ErrorKind::kParse, where + ": expected a JSON object");
    for (const char* key : {"date", "id", "title", "priority", "description", "paths"}) {
      if (!object.contains(key)) {
        throw Error(ErrorKind::kSchema, where + ": missing required key '" + key + "'");
      }
    }
    BugReport report;
    report.id = csv::trim(json_scalar_to_string(object["id"]));
    if (report.id.empty()) throw Error(ErrorKind::kParse, where + ": empty id");
    report.date = json_scalar_to_string(object["date"]);
    report.title = json_scalar_to_string(object["title"]);
    report.description = json_scalar_to_string(object["description"]);
    const auto& priority = object["priority"];
    if (priority.is_number_integer()) {
      report.priority = priority.get<int>();
    } else if (!priority.is_null()) {
      report.priority = parse_priority(json_scalar_to_string(priority), where);
    }
    const auto& paths = object["paths"];
    if (!paths.is_array()) throw Error(ErrorKind::kParse, where + ": 'paths' must be an array");
    for (const auto& p : paths) {
      if (!p.is_string()) throw Error(ErrorKind::kParse, where + ": 'paths' entries must be strings");
      std::string path = csv::trim(p.get<std::string>());
      if (!path.empty()) report.paths.push_back(std::move(path));
    }
    reports.push_back(std::move(report));
  }
  check_unique_ids(reports);
  return reports;
}

PathMapping load_path_mapping(const std::filesystem::path& path) {
  return parse_path_mapping_csv(io::read_file(path));
}

PathMapping parse_path_mapping_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(ErrorKind::kSchema, "path mapping CSV has no header row");
  const auto& header = rows.front().fields;
  const std::size_t file_col = require_column(header, {"File"});
  const std::size_t label_col = require_column(header, {"Label"});

  PathMapping mapping;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() <= std::max(file_col, label_col)) {
      throw Error(ErrorKind::kParse, "path mapping row " + std::to_string(r) + " (line " +
                                         std::to_string(row.line) + "): too few fields");
    }
    std::string file = csv::trim(row.fields[file_col]);
    std::string label = csv::trim(row.fields[label_col]);
    if (file.empty() || label.empty()) {
      throw Error(ErrorKind::kParse, "path mapping row " + std::to_string(r) + ": empty File or Label");
    }
    mapping.add(std::move(file), std::move(label));
  }
  return mapping;
}

std::string parent_directory_label(std::string_view raw_path) {
  const std::string path = normalize_path(raw_path);
  const auto slash = path.find_last_of('/');
  if (slash == std::string::npos) return "./";
  return path.substr(0, slash + 1);
}

DeriveResult derive_labels(const std::vector<BugReport>& reports, const PathMapping& mapping) {
  DeriveResult result;
  result.examples.reserve(reports.size());
  for (const auto& report : reports) {
    LabeledExample example{report.id, report.title, report.description, {}};
    for (const auto& path : report.paths) {
      if (auto label = mapping.lookup(path)) {
        example.labels.insert(*label);
        ++result.mapped_paths;
      } else {
        example.labels.insert(parent_directory_label(path));
        ++result.fallback_paths;
      }
    }
    result.examples.push_back(std::move(example));
  }
  return result;
}

FilterResult filter_diffuse(std::vector<LabeledExample> examples, std::size_t max_labels) {
  FilterResult result;
  result.examples.reserve(examples.size());
  for (auto& example : examples) {
    if (example.labels.size() > max_labels) {
      ++result.removed_examples;
    } else {
      result.examples.push_back(std::move(example));
    }
  }
  return result;
}

std::map<std::string, std::size_t> count_labels(const std::vector<LabeledExample>& examples) {
  std::map<std::string, std::size_t> counts;
  for (const auto& example : examples) {
    for (const auto& label : example.labels) ++counts[label];
  }
  return counts;
}

FilterResult filter_rare_labels(std::vector<LabeledExample> examples, std::size_t min_occurrence) {
  const auto counts = count_labels(examples);
  std::set<std::string> rare;
  for (const auto& [label, count] : counts) {
    if (count < min_occurrence) rare.insert(label);
  }

  FilterResult result;
  result.removed_labels.assign(rare.begin(), rare.end());
  result.examples.reserve(examples.size());
  for (auto& example : examples) {
    std::erase_if(example.labels, [&](const std::string& l) { return rare.contains(l); });
    if (example.labels.empty()) {
      ++result.removed_examples;
    } else {
      result.examples.push_back(std::move(example));
    }
  }
  return result;
}

CorpusStats corpus_stats(const std::vector<LabeledExample>& examples) {
  CorpusStats stats;
  stats.report_count = examples.size();
  std::size_t total_labels = 0;
  for (const auto& example : examples) {
    ++stats.labels_per_report_histogram[example.labels.size()];
    total_labels += example.labels.size();
  }
  const auto counts = count_labels(examples);
  stats.label_count = counts.size();
  stats.label_frequency.assign(counts.begin(), counts.end());
  std::stable_sort(stats.label_frequency.begin(), stats.label_frequency.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (stats.report_count > 0) {
    stats.mean_labels_per_report =
        static_cast<double>(total_labels) / static_cast<double>(stats.report_count);
  }
  return stats;
}

std::string label_frequency_csv(const CorpusStats& stats) {
  std::string out = "label,count\n";
  for (const auto& [label, count] : stats.label_frequency) {
    out += csv::escape(label) + "," + std::to_string(count) + "\n";
  }
  return out;
}

std::string format_mean(const std::optional<double>& mean) {
  if (!mean) return "n/a";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", *mean);
  return buffer;
}

nlohmann::json stats_summary_json(const CorpusStats& stats) {
  nlohmann::json histogram = nlohmann::json::object();
  for (const auto& [labels, reports] : stats.labels_per_report_histogram) {
    histogram[std::to_string(labels)] = reports;
  }
  nlohmann::json summary = {
      {"report_count", stats.report_count},
      {"label_count", stats.label_count},
      {"histogram", histogram},
  };
  summary["mean_labels"] = stats.mean_labels_per_report
                               ? nlohmann::json(*stats.mean_labels_per_report)
                               : nlohmann::json(nullptr);
  summary["mean_labels_display"] = format_mean(stats.mean_labels_per_report);
  return summary;
}

nlohmann::json to_json(const LabeledExample& example) {
  return {{"id", example.report_id},
          {"title", example.title},
          {"description", example.description},
          {"label_list", example.labels}};
}

std::string labeled_examples_jsonl(const std::vector<LabeledExample>& examples) {
  std::string out;
  for (const auto& example : examples) out += to_json(example).dump() + "\n";
  return out;
}

std::vector<LabeledExample> parse_labeled_examples_jsonl(std::string_view text) {
  std::vector<LabeledExample> examples;
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
      LabeledExample example;
      example.report_id = object.at("id").get<std::string>();
      example.title = object.value("title", "");
      example.description = object.value("description", "");
      for (const auto& label : object.at("label_list")) example.labels.insert(label.get<std::string>());
      examples.push_back(std::move(example));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kParse, "labeled corpus line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return examples;
}

}  // namespace faultloc
