#include "faultloc/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>

#include "faultloc/csv.hpp"
#include "faultloc/error.hpp"
#include "faultloc/io.hpp"

namespace faultloc::cli {
namespace {

bool valid_key(std::string_view key) {
  if (key.empty() || key.front() < 'a' || key.front() > 'z') return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, std::string_view expected) {
  throw Error(ErrorKind::kConfig, "setting '" + key + "' = '" + value + "' is not " + std::string(expected));
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a non-negative integer");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double out = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) bad_value(key, value, "a number");
  return out;
}

}  // namespace

std::string flag_for(std::string_view key) {
  std::string flag = "--";
  for (char c : key) flag += c == '_' ? '-' : c;
  return flag;
}

RunConfig RunConfig::parse(std::string_view text, std::string source) {
  RunConfig config;
  config.source_ = std::move(source);
  std::size_t start = 0;
  std::size_t line_number = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = csv::trim(text.substr(start, end - start));
    start = end + 1;
    ++line_number;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kConfig, "config line " + std::to_string(line_number) + ": expected 'key = value'");
    }
    const std::string key = csv::trim(std::string_view(line).substr(0, eq));
    if (!valid_key(key)) {
      throw Error(ErrorKind::kConfig, "config line " + std::to_string(line_number) + ": invalid key '" + key + "'");
    }
    if (config.values_.contains(key)) {
      throw Error(ErrorKind::kConfig, "config line " + std::to_string(line_number) + ": key '" + key +
                                          "' repeated");
    }
    config.values_[key] = csv::trim(std::string_view(line).substr(eq + 1));
    if (end == text.size()) break;
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return parse(io::read_file(path), path.string());
}

void RunConfig::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

void RunConfig::override_value(const std::string& key, std::string value) {
  overrides_.push_back({key, get(key), value});
  values_[key] = std::move(value);
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get_or(const std::string& key, std::string fallback) const {
  auto value = get(key);
  return value ? *value : std::move(fallback);
}

std::string RunConfig::require(const std::string& key) const {
  auto value = get(key);
  if (!value || value->empty()) {
    throw Error(ErrorKind::kConfig, "missing required setting '" + key + "' (pass " + flag_for(key) +
                                        " or set it in --config)");
  }
  return *value;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto value = get(key);
  return value ? parse_integer<std::uint64_t>(key, *value) : fallback;
}

std::size_t RunConfig::get_size(const std::string& key, std::size_t fallback) const {
  auto value = get(key);
  return value ? parse_integer<std::size_t>(key, *value) : fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto value = get(key);
  return value ? parse_double(key, *value) : fallback;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto value = get(key);
  if (!value) return fallback;
  if (*value == "true" || *value == "1" || *value == "yes") return true;
  if (*value == "false" || *value == "0" || *value == "no") return false;
  bad_value(key, *value, "a boolean");
}

std::vector<std::string> RunConfig::get_list(const std::string& key, std::vector<std::string> fallback) const {
  auto value = get(key);
  return value ? csv::split_list(*value, ',') : std::move(fallback);
}

std::vector<double> RunConfig::get_doubles(const std::string& key, std::vector<double> fallback) const {
  auto value = get(key);
  if (!value) return fallback;
  std::vector<double> out;
  for (const auto& item : csv::split_list(*value, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::size_t> RunConfig::get_sizes(const std::string& key, std::vector<std::size_t> fallback) const {
  auto value = get(key);
  if (!value) return fallback;
  std::vector<std::size_t> out;
  for (const auto& item : csv::split_list(*value, ',')) out.push_back(parse_integer<std::size_t>(key, item));
  return out;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  for (const auto& [key, value] : values_) values[key] = value;
  nlohmann::ordered_json overrides = nlohmann::ordered_json::array();
  for (const auto& o : overrides_) {
    overrides.push_back({{"key", o.key},
                         {"previous", o.previous ? nlohmann::ordered_json(*o.previous) : nlohmann::ordered_json(nullptr)},
                         {"value", o.value}});
  }
  return {{"source", source_.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(source_)},
          {"values", values},
          {"overrides", overrides}};
}

}  // namespace faultloc::cli
