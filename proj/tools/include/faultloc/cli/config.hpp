#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace faultloc::cli {

/// Run settings from a `key = value` file plus command-line overrides.
///
/// Grammar: one `key = value` per line; keys match [a-z][a-z0-9_]*; values run
/// to the end of the line and are trimmed; blank lines and lines whose first
/// non-blank character is '#' are ignored. A repeated key is an error.
class RunConfig {
 public:
  struct Override {
    std::string key;
    std::optional<std::string> previous;
    std::string value;
  };

  static RunConfig parse(std::string_view text, std::string source = {});
  static RunConfig load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  /// Flag value; replaces any file value and is recorded.
  void override_value(const std::string& key, std::string value);

  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, std::string fallback) const;
  /// Throws kConfig naming the key and its flag.
  std::string require(const std::string& key) const;

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key, std::vector<std::string> fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::size_t> get_sizes(const std::string& key, std::vector<std::size_t> fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::vector<Override>& overrides() const { return overrides_; }

  /// {source, values, overrides}
  nlohmann::ordered_json to_json() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<Override> overrides_;
  std::string source_;
};

/// "--lemma-exceptions" style flag for a config key.
std::string flag_for(std::string_view key);

}  // namespace faultloc::cli
