#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "faultloc/cli/config.hpp"

namespace faultloc::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Record of one command run: config snapshot, input and output digests and
/// command-specific details. No timestamps, so identical runs write identical
/// manifests.
class RunManifest {
 public:
  RunManifest(std::string command, const RunConfig& config);

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  nlohmann::ordered_json& details() { return details_; }

  nlohmann::ordered_json to_json() const;
  /// Writes <dir>/manifest_<command>.json and returns the path.
  std::filesystem::path write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  nlohmann::ordered_json config_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json details_ = nlohmann::ordered_json::object();
};

}  // namespace faultloc::cli
