#include "faultloc/cli/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

#include "faultloc/error.hpp"
#include "faultloc/io.hpp"

namespace faultloc::cli {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw Error(ErrorKind::kIo, "SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  char buffer[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buffer, sizeof buffer, "%02x", digest[i]);
    hex += buffer;
  }
  return hex;
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(io::read_file(path)); }

RunManifest::RunManifest(std::string command, const RunConfig& config)
    : command_(std::move(command)), config_(config.to_json()) {}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs_.push_back({{"path", path.generic_string()}, {"sha256", file_sha256(path)}});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.push_back({{"path", path.generic_string()}, {"sha256", file_sha256(path)}});
}

nlohmann::ordered_json RunManifest::to_json() const {
  return {{"tool_version", kToolVersion}, {"command", command_}, {"config", config_},
          {"inputs", inputs_},           {"outputs", outputs_}, {"details", details_}};
}

std::filesystem::path RunManifest::write(const std::filesystem::path& dir) const {
  const auto path = dir / ("manifest_" + command_ + ".json");
  io::write_file(path, to_json().dump(2) + "\n");
  return path;
}

}  // namespace faultloc::cli
