#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace faultloc::io {

std::string read_file(const std::filesystem::path& path);

// Creates parent directories as needed.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace faultloc::io
