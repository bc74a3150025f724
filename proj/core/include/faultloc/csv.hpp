#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace faultloc::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC-4180 reader: quoted fields may contain commas, CRLF and doubled quotes.
// A leading UTF-8 byte-order mark is skipped. Blank lines are ignored.
std::vector<Row> parse(std::string_view text);

std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

std::string trim(std::string_view text);

std::vector<std::string> split_list(std::string_view cell, char delimiter);

}  // namespace faultloc::csv
