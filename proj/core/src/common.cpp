#include <fstream>
#include <sstream>
#include <string>

#include "faultloc/csv.hpp"
#include "faultloc/error.hpp"
#include "faultloc/io.hpp"
#include "faultloc/rng.hpp"

namespace faultloc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema: return "schema_error";
    case ErrorKind::kParse: return "parse_error";
    case ErrorKind::kDuplicate: return "duplicate_error";
    case ErrorKind::kConfig: return "config_error";
    case ErrorKind::kPrecondition: return "precondition_error";
    case ErrorKind::kDimension: return "dimension_error";
    case ErrorKind::kVersion: return "version_error";
    case ErrorKind::kIo: return "io_error";
    case ErrorKind::kMissingArtifact: return "missing_artifact";
    case ErrorKind::kEmptyVocabulary: return "empty_vocabulary";
    case ErrorKind::kInvalidInput: return "invalid_input";
  }
  return "error";
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng Rng::substream(std::uint64_t seed,
                   std::initializer_list<std::uint64_t> keys) {
  std::uint64_t state = mix64(seed);
  for (std::uint64_t key : keys) state = mix64(state ^ mix64(key));
  return Rng(state);
}

std::size_t Rng::uniform_index(std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Rejection sampling on the largest multiple of `bound`.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % bound);
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

namespace csv {

std::vector<Row> parse(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Row> rows;
  Row current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool row_has_content = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    if (row_has_content || !current.fields.empty()) {
      end_field();
      rows.push_back(std::move(current));
    }
    current = Row{};
    field.clear();
    field_started = false;
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw Error(ErrorKind::kParse, "CSV line " + std::to_string(line) +
                                             ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        row_has_content = true;
        break;
      case ',':
        row_has_content = true;
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        current.line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
        row_has_content = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorKind::kParse, "CSV record starting at line " +
                                       std::to_string(current.line) +
                                       ": unterminated quoted field");
  }
  end_row();
  return rows;
}

std::string escape(std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view cell, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= cell.size()) {
    auto pos = cell.find(delimiter, start);
    if (pos == std::string_view::npos) pos = cell.size();
    std::string item = trim(cell.substr(start, pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = pos + 1;
  }
  return out;
}

}  // namespace csv
}  // namespace faultloc

namespace faultloc::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace faultloc::io
