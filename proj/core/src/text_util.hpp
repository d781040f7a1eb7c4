#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "synthqa/error.hpp"

namespace synthqa::detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("short write to " + path.string());
}

// Splits LF-terminated text into lines. A single trailing LF is allowed;
// CR characters and blank interior lines are rejected.
inline std::vector<std::string_view> split_lines(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  std::size_t line_no = 1;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (line.find('\r') != std::string_view::npos) {
      throw ParseError(source, line_no, "CR line ending (LF required)");
    }
    if (line.empty()) throw ParseError(source, line_no, "blank line");
    lines.push_back(line);
    start = end + 1;
    ++line_no;
  }
  return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(sep, start);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

}  // namespace synthqa::detail
