#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "actkit/errors.hpp"

namespace actkit::detail {

struct JsonlRecord {
  std::string text;
  int line_number = 0;        // 1-based
  long long byte_offset = 0;  // offset of the record's first byte
};

/// Splits `content` into JSONL records, skipping whitespace-only lines.
/// With `require_terminator` every record must end in a newline; a final
/// record without one raises DataError at its byte offset (truncated file).
inline std::vector<JsonlRecord> split_jsonl(const std::string& content,
                                            bool require_terminator) {
  std::vector<JsonlRecord> records;
  size_t pos = 0;
  int line = 0;
  while (pos < content.size()) {
    ++line;
    size_t eol = content.find('\n', pos);
    bool terminated = eol != std::string::npos;
    size_t end = terminated ? eol : content.size();
    std::string_view body(content.data() + pos, end - pos);
    if (!body.empty() && body.back() == '\r') body.remove_suffix(1);

    bool blank = body.find_first_not_of(" \t") == std::string_view::npos;
    if (!blank) {
      if (!terminated && require_terminator)
        throw DataError("truncated record (missing newline)", line,
                        static_cast<long long>(pos));
      records.push_back(
          {std::string(body), line, static_cast<long long>(pos)});
    }
    pos = terminated ? eol + 1 : content.size();
  }
  return records;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("read failure on file: " + path);
  return std::move(buf).str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw DataError("write failure on file: " + path);
}

}  // namespace actkit::detail
