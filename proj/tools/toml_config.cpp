#include "toml_config.hpp"

#include <cctype>
#include <charconv>

#include "actkit/detail/jsonl.hpp"
#include "actkit/errors.hpp"

namespace actkit::tools {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool valid_bare_key(std::string_view key) {
  if (key.empty()) return false;
  for (char ch : key)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
      return false;
  return true;
}

TomlValue parse_string_value(std::string_view raw, int line) {
  if (raw.size() < 2 || raw.back() != '"')
    throw DataError("unterminated string", line);
  std::string out;
  for (size_t i = 1; i + 1 < raw.size(); ++i) {
    char ch = raw[i];
    if (ch != '\\') {
      out += ch;
      continue;
    }
    if (i + 2 >= raw.size()) throw DataError("dangling escape in string", line);
    char esc = raw[++i];
    switch (esc) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      default:
        throw DataError(std::string("unsupported escape \\") + esc, line);
    }
  }
  TomlValue v;
  v.kind = TomlValue::Kind::String;
  v.str = std::move(out);
  return v;
}

TomlValue parse_scalar_value(std::string_view raw, int line) {
  if (raw == "true" || raw == "false") {
    TomlValue v;
    v.kind = TomlValue::Kind::Boolean;
    v.boolean = raw == "true";
    return v;
  }
  bool looks_float = raw.find('.') != std::string_view::npos ||
                     raw.find('e') != std::string_view::npos ||
                     raw.find('E') != std::string_view::npos;
  if (!looks_float) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec == std::errc() && ptr == raw.data() + raw.size()) {
      TomlValue v;
      v.kind = TomlValue::Kind::Integer;
      v.integer = value;
      return v;
    }
  }
  try {
    size_t used = 0;
    double value = std::stod(std::string(raw), &used);
    if (used == raw.size()) {
      TomlValue v;
      v.kind = TomlValue::Kind::Float;
      v.real = value;
      return v;
    }
  } catch (const std::exception&) {
  }
  throw DataError("cannot parse value \"" + std::string(raw) + "\"", line);
}

}  // namespace

std::optional<std::string> TomlTable::get_string(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  if (it->second.kind != TomlValue::Kind::String)
    throw DataError("config key \"" + key + "\" is not a string");
  return it->second.str;
}

std::optional<long long> TomlTable::get_int(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  if (it->second.kind != TomlValue::Kind::Integer)
    throw DataError("config key \"" + key + "\" is not an integer");
  return it->second.integer;
}

std::optional<double> TomlTable::get_double(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  if (it->second.kind == TomlValue::Kind::Integer)
    return static_cast<double>(it->second.integer);
  if (it->second.kind != TomlValue::Kind::Float)
    throw DataError("config key \"" + key + "\" is not a number");
  return it->second.real;
}

std::optional<bool> TomlTable::get_bool(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  if (it->second.kind != TomlValue::Kind::Boolean)
    throw DataError("config key \"" + key + "\" is not a boolean");
  return it->second.boolean;
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::string section;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (pos > text.size() + 1) break;

    // Strip comments outside strings.
    bool in_string = false;
    size_t cut = line.size();
    for (size_t i = 0; i < line.size(); ++i) {
      char ch = line[i];
      if (ch == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
      if (ch == '#' && !in_string) {
        cut = i;
        break;
      }
    }
    std::string_view body = strip(line.substr(0, cut));
    if (body.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    if (body.front() == '[') {
      if (body.back() != ']')
        throw DataError("unterminated section header", line_no);
      std::string_view name = strip(body.substr(1, body.size() - 2));
      if (!valid_bare_key(name))
        throw DataError("bad section name \"" + std::string(name) + "\"",
                        line_no);
      section = std::string(name);
    } else {
      size_t eq = body.find('=');
      if (eq == std::string_view::npos)
        throw DataError("expected key = value", line_no);
      std::string_view key = strip(body.substr(0, eq));
      std::string_view raw = strip(body.substr(eq + 1));
      if (!valid_bare_key(key))
        throw DataError("bad key \"" + std::string(key) + "\"", line_no);
      if (raw.empty()) throw DataError("missing value", line_no);
      TomlValue value = raw.front() == '"' ? parse_string_value(raw, line_no)
                                           : parse_scalar_value(raw, line_no);
      std::string full =
          section.empty() ? std::string(key) : section + "." + std::string(key);
      if (!table.values.emplace(full, std::move(value)).second)
        throw DataError("duplicate key \"" + full + "\"", line_no);
    }
    if (eol == text.size()) break;
  }
  return table;
}

TomlTable load_toml(const std::string& path) {
  return parse_toml(detail::read_file(path));
}

}  // namespace actkit::tools
