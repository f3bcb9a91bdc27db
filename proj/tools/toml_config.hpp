#pragma once

#include <map>
#include <optional>
#include <string>

namespace actkit::tools {

/// Minimal TOML subset for run configs: [section] tables one level deep,
/// `key = value` with basic strings, integers, floats, and booleans, and #
/// comments. Arrays, dates, and nested tables are rejected.
struct TomlValue {
  enum class Kind { String, Integer, Float, Boolean };
  Kind kind = Kind::String;
  std::string str;
  long long integer = 0;
  double real = 0.0;
  bool boolean = false;
};

class TomlTable {
 public:
  /// Keys are dotted: "section.key" (or bare "key" before any section).
  std::map<std::string, TomlValue> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;  // accepts ints
  std::optional<bool> get_bool(const std::string& key) const;
};

/// Throws DataError with a line number on syntax errors or type misuse.
TomlTable parse_toml(const std::string& text);
TomlTable load_toml(const std::string& path);

}  // namespace actkit::tools
