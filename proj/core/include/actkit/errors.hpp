#pragma once

#include <stdexcept>
#include <string>

namespace actkit {

/// Invalid argument or violated precondition on an in-memory value.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent external data (files, token streams, wire payloads).
/// Carries the source position when one is known: `line` is 1-based,
/// `byte_offset` is 0-based; -1 means "not applicable".
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg, long long line = -1,
                     long long byte_offset = -1)
      : std::runtime_error(msg), line_(line), byte_offset_(byte_offset) {}

  long long line() const noexcept { return line_; }
  long long byte_offset() const noexcept { return byte_offset_; }

 private:
  long long line_;
  long long byte_offset_;
};

/// Remote endpoint still failing after the configured retries.
class EndpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace actkit
