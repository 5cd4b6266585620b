#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qld {

// Base for every error raised by the library. The CLI maps the three
// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters: bad config values, Nyquist violations, malformed rects.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Data that does not satisfy a contract: shape mismatches, out-of-order
// frames, unparseable containers, undefined metrics.
class DataError : public Error {
 public:
  using Error::Error;
};

// Container parse failure at a known byte offset.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : DataError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// CNR is undefined when the background has zero variance.
class DegenerateBackground : public DataError {
 public:
  DegenerateBackground()
      : DataError("degenerate background: zero variance, CNR undefined") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qld
