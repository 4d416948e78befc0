#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riskmap {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. `line` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& reason)
      : Error(source + (line ? ":" + std::to_string(line) : std::string{}) +
              ": " + reason),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Inputs that parse fine but contradict each other (e.g. a home antenna
/// missing from the registry).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace riskmap
