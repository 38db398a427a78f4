#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isocal {

// Base for every error raised by the library. Anything that is not a
// ParseError is a computation or validation failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable input file. `line` is 1-based; 0 means the error
// is not tied to a particular line (e.g. the file could not be opened).
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(format(path, line, what)), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& path, std::size_t line,
                            const std::string& what) {
    std::string msg = path;
    if (line > 0) msg += ":" + std::to_string(line);
    return msg + ": " + what;
  }

  std::size_t line_;
};

}  // namespace isocal
