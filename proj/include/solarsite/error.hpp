#pragma once

#include <stdexcept>
#include <string>

namespace solarsite {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, invalid configs, rejected judgments.
/// The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class GridFormatError : public ValidationError {
 public:
  GridFormatError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class AlignmentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace solarsite
