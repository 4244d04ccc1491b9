#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eerec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: out-of-range values, unknown enum names, mode/fact mismatch.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Event appended out of sequence or back in time.
class OrderingError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// A response that arrived for a recommendation that can no longer take it.
class ConflictError : public Error {
 public:
  enum class Kind { WindowElapsed, AlreadyResolved, NotYetDue };

  ConflictError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Malformed file content; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace eerec
