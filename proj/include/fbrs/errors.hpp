#pragma once

#include <stdexcept>
#include <string>

namespace fbrs {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem data is non-finite, dimensionally inconsistent, or has q = 0.
class InvalidProblem : public Error {
 public:
  using Error::Error;
};

/// A solver parameter is outside its admissible range.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// An MPC description violates its invariants.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// Malformed QP text. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

/// Row/entry count disagrees with the declared dimensions.
class DimensionMismatch : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace fbrs
