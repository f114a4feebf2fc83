#pragma once

#include <stdexcept>
#include <string>

namespace tgrowth {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant (bad parameter, bad config entry).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Filesystem or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Mass reached the periodic box edge, so the truncated domain no longer
/// represents the whole-space problem.
class SupportViolation : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity appeared in the evolving state.
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

}  // namespace tgrowth
