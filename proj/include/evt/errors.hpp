#pragma once

#include <stdexcept>
#include <string>

namespace evt {

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Fewer than six usable residuals; the 6-DoF normal equations are rank
/// deficient by construction.
class InsufficientConstraintsError : public std::runtime_error {
 public:
  explicit InsufficientConstraintsError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite cost or solution during optimization.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A frame could not be tracked with any available representation.
class TrackingError : public std::runtime_error {
 public:
  explicit TrackingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace evt
