#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rss {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input data or arguments: invariant violations, bad parameters.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed file content. Carries the 1-based line number when known.
class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::size_t line)
      : DataError(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Non-convergence, infeasibility, degenerate estimates.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Raised when an estimate exists but its variance or likelihood is degenerate,
// e.g. a sample proportion of exactly 0 or 1, or jackknife pseudo-values that
// are all identical. The estimate is still reported.
class DegenerateError : public NumericalError {
 public:
  DegenerateError(const std::string& what, double estimate)
      : NumericalError(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

}  // namespace rss
