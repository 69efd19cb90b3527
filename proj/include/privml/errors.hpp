#pragma once

#include <stdexcept>
#include <string>

namespace privml {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Shape or index disagreement between containers that must conform.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Constructor-time invariant violation (hyperparameter ranges, label coding, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, const std::string& path, long line)
      : Error(path + ":" + std::to_string(line) + ": " + msg),
        path_(path),
        line_(line) {}
  explicit ParseError(const std::string& msg) : Error(msg), line_(0) {}

  const std::string& path() const { return path_; }
  long line() const { return line_; }

private:
  std::string path_;
  long line_ = 0;
};

// Primal constraint violation beyond tolerance; carries the worst violation seen.
class InfeasibleError : public Error {
public:
  InfeasibleError(const std::string& msg, double worst)
      : Error(msg + " (worst violation " + std::to_string(worst) + ")"),
        worst_(worst) {}

  double worst_violation() const { return worst_; }

private:
  double worst_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace privml
