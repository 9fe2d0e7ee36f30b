#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace subrct {

// Base class for all library errors. The `code` is a stable machine-readable
// tag; `what()` carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Bad user input: malformed config keys, unknown columns, invalid enum names.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message) : Error("config", message) {}
};

// Malformed data file. Carries 1-based row/column location when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, long row = -1, long col = -1)
      : Error("parse", locate(message, row, col)), row_(row), col_(col) {}
  long row() const { return row_; }
  long col() const { return col_; }

 private:
  static std::string locate(const std::string& m, long r, long c) {
    std::string s = m;
    if (r >= 0) s += " (row " + std::to_string(r) + ")";
    if (c >= 0) s += " (column " + std::to_string(c) + ")";
    return s;
  }
  long row_ = -1;
  long col_ = -1;
};

// Precondition violations in the numeric layer (bad law parameters, empty
// cells reaching an estimator, nonpositive degrees of freedom).
class DomainError : public Error {
 public:
  DomainError(const std::string& message) : Error("domain", message) {}
};

// Estimation cannot proceed on this data (empty or singleton cells, rank
// deficiency, non-estimable requests).
class EstimationError : public Error {
 public:
  EstimationError(const std::string& message) : Error("estimation", message) {}
  EstimationError(std::string code, const std::string& message)
      : Error(std::move(code), message) {}
};

class SingularDesignError : public EstimationError {
 public:
  SingularDesignError(const std::string& message, std::vector<std::string> columns)
      : EstimationError("singular_design", message), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

}  // namespace subrct
