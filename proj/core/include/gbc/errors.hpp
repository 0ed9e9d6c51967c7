#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gbc {

// Two families: configuration/input errors (CLI exit code 2) and numeric
// failures (CLI exit code 3).

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidFoldCount : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class SchemaError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ParseError : public ConfigError {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : ConfigError("line " + std::to_string(row) + ", column " + std::to_string(column) +
                    ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class InvalidSpec : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnknownDgp : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NotPositiveDefinite : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonFiniteGradient : public NumericError {
 public:
  NonFiniteGradient(const std::string& what, std::vector<double> last_finite)
      : NumericError(what), last_finite_(std::move(last_finite)) {}

  // Parameters at the last step whose gradient was finite.
  const std::vector<double>& last_finite_iterate() const { return last_finite_; }

 private:
  std::vector<double> last_finite_;
};

class EmptyArm : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateTreatment : public NumericError {
 public:
  using NumericError::NumericError;
};

class FoldArmCollapse : public NumericError {
 public:
  FoldArmCollapse(std::size_t fold, const std::string& what)
      : NumericError(what), fold_(fold) {}
  std::size_t fold() const { return fold_; }

 private:
  std::size_t fold_;
};

class DegenerateVariance : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace gbc
