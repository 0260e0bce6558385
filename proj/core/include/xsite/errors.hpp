#pragma once

#include <stdexcept>
#include <string>

namespace xsite {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input rejected by a domain check. `field()` is a dotted path to the
/// offending value (e.g. "design.alpha") when one is known.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A (cluster, treatment) cell needed by an estimator has no observations.
class EmptyCellError : public Error {
 public:
  EmptyCellError(std::string cell, std::string bin = {})
      : Error(bin.empty() ? "empty cell " + cell
                          : "empty cell " + cell + " in bin " + bin),
        cell_(std::move(cell)),
        bin_(std::move(bin)) {}

  const std::string& cell() const noexcept { return cell_; }
  const std::string& bin() const noexcept { return bin_; }

 private:
  std::string cell_;
  std::string bin_;
};

class RegressionError : public Error {
 public:
  enum class Kind { NoContrast, Underdetermined, NonFinite, DimensionMismatch };

  RegressionError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Log file does not match the expected column layout.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Requested shared-user fraction cannot be produced from the available log.
class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& message, double attainable_max)
      : Error(message), attainable_max_(attainable_max) {}

  double attainable_max() const noexcept { return attainable_max_; }

 private:
  double attainable_max_;
};

}  // namespace xsite
