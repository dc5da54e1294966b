#pragma once

#include <stdexcept>
#include <string>

namespace alle {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a precondition (bad window, bad fraction, bad tag...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Input data does not satisfy its schema or the sampling protocol.
class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : DataError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class LabelMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class CompletenessError : public DataError {
 public:
  using DataError::DataError;
};

class StratificationError : public DataError {
 public:
  using DataError::DataError;
};

/// A numerical precondition on the data failed (singular design, dead feature).
class NumericalError : public DataError {
 public:
  using DataError::DataError;
};

class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StandardizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UndefinedVarianceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateBootstrapError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace alle
