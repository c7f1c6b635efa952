#pragma once

#include <stdexcept>
#include <string>

namespace hessiansys {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operands carry incompatible (n, N) dimensions.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Malformed serialized input (JSON, CSV, config).
class FormatError : public Error {
public:
  using Error::Error;
};

/// An iterative method stopped without meeting its tolerance.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// The assembled discrete operator could not be factored.
class SingularSystemError : public Error {
public:
  using Error::Error;
};

/// The fixed-point map stopped contracting; carries the median observed ratio.
class NonContractionError : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace hessiansys
