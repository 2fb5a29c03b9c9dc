#ifndef FRACOPT_ERRORS_HPP
#define FRACOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fracopt {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data violates a documented precondition or invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Config file could not be read as key = value text.
class ParseError : public ValidationError {
public:
  ParseError(const std::string& msg, int line)
      : ValidationError("parse error at line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_ = 0;
};

class UnsupportedDomain : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class UnsupportedDegree : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class InvalidOrder : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class InsufficientData : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// A solve failed numerically.
class NumericalError : public Error {
public:
  using Error::Error;
};

class NonConvergence : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NotPositiveDefinite : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class MaxIterations : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// Conformity closure did not settle within the sweep budget; indicates
// incompatible refinement-edge initialization.
class ClosureOverflow : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// Every indicator vanished; the adaptive loop has nothing left to refine.
class AllZeroIndicators : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace fracopt

#endif
