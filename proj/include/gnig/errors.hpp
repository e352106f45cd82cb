#pragma once

#include <stdexcept>
#include <string>

namespace gnig {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad command-line or API usage (wrong flag combinations, invalid arguments).
class UsageError : public Error {
public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

/// Malformed or unusable input data (files, vectors of the wrong shape,
/// rank-deficient designs).
class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(what) {}
};

/// A design matrix (or a submatrix selected by a model) is numerically
/// rank deficient.
class SingularDesignError : public DataError {
public:
  explicit SingularDesignError(const std::string& what) : DataError(what) {}
};

/// Numerical failure: out-of-domain special function argument, solver
/// bracketing failure, quadrature breakdown, improper posterior.
class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

} // namespace gnig
