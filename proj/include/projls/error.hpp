#pragma once

#include <stdexcept>
#include <string>

namespace projls {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky pivot was non-positive. The Gram matrix is rank deficient;
/// add ridge regularization or more labeled rows.
class NotPositiveDefinite : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class LabelCardinality : public Error {
public:
  using Error::Error;
};

class AllMissing : public Error {
public:
  using Error::Error;
};

class InsufficientRows : public Error {
public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
public:
  using Error::Error;
};

class DegenerateDenominator : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// Caller violated a documented precondition (dimension mismatch, empty input).
class PreconditionError : public Error {
public:
  using Error::Error;
};

} // namespace projls
