#pragma once

#include <stdexcept>
#include <string>

namespace bsmx {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (e.g. gain rows vs. data rows).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented precondition (lambda <= 0, rho > 1, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A gain block is identically zero; its step size is undefined.
class DegenerateBlockError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or stream.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace bsmx
