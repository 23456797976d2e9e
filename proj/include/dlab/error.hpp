#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands live on different index windows.
class WindowMismatch : public Error {
 public:
  using Error::Error;
};

// A power of a shift would move mass across the truncation boundary.
class WindowGuardError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for this operator variant.
class UnsupportedOperator : public Error {
 public:
  using Error::Error;
};

}  // namespace dlab
