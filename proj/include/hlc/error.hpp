#pragma once

#include <stdexcept>
#include <string>

namespace hlc {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A message or distribution violates its parameter constraints.
class InvalidMessage : public Error {
 public:
  using Error::Error;
};

// A function argument is outside its mathematical domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown (division by zero, non-finite moments, underflow).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace hlc
