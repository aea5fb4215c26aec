#pragma once

#include <stdexcept>
#include <string>

namespace mlpalg {

// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape, dimension and precondition violations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Divergence, non-finite values and degenerate samplers.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlpalg
