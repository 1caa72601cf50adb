#pragma once

#include <stdexcept>
#include <string>

namespace eipr {

/// Tensor or image dimensions do not line up with what an operation expects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity with a vanishing denominator (zero-norm signal, all-zero measurements).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// File could not be read, written, or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eipr
