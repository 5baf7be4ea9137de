#pragma once

#include <stdexcept>
#include <string>

namespace segrex {

// Raised when input data is well formed but violates a domain precondition,
// e.g. an inadmissible boundary datum or a negative species coefficient.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a numerical procedure breaks down: linear solver failure,
// divergence, or two independent routes disagreeing beyond tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace segrex
