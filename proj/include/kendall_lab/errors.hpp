#pragma once

#include <stdexcept>
#include <string>

namespace kendall_lab {

// Bad sizes, bad parameters, malformed input files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Eigensolver non-convergence, singular factorization, exhausted tie retries.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kendall_lab
