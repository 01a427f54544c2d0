#pragma once

#include <stdexcept>
#include <string>

namespace esreg {

// Problems with input data content (files, CSV cells, empty datasets).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure during estimation (non-finite objective, degenerate
// kernel denominators, ...).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace esreg
