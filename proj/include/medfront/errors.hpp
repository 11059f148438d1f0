#pragma once

#include <stdexcept>
#include <string>

namespace medfront {

// Unreadable or malformed input data (WAV, annotations, manifests, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failure during computation (NaN loss, non-finite values, ...).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace medfront
