#pragma once

#include <stdexcept>
#include <string>

namespace neoscan {

// Malformed image file or model file.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// A solver failed to reach its stopping criterion.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace neoscan
