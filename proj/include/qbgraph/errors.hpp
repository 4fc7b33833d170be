#pragma once

#include <stdexcept>
#include <string>

namespace qbg {

// Violated precondition on user-supplied data (bad vertex, size, parameter).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Eigensolver failure or a model that cannot be normalised.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Request outside the sizes an exhaustive routine supports.
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qbg
