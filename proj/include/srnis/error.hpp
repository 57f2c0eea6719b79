#pragma once

#include <stdexcept>
#include <string>

namespace srnis {

// Thrown for violated preconditions on user-facing inputs (dimensions,
// ranges, malformed files). Internal invariants use assert.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace srnis
