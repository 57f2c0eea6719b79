#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srnis/model.hpp"

namespace srnis {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick invariant checks on one model, sized to run in seconds.
std::vector<CheckResult> validate_model(const Model& model, double dt, std::uint64_t seed);

}  // namespace srnis
