#pragma once

#include <cstdint>

#include "srnis/rng.hpp"

namespace srnis {

/// Poisson(rate) variate. Sequential-search inversion below rate 10,
/// Hormann's transformed rejection (PTRS) at and above it. rate == 0 returns
/// 0 without consuming a uniform. Throws on negative or non-finite rate.
std::int64_t poisson(RngStream& rng, double rate);

/// log(k!) without touching global state (std::lgamma writes signgam).
double log_factorial(std::int64_t k);

}  // namespace srnis
