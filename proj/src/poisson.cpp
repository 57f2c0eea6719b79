#include "srnis/poisson.hpp"

#include <array>
#include <cmath>

#include "srnis/error.hpp"

namespace srnis {

namespace {

constexpr int kTableSize = 256;

std::array<double, kTableSize> make_log_factorial_table() {
  std::array<double, kTableSize> t{};
  t[0] = 0.0;
  for (int k = 1; k < kTableSize; ++k) t[k] = t[k - 1] + std::log(static_cast<double>(k));
  return t;
}

const std::array<double, kTableSize> kLogFactorial = make_log_factorial_table();

constexpr double kInversionLimit = 10.0;

std::int64_t poisson_inversion(RngStream& rng, double rate) {
  const double u = rng.uniform();
  double p = std::exp(-rate);
  double cdf = p;
  std::int64_t k = 0;
  // The cap only matters when u lies in the last ~1e-16 of mass.
  while (u > cdf && k < 200) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

std::int64_t poisson_ptrs(RngStream& rng, double rate) {
  const double slam = std::sqrt(rate);
  const double loglam = std::log(rate);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + rate + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const auto k = static_cast<std::int64_t>(kf);
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -rate + kf * loglam - log_factorial(k)) {
      return k;
    }
  }
}

}  // namespace

double log_factorial(std::int64_t k) {
  if (k < 0) throw Error("log_factorial of a negative integer");
  if (k < kTableSize) return kLogFactorial[static_cast<std::size_t>(k)];
  // Stirling series; error below 1e-15 relative for k >= 256.
  const double x = static_cast<double>(k);
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return x * std::log(x) - x + 0.5 * std::log(2.0 * M_PI * x) +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

std::int64_t poisson(RngStream& rng, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw Error("poisson: rate must be finite and non-negative");
  if (rate == 0.0) return 0;
  if (rate < kInversionLimit) return poisson_inversion(rng, rate);
  return poisson_ptrs(rng, rate);
}

}  // namespace srnis
