#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "srnis/model.hpp"
#include "srnis/rng.hpp"
#include "srnis/sampling.hpp"

namespace srnis {

/// Per-step Poisson rates used in place of the propensities.
///
/// Implementations must be immutable and safe to share between threads.
/// They receive a = a(x) already evaluated and write delta (length J).
/// The simulator projects the result onto the admissible set afterwards,
/// see admissible_controls().
class ControlPolicy {
 public:
  virtual ~ControlPolicy() = default;
  virtual void controls(int step, std::span<const Count> x, std::span<const double> a,
                        std::span<double> delta) const = 0;
};

/// delta = a; the plain tau-leap measure.
class IdentityPolicy final : public ControlPolicy {
 public:
  void controls(int, std::span<const Count>, std::span<const double> a,
                std::span<double> delta) const override;
};

inline constexpr double kControlFloor = 1e-12;
inline constexpr double kControlCeiling = 1e12;

/// Clamps delta_j to [1e-12 a_j, 1e12 a_j] where a_j > 0 and forces
/// delta_j = 0 where a_j = 0. Throws on NaN controls.
void admissible_controls(std::span<const double> a, std::span<double> delta);

/// log of the stepwise likelihood ratio
///   -sum_j (a_j - delta_j) dt + sum_j counts_j log(a_j / delta_j),
/// with the convention a_j / delta_j = 1 when both vanish.
double step_log_likelihood(std::span<const double> a, std::span<const double> delta,
                           std::span<const Count> counts, double dt);

/// Importance-sampled path: counts_j ~ Poisson(delta_j dt), states advance
/// with the original stoichiometry and projection, log_likelihood sums the
/// stepwise terms.
PathSample simulate_is_path(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                            const ControlPolicy& policy, RngStream& rng);

struct ISEstimate {
  double mean = 0.0;
  double variance = 0.0;     // unbiased sample variance of L g
  double squared_cv = 0.0;   // variance / mean^2, NaN when mean == 0
  double kurtosis = 0.0;     // biased standardized fourth moment
  double second_moment = 0.0;
  std::uint64_t samples = 0;
  double dt = 0.0;
  std::uint64_t poisson_draws = 0;
  double runtime_seconds = 0.0;

  double standard_error() const;
};

/// Monte Carlo estimate of E[L g(X_N)] over M paths, path i using stream
/// (seed, i). A null policy means plain tau-leap (L == 1).
ISEstimate is_mc_estimate(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                          const ControlPolicy* policy, std::size_t paths, std::uint64_t seed);

}  // namespace srnis
