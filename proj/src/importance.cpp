#include "srnis/importance.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "srnis/detail/path_kernel.hpp"
#include "srnis/ensemble.hpp"
#include "srnis/error.hpp"

namespace srnis {

void IdentityPolicy::controls(int, std::span<const Count>, std::span<const double> a,
                              std::span<double> delta) const {
  std::copy(a.begin(), a.end(), delta.begin());
}

void admissible_controls(std::span<const double> a, std::span<double> delta) {
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0) {
      delta[j] = 0.0;
      continue;
    }
    if (std::isnan(delta[j])) throw Error("control policy produced NaN for reaction " + std::to_string(j));
    delta[j] = std::clamp(delta[j], kControlFloor * a[j], kControlCeiling * a[j]);
  }
}

double step_log_likelihood(std::span<const double> a, std::span<const double> delta,
                           std::span<const Count> counts, double dt) {
  if (a.size() != delta.size() || a.size() != counts.size()) {
    throw Error("step_log_likelihood: dimension mismatch");
  }
  double rate_gap = 0.0;
  double log_ratio = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (delta[j] == 0.0) {
      if (counts[j] > 0) throw Error("step_log_likelihood: positive count on a channel with zero control");
      if (a[j] > 0.0) throw Error("step_log_likelihood: inadmissible control (zero rate where a_j > 0)");
      continue;
    }
    rate_gap += a[j] - delta[j];
    if (counts[j] > 0) {
      if (a[j] == 0.0) throw Error("step_log_likelihood: inadmissible control (positive rate where a_j = 0)");
      if (a[j] != delta[j]) log_ratio += static_cast<double>(counts[j]) * std::log(a[j] / delta[j]);
    }
  }
  return -rate_gap * dt + log_ratio;
}

PathSample simulate_is_path(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                            const ControlPolicy& policy, RngStream& rng) {
  return detail::record_path(net, grid, obs, &policy, rng);
}

double ISEstimate::standard_error() const {
  return samples > 0 ? std::sqrt(variance / static_cast<double>(samples))
                     : std::numeric_limits<double>::quiet_NaN();
}

ISEstimate is_mc_estimate(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                          const ControlPolicy* policy, std::size_t paths, std::uint64_t seed) {
  if (paths < 2) throw Error("is_mc_estimate needs at least two paths");
  const auto start = std::chrono::steady_clock::now();
  const EnsembleResult ens = sample_ensemble(net, grid, obs, policy, paths, seed);
  const auto stop = std::chrono::steady_clock::now();

  ISEstimate est;
  est.mean = ens.weighted.mean();
  est.variance = ens.weighted.variance();
  est.squared_cv = est.mean != 0.0 ? est.variance / (est.mean * est.mean)
                                   : std::numeric_limits<double>::quiet_NaN();
  est.kurtosis = ens.weighted.kurtosis();
  est.second_moment = ens.weighted.second_moment();
  est.samples = paths;
  est.dt = grid.dt;
  est.poisson_draws = ens.poisson_draws;
  est.runtime_seconds = std::chrono::duration<double>(stop - start).count();
  return est;
}

}  // namespace srnis
