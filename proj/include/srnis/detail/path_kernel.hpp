#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "srnis/importance.hpp"
#include "srnis/model.hpp"
#include "srnis/poisson.hpp"
#include "srnis/sampling.hpp"

namespace srnis::detail {

struct PathWorkspace {
  explicit PathWorkspace(const ReactionNetwork& net)
      : x(net.species_count()),
        next(net.species_count()),
        a(net.reaction_count()),
        delta(net.reaction_count()),
        counts(net.reaction_count()) {}

  State x;
  State next;
  std::vector<double> a;
  std::vector<double> delta;
  std::vector<Count> counts;
};

struct NoVisit {
  void operator()(int, std::span<const Count>, std::span<const double>, std::span<const double>,
                  std::span<const Count>) const {}
};

// Simulates one path from x0. The visitor sees (n, x_n, a(x_n), rates used,
// counts) before the state advances. The final state is left in ws.x and the
// accumulated log-likelihood is returned (0 for a null policy).
template <class Visitor>
double run_path(const ReactionNetwork& net, const TimeGrid& grid, const ControlPolicy* policy,
                RngStream& rng, PathWorkspace& ws, Visitor&& visit) {
  const State& x0 = net.initial_state();
  std::copy(x0.begin(), x0.end(), ws.x.begin());
  const std::size_t J = net.reaction_count();
  const double dt = grid.dt;
  double log_l = 0.0;
  for (int n = 0; n < grid.steps; ++n) {
    net.propensities(ws.x, ws.a);
    if (policy != nullptr) {
      policy->controls(n, ws.x, ws.a, ws.delta);
      admissible_controls(ws.a, ws.delta);
    }
    const std::vector<double>& rates = policy != nullptr ? ws.delta : ws.a;
    for (std::size_t j = 0; j < J; ++j) ws.counts[j] = poisson(rng, rates[j] * dt);
    if (policy != nullptr) log_l += step_log_likelihood(ws.a, ws.delta, ws.counts, dt);
    visit(n, std::span<const Count>(ws.x), std::span<const double>(ws.a), std::span<const double>(rates),
          std::span<const Count>(ws.counts));
    apply_jumps(net, ws.x, ws.counts, ws.next);
    std::swap(ws.x, ws.next);
  }
  return log_l;
}

// Runs one path and keeps every state and count.
PathSample record_path(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                       const ControlPolicy* policy, RngStream& rng);

// L g for a finished path; 0 when g vanishes even if L overflowed.
inline double weighted_value(double log_likelihood, double g) {
  if (g == 0.0) return 0.0;
  return std::exp(log_likelihood) * g;
}

}  // namespace srnis::detail
