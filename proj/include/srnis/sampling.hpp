#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "srnis/model.hpp"
#include "srnis/rng.hpp"

namespace srnis {

/// Uniform mesh t_n = n dt, n = 0..steps, with steps * dt == T.
struct TimeGrid {
  int steps = 1;
  double dt = 1.0;

  /// Throws unless `dt` divides `final_time` into an integer number of steps.
  static TimeGrid from_step_size(double final_time, double dt);
  static TimeGrid from_steps(double final_time, int steps);

  double final_time() const { return steps * dt; }
};

/// Full record of one (possibly importance-sampled) tau-leap path.
struct PathSample {
  std::size_t species = 0;
  std::size_t reactions = 0;
  std::vector<Count> states;   // (steps + 1) x species, row-major
  std::vector<Count> counts;   // steps x reactions, row-major
  double log_likelihood = 0.0;
  double g_value = 0.0;

  int steps() const { return static_cast<int>(counts.size() / (reactions ? reactions : 1)); }
  std::span<const Count> state(int n) const { return {states.data() + n * species, species}; }
  std::span<const Count> step_counts(int n) const { return {counts.data() + n * reactions, reactions}; }
  std::span<const Count> final_state() const { return state(steps()); }
};

/// next = max(0, x + sum_j counts_j nu_j), entry-wise.
void apply_jumps(const ReactionNetwork& net, std::span<const Count> x, std::span<const Count> counts,
                 std::span<Count> next);

struct StepDraw {
  State next;
  std::vector<Count> counts;
};

/// One explicit tau-leap step with counts_j ~ Poisson(a_j(x) dt).
StepDraw tau_leap_step(const ReactionNetwork& net, std::span<const Count> x, double dt, RngStream& rng);

PathSample simulate_tl_path(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                            RngStream& rng);

}  // namespace srnis
