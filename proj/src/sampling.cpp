#include "srnis/sampling.hpp"

#include <cmath>

#include "srnis/detail/path_kernel.hpp"
#include "srnis/error.hpp"
#include "srnis/poisson.hpp"

namespace srnis {

TimeGrid TimeGrid::from_step_size(double final_time, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("step size must be positive");
  const double ratio = final_time / dt;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::fabs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw Error("step size does not divide the final time into an integer number of steps");
  }
  return from_steps(final_time, static_cast<int>(steps));
}

TimeGrid TimeGrid::from_steps(double final_time, int steps) {
  if (steps < 1) throw Error("time grid needs at least one step");
  if (!(final_time > 0.0)) throw Error("final time must be positive");
  return TimeGrid{steps, final_time / steps};
}

void apply_jumps(const ReactionNetwork& net, std::span<const Count> x, std::span<const Count> counts,
                 std::span<Count> next) {
  const std::size_t d = net.species_count();
  const std::size_t J = net.reaction_count();
  std::copy(x.begin(), x.end(), next.begin());
  for (std::size_t j = 0; j < J; ++j) {
    const Count c = counts[j];
    if (c == 0) continue;
    const auto nu = net.change(j);
    for (std::size_t i = 0; i < d; ++i) next[i] += c * nu[i];
  }
  for (std::size_t i = 0; i < d; ++i) next[i] = std::max<Count>(next[i], 0);
}

StepDraw tau_leap_step(const ReactionNetwork& net, std::span<const Count> x, double dt, RngStream& rng) {
  net.check_state(x);
  const std::vector<double> a = net.propensities(x);
  StepDraw out{State(x.size()), std::vector<Count>(a.size())};
  for (std::size_t j = 0; j < a.size(); ++j) out.counts[j] = poisson(rng, a[j] * dt);
  apply_jumps(net, x, out.counts, out.next);
  return out;
}

namespace detail {

PathSample record_path(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                       const ControlPolicy* policy, RngStream& rng) {
  obs.check_dimension(net.species_count());
  const std::size_t d = net.species_count();
  const std::size_t J = net.reaction_count();
  PathSample path;
  path.species = d;
  path.reactions = J;
  path.states.reserve((grid.steps + 1) * d);
  path.counts.reserve(grid.steps * J);
  PathWorkspace ws(net);
  path.log_likelihood = run_path(net, grid, policy, rng, ws,
                                 [&](int, std::span<const Count> x, std::span<const double>,
                                     std::span<const double>, std::span<const Count> counts) {
                                   path.states.insert(path.states.end(), x.begin(), x.end());
                                   path.counts.insert(path.counts.end(), counts.begin(), counts.end());
                                 });
  path.states.insert(path.states.end(), ws.x.begin(), ws.x.end());
  path.g_value = obs(ws.x);
  return path;
}

}  // namespace detail

PathSample simulate_tl_path(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                            RngStream& rng) {
  return detail::record_path(net, grid, obs, nullptr, rng);
}

}  // namespace srnis
