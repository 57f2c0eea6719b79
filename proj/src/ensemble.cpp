#include "srnis/ensemble.hpp"

#include <algorithm>

#include "srnis/detail/path_kernel.hpp"
#include "srnis/detail/parallel.hpp"
#include "srnis/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace srnis {

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int workers) {
#ifdef _OPENMP
  omp_set_num_threads(std::max(1, workers));
#else
  (void)workers;
#endif
}

namespace {

EnsembleResult sample_serial(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                             const ControlPolicy* policy, std::size_t paths, std::uint64_t seed,
                             bool keep_values) {
  EnsembleResult out;
  if (keep_values) out.values.resize(paths);
  detail::PathWorkspace ws(net);
  for (std::size_t i = 0; i < paths; ++i) {
    RngStream rng(seed, i);
    const double log_l = detail::run_path(net, grid, policy, rng, ws, detail::NoVisit{});
    const double v = detail::weighted_value(log_l, obs(ws.x));
    out.weighted.add(v);
    if (keep_values) out.values[i] = v;
  }
  out.poisson_draws = static_cast<std::uint64_t>(paths) * grid.steps * net.reaction_count();
  return out;
}

EnsembleResult sample_parallel(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                               const ControlPolicy* policy, std::size_t paths, std::uint64_t seed,
                               bool keep_values, std::size_t chunk_size) {
  EnsembleResult out;
  if (keep_values) out.values.resize(paths);
  const std::size_t chunks = (paths + chunk_size - 1) / chunk_size;
  std::vector<MomentAccumulator> partial(chunks);
  const auto n_chunks = static_cast<std::ptrdiff_t>(chunks);

  detail::ExceptionSlot errors;
#pragma omp parallel
  {
    detail::PathWorkspace ws(net);
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < n_chunks; ++c) errors.run([&] {
      const std::size_t begin = static_cast<std::size_t>(c) * chunk_size;
      const std::size_t end = std::min(paths, begin + chunk_size);
      MomentAccumulator acc;
      for (std::size_t i = begin; i < end; ++i) {
        RngStream rng(seed, i);
        const double log_l = detail::run_path(net, grid, policy, rng, ws, detail::NoVisit{});
        const double v = detail::weighted_value(log_l, obs(ws.x));
        acc.add(v);
        if (keep_values) out.values[i] = v;
      }
      partial[static_cast<std::size_t>(c)] = acc;
    });
  }
  errors.rethrow();
  for (const auto& acc : partial) out.weighted.merge(acc);
  out.poisson_draws = static_cast<std::uint64_t>(paths) * grid.steps * net.reaction_count();
  return out;
}

}  // namespace

EnsembleResult sample_ensemble(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                               const ControlPolicy* policy, std::size_t paths, std::uint64_t seed,
                               const EnsembleOptions& options) {
  obs.check_dimension(net.species_count());
  if (options.chunk_size == 0) throw Error("chunk size must be positive");
  if (options.execution == Execution::serial_reference) {
    return sample_serial(net, grid, obs, policy, paths, seed, options.keep_values);
  }
  return sample_parallel(net, grid, obs, policy, paths, seed, options.keep_values, options.chunk_size);
}

}  // namespace srnis
