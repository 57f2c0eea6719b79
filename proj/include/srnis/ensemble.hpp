#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "srnis/importance.hpp"
#include "srnis/model.hpp"
#include "srnis/sampling.hpp"
#include "srnis/stats.hpp"

namespace srnis {

enum class Execution {
  // Plain loop over paths with one running accumulator; kept as the
  // reference the parallel kernel is tested against.
  serial_reference,
  // OpenMP over fixed-size chunks of paths, chunks merged in index order.
  // Results do not depend on the thread count.
  parallel,
};

struct EnsembleOptions {
  Execution execution = Execution::parallel;
  bool keep_values = false;
  std::size_t chunk_size = 2048;
};

struct EnsembleResult {
  MomentAccumulator weighted;  // moments of L_i g_i
  std::uint64_t poisson_draws = 0;
  std::vector<double> values;  // L_i g_i, only when keep_values
};

/// Simulates paths 0..M-1, path i on stream (seed, i), and accumulates the
/// weighted observable. A null policy simulates plain tau-leap paths.
EnsembleResult sample_ensemble(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                               const ControlPolicy* policy, std::size_t paths, std::uint64_t seed,
                               const EnsembleOptions& options = {});

/// Number of OpenMP workers the parallel kernel will use (1 without OpenMP).
int worker_count();
/// Sets the worker count for subsequent parallel kernels; no-op without OpenMP.
void set_worker_count(int workers);

}  // namespace srnis
