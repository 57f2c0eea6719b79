#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "srnis/importance.hpp"
#include "srnis/model.hpp"
#include "srnis/sampling.hpp"

namespace srnis {

struct TruncationSpec {
  double tail_tol = 1e-12;    // omitted Poisson mass per Bellman evaluation
  State bounds;               // per-species upper bound S_i of the box [0, S]
  std::size_t max_cells = 1'000'000;
  std::size_t max_terms = 10'000'000;  // cap on enumerated count vectors
};

/// Box [0, S_1] x ... x [0, S_d], row-major with the last species fastest.
class StateBox {
 public:
  explicit StateBox(State bounds);

  std::size_t cells() const { return cells_; }
  const State& bounds() const { return bounds_; }
  /// Index of x clamped into the box; sets `clamped` when x lay outside.
  std::size_t index(std::span<const Count> x, bool& clamped) const;
  State state(std::size_t index) const;

 private:
  State bounds_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 0;
};

/// Read-only view of one time slice u(n, .) over a box. Lookups outside
/// the box clamp to its boundary and bump `clamped`.
struct ValueSlice {
  const StateBox* box = nullptr;
  std::span<const double> values;
  std::uint64_t* clamped = nullptr;

  double operator()(std::span<const Count> x) const;
};

/// Value function u(n, x) and minimizing controls on a box.
struct ValueTable {
  TimeGrid grid;
  State bounds;
  std::size_t reactions = 0;
  std::vector<double> values;    // (steps + 1) x cells
  std::vector<double> controls;  // steps x cells x reactions

  std::size_t cells() const;
  std::span<const double> slice(int step) const;
  double value(int step, std::span<const Count> x) const;
  std::span<const double> control(int step, std::size_t cell) const;
};

struct DpSolution {
  ValueTable table;
  std::uint64_t clamped_lookups = 0;
};

/// Bracketed term of the exact Bellman relation for one given delta:
///   exp((-2 sum a_j + sum delta_j) dt) sum_p prod_j (dt delta_j)^p_j / p_j! (a_j / delta_j)^(2 p_j)
///     * u_next(max(0, x + nu p)),
/// evaluated as exp(dt sum (delta - 2a) + sum lambda) E[u_next] with
/// p_j ~ Poisson(lambda_j = a_j^2 dt / delta_j) and the sum truncated at
/// tail mass trunc.tail_tol. Throws for inadmissible delta.
double bellman_exact_step(const ReactionNetwork& net, const ValueSlice& u_next, std::span<const Count> x,
                          std::span<const double> delta, double dt, const TruncationSpec& trunc);

/// Backward sweep of the exact relation with the inner infimum solved by
/// coordinate descent (golden section in log delta, three sweeps),
/// started from the closed-form control.
DpSolution solve_exact_dp(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                          const TruncationSpec& trunc);

struct ApproxStep {
  double value = 0.0;
  std::vector<double> delta_bar;
};

/// First-order-in-dt Bellman step with its closed-form minimizer.
/// Throws when u_next(x) <= 0.
ApproxStep approx_bellman_step(const ReactionNetwork& net, const ValueSlice& u_next, std::span<const Count> x,
                               double dt);

/// delta = a sqrt(u_plus) / sqrt(u_here). Throws for u_here <= 0.
double closed_form_control(double a, double u_plus, double u_here);

/// Backward sweep of approx_bellman_step over the box.
DpSolution solve_approx_dp(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                           const State& bounds);

/// Exact second moment E[g^2 prod L_k^2 | X_n = x] of a fixed policy on the
/// box, by the same truncated sums as bellman_exact_step.
DpSolution policy_second_moment(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                                const ControlPolicy& policy, const TruncationSpec& trunc);

/// Replays the tabulated minimizers; states outside the box use the
/// nearest boundary cell.
class TabulatedPolicy final : public ControlPolicy {
 public:
  explicit TabulatedPolicy(ValueTable table);

  void controls(int step, std::span<const Count> x, std::span<const double> a,
                std::span<double> delta) const override;

  std::uint64_t clamped_lookups() const { return clamped_.load(std::memory_order_relaxed); }
  const ValueTable& table() const { return table_; }

 private:
  ValueTable table_;
  StateBox box_;
  mutable std::atomic<std::uint64_t> clamped_{0};
};

void write_value_table(std::ostream& out, const ValueTable& table);
ValueTable read_value_table(std::istream& in);

}  // namespace srnis
