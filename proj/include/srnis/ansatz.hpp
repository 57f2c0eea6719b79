#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "srnis/importance.hpp"
#include "srnis/model.hpp"
#include "srnis/sampling.hpp"

namespace srnis {

/// Parameters of the sigmoid value-function ansatz
///
///   u(t, x) = 1 / (1 + exp(-(1 - t) (<beta_space, x> + beta_time) - b0 - beta0 x_i)),
///
/// with t in [0, 1] the time scaled by T and i the target species of the
/// threshold observable. Only beta_space and beta_time are learned; b0 and
/// beta0 come from fitting the terminal condition.
struct AnsatzParams {
  std::vector<double> beta_space;
  double beta_time = 0.0;
  double b0 = 0.0;
  double beta0 = 0.0;
  std::size_t target_species = 0;
  double gamma = 0.0;

  /// Dimension d + 1 of the learnable vector (beta_space..., beta_time).
  std::size_t learnable_size() const { return beta_space.size() + 1; }
  std::vector<double> learnable() const;
  void set_learnable(std::span<const double> values);
};

struct FinalConditionFit {
  double b0 = 0.0;
  double beta0 = 0.0;
};

/// beta0 = slope, b0 = -slope (gamma + 1/2): inflection midway between
/// gamma and gamma + 1 on the integer lattice. Throws for slope <= 0.
FinalConditionFit fit_final_condition(double gamma, double slope);

/// Zero learnable parameters with (b0, beta0) fitted to 1{x_i > gamma}.
/// Throws unless `obs` is an indicator observable.
AnsatzParams initial_ansatz(const ReactionNetwork& net, const Observable& obs, double slope);

double sigmoid_argument(double t, std::span<const Count> x, const AnsatzParams& p);
double u_hat(double t, std::span<const Count> x, const AnsatzParams& p);
/// log u_hat, finite for any finite argument.
double log_u_hat(double t, std::span<const Count> x, const AnsatzParams& p);

/// d u_hat / d beta_l for l over (beta_space..., beta_time).
std::vector<double> u_hat_partials(double t, std::span<const Count> x, const AnsatzParams& p);

/// Scaled time (n + 1) dt / T at which step n reads the ansatz.
double ansatz_time(const TimeGrid& grid, int step);

/// delta_j = a_j sqrt(u(t, max(0, x + nu_j)) / u(t, x)), t = (n + 1) dt / T.
std::vector<double> control_from_ansatz(const ReactionNetwork& net, const AnsatzParams& p,
                                        const TimeGrid& grid, int step, std::span<const Count> x);

/// J x (d + 1) row-major matrix of d delta_j / d beta_l. Rows of channels
/// with a_j(x) = 0 are zero.
std::vector<double> control_partials(const ReactionNetwork& net, const AnsatzParams& p,
                                     const TimeGrid& grid, int step, std::span<const Count> x);

/// Controls derived from an ansatz on a fixed grid.
class AnsatzPolicy final : public ControlPolicy {
 public:
  AnsatzPolicy(const ReactionNetwork& net, AnsatzParams params, const TimeGrid& grid);

  void controls(int step, std::span<const Count> x, std::span<const double> a,
                std::span<double> delta) const override;

  /// Same controls plus their parameter partials (J x (d + 1), row-major)
  /// in one pass over the ansatz evaluations.
  void controls_with_partials(int step, std::span<const Count> x, std::span<const double> a,
                              std::span<double> delta, std::span<double> partials) const;

  const AnsatzParams& params() const { return params_; }

 private:
  const ReactionNetwork* net_;
  AnsatzParams params_;
  TimeGrid grid_;
};

}  // namespace srnis
