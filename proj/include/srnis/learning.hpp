#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srnis/ansatz.hpp"
#include "srnis/ensemble.hpp"
#include "srnis/model.hpp"
#include "srnis/sampling.hpp"
#include "srnis/stats.hpp"

namespace srnis {

/// Adam with bias-corrected moments, minimizing.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::size_t dimension, double step_size = 0.1, double beta1 = 0.9,
                         double beta2 = 0.999, double epsilon = 1e-8);

  void step(std::span<double> params, std::span<const double> gradient);

  std::size_t dimension() const { return m_.size(); }
  int iteration() const { return t_; }
  double step_size() const { return alpha_; }

 private:
  double alpha_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
};

/// Second moment E[g^2 prod L_k^2] under the ansatz-induced IS measure,
/// with the per-path weighted observables L_i g_i.
struct ObjectiveSample {
  double estimate = 0.0;
  std::vector<double> weighted;
};

ObjectiveSample second_moment_objective(const ReactionNetwork& net, const TimeGrid& grid,
                                        const Observable& obs, const AnsatzParams& params,
                                        std::size_t paths, std::uint64_t seed);

/// Moments of L g, the second-moment estimate and its pathwise gradient, all
/// from one set of IS paths.
struct GradientSample {
  MomentAccumulator weighted;
  double second_moment = 0.0;
  std::vector<double> gradient;
  std::uint64_t poisson_draws = 0;
};

GradientSample estimate_gradient(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                                 const AnsatzParams& params, std::size_t paths, std::uint64_t seed,
                                 Execution execution = Execution::parallel);

/// Mean over IS paths of  g^2 L^2 sum_k sum_j (dt - P_kj / delta_kj) d delta_kj / d beta_l.
std::vector<double> pathwise_gradient(const ReactionNetwork& net, const TimeGrid& grid,
                                      const Observable& obs, const AnsatzParams& params,
                                      std::size_t paths, std::uint64_t seed);

/// log L of a recorded path re-evaluated with the controls of `params`
/// (states and counts held fixed).
double frozen_path_log_likelihood(const ReactionNetwork& net, const TimeGrid& grid,
                                  const AnsatzParams& params, const PathSample& path);

/// sum_k sum_j (dt - P_kj / delta_kj) d delta_kj / d beta_l along a recorded path,
/// i.e. the gradient of frozen_path_log_likelihood in the learnable parameters.
std::vector<double> frozen_path_score(const ReactionNetwork& net, const TimeGrid& grid,
                                      const AnsatzParams& params, const PathSample& path);

struct LearningRecord {
  int iteration = 0;
  std::vector<double> beta;  // learnable vector the iteration sampled with
  double mean = 0.0;
  double squared_cv = 0.0;
  double kurtosis = 0.0;
  double second_moment = 0.0;
  double grad_norm = 0.0;
  std::size_t paths = 0;
};

struct LearnConfig {
  int iterations = 100;
  std::size_t paths = 10000;  // M0
  double step_size = 0.1;
  std::uint64_t seed = 1;
};

struct LearnResult {
  std::vector<LearningRecord> trace;
  AnsatzParams best;
  int best_iteration = -1;
  bool aborted = false;
  std::string abort_reason;
  std::uint64_t poisson_draws = 0;
  double runtime_seconds = 0.0;
};

/// Iteration k samples on sub-stream derive_seed(seed, k).
std::uint64_t iteration_seed(std::uint64_t seed, int iteration);

/// Adam on (beta_space, beta_time) from `init`. Returns the full trace and
/// the iterate with the smallest estimated squared coefficient of variation.
LearnResult adam_learn(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                       const AnsatzParams& init, const LearnConfig& config);

}  // namespace srnis
