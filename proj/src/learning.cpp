#include "srnis/learning.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "srnis/detail/path_kernel.hpp"
#include "srnis/detail/parallel.hpp"
#include "srnis/error.hpp"

namespace srnis {

AdamOptimizer::AdamOptimizer(std::size_t dimension, double step_size, double beta1, double beta2,
                             double epsilon)
    : alpha_(step_size), beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(dimension, 0.0), v_(dimension, 0.0) {
  if (!(step_size > 0.0)) throw Error("Adam step size must be positive");
}

void AdamOptimizer::step(std::span<double> params, std::span<const double> gradient) {
  if (params.size() != m_.size() || gradient.size() != m_.size()) throw Error("Adam: dimension mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gradient[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gradient[i] * gradient[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= alpha_ * m_hat / (std::sqrt(v_hat) + epsilon_);
  }
}

namespace {

// Per-worker adapter that keeps the partials of the last controls() call.
class RecordingPolicy final : public ControlPolicy {
 public:
  RecordingPolicy(const AnsatzPolicy& inner, std::size_t reactions, std::size_t width)
      : inner_(inner), partials_(reactions * width), raw_(reactions) {}

  void controls(int step, std::span<const Count> x, std::span<const double> a,
                std::span<double> delta) const override {
    inner_.controls_with_partials(step, x, a, delta, partials_);
    std::copy(delta.begin(), delta.end(), raw_.begin());
  }

  const std::vector<double>& partials() const { return partials_; }
  const std::vector<double>& raw() const { return raw_; }

 private:
  const AnsatzPolicy& inner_;
  mutable std::vector<double> partials_;
  mutable std::vector<double> raw_;
};

struct ChunkGradient {
  MomentAccumulator weighted;
  std::vector<double> grad_sum;
};

void run_gradient_paths(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                        const AnsatzPolicy& policy, std::size_t begin, std::size_t end, std::uint64_t seed,
                        detail::PathWorkspace& ws, ChunkGradient& out) {
  const std::size_t J = net.reaction_count();
  const std::size_t width = net.species_count() + 1;
  RecordingPolicy rec(policy, J, width);
  std::vector<double> score(width);
  const double dt = grid.dt;
  for (std::size_t i = begin; i < end; ++i) {
    RngStream rng(seed, i);
    std::fill(score.begin(), score.end(), 0.0);
    const double log_l = detail::run_path(
        net, grid, &rec, rng, ws,
        [&](int, std::span<const Count>, std::span<const double>, std::span<const double> delta,
            std::span<const Count> counts) {
          const auto& partials = rec.partials();
          const auto& raw = rec.raw();
          for (std::size_t j = 0; j < J; ++j) {
            // Clamped or inactive channels do not move with beta.
            if (delta[j] == 0.0 || delta[j] != raw[j]) continue;
            const double w = dt - static_cast<double>(counts[j]) / delta[j];
            const double* row = partials.data() + j * width;
            for (std::size_t l = 0; l < width; ++l) score[l] += w * row[l];
          }
        });
    const double v = detail::weighted_value(log_l, obs(ws.x));
    out.weighted.add(v);
    if (v != 0.0) {
      const double r = v * v;
      for (std::size_t l = 0; l < width; ++l) out.grad_sum[l] += r * score[l];
    }
  }
}

}  // namespace

GradientSample estimate_gradient(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                                 const AnsatzParams& params, std::size_t paths, std::uint64_t seed,
                                 Execution execution) {
  if (paths < 2) throw Error("gradient estimate needs at least two paths");
  obs.check_dimension(net.species_count());
  const AnsatzPolicy policy(net, params, grid);
  const std::size_t width = net.species_count() + 1;

  GradientSample out;
  out.gradient.assign(width, 0.0);
  if (execution == Execution::serial_reference) {
    detail::PathWorkspace ws(net);
    ChunkGradient all{{}, std::vector<double>(width, 0.0)};
    run_gradient_paths(net, grid, obs, policy, 0, paths, seed, ws, all);
    out.weighted = all.weighted;
    out.gradient = all.grad_sum;
  } else {
    constexpr std::size_t chunk = 1024;
    const std::size_t chunks = (paths + chunk - 1) / chunk;
    std::vector<ChunkGradient> partial(chunks, ChunkGradient{{}, std::vector<double>(width, 0.0)});
    const auto n_chunks = static_cast<std::ptrdiff_t>(chunks);
    detail::ExceptionSlot errors;
#pragma omp parallel
    {
      detail::PathWorkspace ws(net);
#pragma omp for schedule(dynamic, 1)
      for (std::ptrdiff_t c = 0; c < n_chunks; ++c) errors.run([&] {
        const std::size_t begin = static_cast<std::size_t>(c) * chunk;
        run_gradient_paths(net, grid, obs, policy, begin, std::min(paths, begin + chunk), seed, ws,
                           partial[static_cast<std::size_t>(c)]);
      });
    }
    errors.rethrow();
    for (const auto& p : partial) {
      out.weighted.merge(p.weighted);
      for (std::size_t l = 0; l < width; ++l) out.gradient[l] += p.grad_sum[l];
    }
  }
  for (double& g : out.gradient) g /= static_cast<double>(paths);
  out.second_moment = out.weighted.second_moment();
  out.poisson_draws = static_cast<std::uint64_t>(paths) * grid.steps * net.reaction_count();
  return out;
}

std::vector<double> pathwise_gradient(const ReactionNetwork& net, const TimeGrid& grid,
                                      const Observable& obs, const AnsatzParams& params,
                                      std::size_t paths, std::uint64_t seed) {
  return estimate_gradient(net, grid, obs, params, paths, seed).gradient;
}

ObjectiveSample second_moment_objective(const ReactionNetwork& net, const TimeGrid& grid,
                                        const Observable& obs, const AnsatzParams& params,
                                        std::size_t paths, std::uint64_t seed) {
  if (paths < 2) throw Error("objective estimate needs at least two paths");
  const AnsatzPolicy policy(net, params, grid);
  EnsembleOptions opts;
  opts.keep_values = true;
  const EnsembleResult ens = sample_ensemble(net, grid, obs, &policy, paths, seed, opts);
  return {ens.weighted.second_moment(), ens.values};
}

namespace {

template <class Fn>
void for_each_frozen_step(const ReactionNetwork& net, const TimeGrid& grid, const AnsatzParams& params,
                          const PathSample& path, Fn&& fn) {
  if (path.species != net.species_count() || path.reactions != net.reaction_count() ||
      path.steps() != grid.steps) {
    throw Error("recorded path does not match the network and grid");
  }
  const AnsatzPolicy policy(net, params, grid);
  const std::size_t J = net.reaction_count();
  std::vector<double> a(J), delta(J), partials(J * (net.species_count() + 1));
  for (int n = 0; n < grid.steps; ++n) {
    const auto x = path.state(n);
    net.propensities(x, a);
    policy.controls_with_partials(n, x, a, delta, partials);
    fn(a, delta, path.step_counts(n), partials);
  }
}

}  // namespace

double frozen_path_log_likelihood(const ReactionNetwork& net, const TimeGrid& grid,
                                  const AnsatzParams& params, const PathSample& path) {
  double log_l = 0.0;
  for_each_frozen_step(net, grid, params, path,
                       [&](const std::vector<double>& a, std::vector<double>& delta,
                           std::span<const Count> counts, const std::vector<double>&) {
                         admissible_controls(a, delta);
                         log_l += step_log_likelihood(a, delta, counts, grid.dt);
                       });
  return log_l;
}

std::vector<double> frozen_path_score(const ReactionNetwork& net, const TimeGrid& grid,
                                      const AnsatzParams& params, const PathSample& path) {
  const std::size_t width = net.species_count() + 1;
  std::vector<double> score(width, 0.0);
  for_each_frozen_step(net, grid, params, path,
                       [&](const std::vector<double>&, const std::vector<double>& delta,
                           std::span<const Count> counts, const std::vector<double>& partials) {
                         for (std::size_t j = 0; j < delta.size(); ++j) {
                           if (delta[j] == 0.0) continue;
                           const double w = grid.dt - static_cast<double>(counts[j]) / delta[j];
                           for (std::size_t l = 0; l < width; ++l) score[l] += w * partials[j * width + l];
                         }
                       });
  return score;
}

std::uint64_t iteration_seed(std::uint64_t seed, int iteration) {
  return derive_seed(seed, static_cast<std::uint64_t>(iteration));
}

LearnResult adam_learn(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                       const AnsatzParams& init, const LearnConfig& config) {
  if (config.iterations < 1) throw Error("adam_learn needs at least one iteration");
  if (config.paths < 2) throw Error("adam_learn needs at least two paths per iteration");
  const auto start = std::chrono::steady_clock::now();

  LearnResult result;
  result.best = init;
  AnsatzParams current = init;
  std::vector<double> beta = current.learnable();
  AdamOptimizer adam(beta.size(), config.step_size);
  double best_cv = std::numeric_limits<double>::infinity();

  for (int k = 0; k < config.iterations; ++k) {
    current.set_learnable(beta);
    const GradientSample gs =
        estimate_gradient(net, grid, obs, current, config.paths, iteration_seed(config.seed, k));
    result.poisson_draws += gs.poisson_draws;

    LearningRecord rec;
    rec.iteration = k;
    rec.beta = beta;
    rec.mean = gs.weighted.mean();
    rec.squared_cv = rec.mean != 0.0 ? gs.weighted.variance() / (rec.mean * rec.mean)
                                     : std::numeric_limits<double>::quiet_NaN();
    rec.kurtosis = gs.weighted.kurtosis();
    rec.second_moment = gs.second_moment;
    double norm2 = 0.0;
    for (double g : gs.gradient) norm2 += g * g;
    rec.grad_norm = std::sqrt(norm2);
    rec.paths = config.paths;
    result.trace.push_back(rec);

    if (std::isfinite(rec.squared_cv) && rec.squared_cv < best_cv) {
      best_cv = rec.squared_cv;
      result.best = current;
      result.best_iteration = k;
    }
    if (!std::isfinite(rec.grad_norm)) {
      result.aborted = true;
      result.abort_reason = "non-finite gradient at iteration " + std::to_string(k);
      break;
    }
    adam.step(beta, gs.gradient);
  }
  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace srnis
