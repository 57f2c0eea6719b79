#include "srnis/validate.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

#include "srnis/ansatz.hpp"
#include "srnis/ensemble.hpp"
#include "srnis/importance.hpp"
#include "srnis/learning.hpp"

namespace srnis {

namespace {

using Check = std::function<std::string()>;  // empty string on success

CheckResult run(const std::string& name, const Check& check) {
  try {
    std::string failure = check();
    return {name, failure.empty(), failure.empty() ? "ok" : failure};
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

State random_state(std::mt19937_64& gen, std::size_t d, Count hi) {
  std::uniform_int_distribution<Count> pick(0, hi);
  State x(d);
  for (auto& v : x) v = pick(gen);
  return x;
}

}  // namespace

std::vector<CheckResult> validate_model(const Model& model, double dt, std::uint64_t seed) {
  const ReactionNetwork& net = model.network;
  const Observable& obs = model.observable;
  const TimeGrid grid = TimeGrid::from_step_size(net.final_time(), dt);
  const std::size_t d = net.species_count();
  const std::size_t J = net.reaction_count();
  std::vector<CheckResult> out;

  out.push_back(run("stoichiometry equals produced minus consumed", [&]() -> std::string {
    for (std::size_t j = 0; j < J; ++j) {
      const auto& r = net.reactions()[j];
      for (std::size_t i = 0; i < d; ++i) {
        if (net.change(j)[i] != r.produced[i] - r.consumed[i]) return "mismatch in reaction " + std::to_string(j);
      }
    }
    return {};
  }));

  out.push_back(run("propensities non-negative, zero without reactants", [&]() -> std::string {
    std::mt19937_64 gen(seed);
    for (int trial = 0; trial < 2000; ++trial) {
      const State x = random_state(gen, d, trial % 2 ? 3 : 200);
      const auto a = net.propensities(x);
      for (std::size_t j = 0; j < J; ++j) {
        if (!(a[j] >= 0.0)) return "negative propensity";
        bool short_of = false;
        for (std::size_t i = 0; i < d; ++i) short_of |= x[i] < net.reactions()[j].consumed[i];
        if (short_of && a[j] != 0.0) return "channel fires without reactants";
      }
    }
    return {};
  }));

  out.push_back(run("identity policy reproduces tau-leap paths with log L = 0", [&]() -> std::string {
    const IdentityPolicy id;
    for (std::uint64_t p = 0; p < 500; ++p) {
      RngStream a(seed, p);
      RngStream b(seed, p);
      const PathSample tl = simulate_tl_path(net, grid, obs, a);
      const PathSample is = simulate_is_path(net, grid, obs, id, b);
      if (is.log_likelihood != 0.0) return "log L = " + std::to_string(is.log_likelihood);
      if (tl.states != is.states || tl.counts != is.counts) return "paths differ on stream " + std::to_string(p);
    }
    return {};
  }));

  const bool indicator = obs.kind() == Observable::Kind::indicator;
  out.push_back(run("parallel ensemble matches serial reference", [&]() -> std::string {
    std::unique_ptr<AnsatzPolicy> policy;
    if (indicator) policy = std::make_unique<AnsatzPolicy>(net, initial_ansatz(net, obs, 2.0), grid);
    const std::size_t M = 3000;
    EnsembleOptions serial{Execution::serial_reference, false, 2048};
    EnsembleOptions parallel{Execution::parallel, false, 256};
    const auto s = sample_ensemble(net, grid, obs, policy.get(), M, seed, serial);
    const auto p = sample_ensemble(net, grid, obs, policy.get(), M, seed, parallel);
    const double scale = std::max(std::fabs(s.weighted.mean()), 1e-300);
    if (std::fabs(s.weighted.mean() - p.weighted.mean()) > 1e-12 * scale) return "means differ";
    if (p.poisson_draws != static_cast<std::uint64_t>(M) * grid.steps * J) return "Poisson draw count";
    return {};
  }));

  if (indicator) {
    out.push_back(run("frozen-path score matches finite differences", [&]() -> std::string {
      std::mt19937_64 gen(seed + 1);
      std::normal_distribution<double> normal(0.0, 0.01);
      AnsatzParams p = initial_ansatz(net, obs, 2.0);
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> beta(p.learnable_size());
        for (auto& b : beta) b = normal(gen);
        p.set_learnable(beta);
        const AnsatzPolicy policy(net, p, grid);
        RngStream rng(seed, 1000 + trial);
        const PathSample path = simulate_is_path(net, grid, obs, policy, rng);
        const auto score = frozen_path_score(net, grid, p, path);
        for (std::size_t l = 0; l < beta.size(); ++l) {
          const double h = 1e-5;
          auto bp = beta;
          auto bm = beta;
          bp[l] += h;
          bm[l] -= h;
          AnsatzParams pp = p;
          AnsatzParams pm = p;
          pp.set_learnable(bp);
          pm.set_learnable(bm);
          const double fd = (frozen_path_log_likelihood(net, grid, pp, path) -
                             frozen_path_log_likelihood(net, grid, pm, path)) /
                            (2.0 * h);
          // double-precision differences of log L lose about 1e-10 absolute
          if (std::fabs(fd - score[l]) > 1e-4 * std::max(std::fabs(score[l]), std::fabs(fd)) + 1e-8) {
            std::ostringstream msg;
            msg << "parameter " << l << ": score " << score[l] << " vs fd " << fd;
            return msg.str();
          }
        }
      }
      return {};
    }));
  }
  return out;
}

}  // namespace srnis
