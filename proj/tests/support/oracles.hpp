#pragma once

// Reference computations for the test suites. Everything here is written
// directly from the model definitions in long double and shares no code
// path with the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "srnis/ansatz.hpp"
#include "srnis/model.hpp"
#include "srnis/sampling.hpp"

namespace oracle {

using real = long double;

inline real log_fact(std::int64_t k) { return std::lgamma(static_cast<real>(k) + 1.0L); }

inline real poisson_pmf(std::int64_t k, real lambda) {
  if (lambda == 0.0L) return k == 0 ? 1.0L : 0.0L;
  return std::exp(static_cast<real>(k) * std::log(lambda) - lambda - log_fact(k));
}

/// P(Binomial(n, p) > k)
inline real binomial_upper_tail(int n, real p, int k) {
  real total = 0.0L;
  for (int i = k + 1; i <= n; ++i) {
    total += std::exp(log_fact(n) - log_fact(i) - log_fact(n - i) + i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return total;
}

/// Mass-action rates by explicit products.
inline std::vector<real> rates(const srnis::ReactionNetwork& net, const std::vector<std::int64_t>& x) {
  std::vector<real> a;
  for (const auto& r : net.reactions()) {
    real v = r.rate;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int m = 0; m < r.consumed[i]; ++m) v *= static_cast<real>(x[i] - m);
      if (x[i] < r.consumed[i]) v = 0.0L;
    }
    a.push_back(v);
  }
  return a;
}

/// Distribution of X_N for a single-species, single-reaction network under
/// plain tau-leap with projection at zero, by forward propagation.
inline std::map<std::int64_t, real> tau_leap_law_1d(const srnis::ReactionNetwork& net, int steps, real dt) {
  const int nu = net.change(0)[0];
  std::map<std::int64_t, real> law{{net.initial_state()[0], 1.0L}};
  for (int n = 0; n < steps; ++n) {
    std::map<std::int64_t, real> next;
    for (const auto& [x, px] : law) {
      const real lambda = rates(net, {x})[0] * dt;
      if (lambda == 0.0L) {
        next[x] += px;
        continue;
      }
      real remaining = 1.0L;
      for (std::int64_t p = 0;; ++p) {
        const std::int64_t y = std::max<std::int64_t>(0, x + nu * p);
        const real w = poisson_pmf(p, lambda);
        next[y] += px * w;
        remaining -= w;
        if (y == 0 && nu < 0) {  // everything beyond lands on 0 as well
          next[0] += px * std::max(remaining, 0.0L);
          break;
        }
        if (static_cast<real>(p) > lambda + 40.0L * std::sqrt(lambda + 1.0L) + 40.0L) break;
      }
    }
    law = std::move(next);
  }
  return law;
}

inline real sigmoid_arg(real t, const std::vector<std::int64_t>& x, const srnis::AnsatzParams& p) {
  real lin = p.beta_time;
  for (std::size_t i = 0; i < x.size(); ++i) lin += static_cast<real>(p.beta_space[i]) * x[i];
  return (1.0L - t) * lin + p.b0 + static_cast<real>(p.beta0) * x[p.target_species];
}

inline real log_sigmoid(real z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

/// Controls a sqrt(u(x+nu)/u(x)) with the admissible clamp.
inline std::vector<real> ansatz_controls(const srnis::ReactionNetwork& net, const srnis::AnsatzParams& p,
                                         real t, const std::vector<std::int64_t>& x) {
  const auto a = rates(net, x);
  std::vector<real> delta(a.size(), 0.0L);
  const real here = log_sigmoid(sigmoid_arg(t, x, p));
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0L) continue;
    auto y = x;
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::max<std::int64_t>(0, x[i] + net.change(j)[i]);
    real d = a[j] * std::exp(0.5L * (log_sigmoid(sigmoid_arg(t, y, p)) - here));
    d = std::clamp(d, 1e-12L * a[j], 1e12L * a[j]);
    delta[j] = d;
  }
  return delta;
}

/// log L of a recorded path re-evaluated under the ansatz controls of p.
inline real path_log_likelihood(const srnis::ReactionNetwork& net, const srnis::TimeGrid& grid,
                                const srnis::AnsatzParams& p, const srnis::PathSample& path) {
  real total = 0.0L;
  for (int n = 0; n < grid.steps; ++n) {
    const auto st = path.state(n);
    std::vector<std::int64_t> x(st.begin(), st.end());
    const real t = static_cast<real>(n + 1) / grid.steps;
    const auto a = rates(net, x);
    const auto d = ansatz_controls(net, p, t, x);
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[j] == 0.0L) continue;
      const auto k = path.step_counts(n)[j];
      total += -(a[j] - d[j]) * static_cast<real>(grid.dt) + static_cast<real>(k) * std::log(a[j] / d[j]);
    }
  }
  return total;
}

/// Richardson-extrapolated central difference.
inline real derivative(const std::function<real(real)>& f, real x, real h) {
  const real d1 = (f(x + h) - f(x - h)) / (2.0L * h);
  const real d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4.0L * d2 - d1) / 3.0L;
}

/// Golden section on [lo, hi] in long double.
inline real golden_min(const std::function<real(real)>& f, real lo, real hi, real tol) {
  const real r = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  real c = hi - r * (hi - lo);
  real d = lo + r * (hi - lo);
  real fc = f(c);
  real fd = f(d);
  while (hi - lo > tol) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - r * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + r * (hi - lo);
      fd = f(d);
    }
  }
  return (lo + hi) / 2.0L;
}

/// One-step second moment for a 1-D single-channel network:
/// sum_p Poi(p; a dt)^2 / Poi(p; delta dt) u(max(0, x + nu p))
///   = exp(dt (delta - 2a)) sum_p lambda^p / p! u(max(0, x + nu p)),  lambda = a^2 dt / delta.
/// For nu < 0 every p >= x / |nu| lands on 0 and that tail is summed as
/// exp(lambda) minus the head (or term by term when lambda is small).
inline real one_step_moment_1d(const srnis::ReactionNetwork& net, const std::function<real(std::int64_t)>& u_next,
                               std::int64_t x, real delta, real dt, int terms = 400) {
  const real a = rates(net, {x})[0];
  if (a == 0.0L) return u_next(x);
  const int nu = net.change(0)[0];
  const real lambda = a * a * dt / delta;
  const real log_lambda = std::log(lambda);
  auto term = [&](std::int64_t p) { return std::exp(static_cast<real>(p) * log_lambda - log_fact(p)); };
  const real prefactor = std::exp(dt * (delta - 2.0L * a));
  real total = 0.0L;
  if (nu >= 0) {
    for (int p = 0; p < terms; ++p) total += term(p) * u_next(x + nu * p);
    return prefactor * total;
  }
  const std::int64_t sat = (x + (-nu) - 1) / (-nu);  // first p with x + nu p <= 0
  real head = 0.0L;
  for (std::int64_t p = 0; p < sat; ++p) {
    head += term(p);
    total += term(p) * u_next(x + nu * p);
  }
  real tail = 0.0L;
  if (u_next(0) == 0.0L) {
    // nothing to add
  } else if (lambda < 50.0L) {
    for (std::int64_t p = sat; p < sat + terms; ++p) tail += term(p);
  } else {
    tail = std::exp(lambda) - head;
  }
  return prefactor * (tail == 0.0L ? total : total + tail * u_next(0));
}

/// Exhaustive optimal second moment on a 1-D single-channel network with
/// states 0..x_max: backward over steps, each state minimized over delta by
/// golden section over (1e-12 a, 1e3 a).
inline std::vector<std::vector<real>> brute_force_values_1d(const srnis::ReactionNetwork& net, int steps, real dt,
                                                            const std::function<real(std::int64_t)>& g,
                                                            std::int64_t x_max) {
  std::vector<std::vector<real>> u(steps + 1, std::vector<real>(x_max + 1));
  for (std::int64_t x = 0; x <= x_max; ++x) u[steps][x] = g(x) * g(x);
  for (int n = steps - 1; n >= 0; --n) {
    auto next = [&](std::int64_t y) { return u[n + 1][std::min(y, x_max)]; };
    for (std::int64_t x = 0; x <= x_max; ++x) {
      const real a = rates(net, {x})[0];
      if (a == 0.0L) {
        u[n][x] = next(x);
        continue;
      }
      auto f = [&](real d) { return one_step_moment_1d(net, next, x, d, dt); };
      const real best = golden_min(f, 1e-12L * a, 1e3L * a, 1e-14L * a);
      u[n][x] = std::min(f(best), f(a));
    }
  }
  return u;
}

}  // namespace oracle
