#include "srnis/dp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "srnis/detail/parallel.hpp"
#include "srnis/error.hpp"
#include "srnis/poisson.hpp"

namespace srnis {

StateBox::StateBox(State bounds) : bounds_(std::move(bounds)), strides_(bounds_.size()) {
  if (bounds_.empty()) throw Error("state box needs at least one dimension");
  std::size_t cells = 1;
  for (std::size_t i = bounds_.size(); i-- > 0;) {
    if (bounds_[i] < 0) throw Error("state box bounds must be non-negative");
    strides_[i] = cells;
    const auto extent = static_cast<std::size_t>(bounds_[i]) + 1;
    if (cells > std::numeric_limits<std::size_t>::max() / extent) throw Error("state box too large");
    cells *= extent;
  }
  cells_ = cells;
}

std::size_t StateBox::index(std::span<const Count> x, bool& clamped) const {
  if (x.size() != bounds_.size()) throw Error("state box: dimension mismatch");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Count v = x[i];
    if (v < 0 || v > bounds_[i]) {
      clamped = true;
      v = std::clamp<Count>(v, 0, bounds_[i]);
    }
    idx += static_cast<std::size_t>(v) * strides_[i];
  }
  return idx;
}

State StateBox::state(std::size_t index) const {
  State x(bounds_.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<Count>(index / strides_[i]);
    index %= strides_[i];
  }
  return x;
}

double ValueSlice::operator()(std::span<const Count> x) const {
  bool clamped_here = false;
  const std::size_t idx = box->index(x, clamped_here);
  if (clamped_here && clamped != nullptr) ++*clamped;
  return values[idx];
}

std::size_t ValueTable::cells() const {
  return values.size() / static_cast<std::size_t>(grid.steps + 1);
}

std::span<const double> ValueTable::slice(int step) const {
  const std::size_t c = cells();
  return {values.data() + static_cast<std::size_t>(step) * c, c};
}

double ValueTable::value(int step, std::span<const Count> x) const {
  const StateBox box(bounds);
  bool clamped = false;
  return slice(step)[box.index(x, clamped)];
}

std::span<const double> ValueTable::control(int step, std::size_t cell) const {
  return {controls.data() + (static_cast<std::size_t>(step) * cells() + cell) * reactions, reactions};
}

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

// log(lambda^k / k!)
double log_term(std::int64_t k, double log_lambda) {
  return k == 0 ? 0.0 : static_cast<double>(k) * log_lambda - log_factorial(k);
}

// log sum_{k >= m} lambda^k / k!
double log_upper_series(double lambda, std::int64_t m) {
  if (m == 0) return lambda;
  const double log_lambda = std::log(lambda);
  double log_lower = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < m; ++k) log_lower = log_add(log_lower, log_term(k, log_lambda));
  const double lower_mass = std::exp(log_lower - lambda);
  if (lower_mass < 0.5) return lambda + std::log1p(-lower_mass);
  // tail is the small part: sum it directly, terms decrease since m > lambda here
  double acc = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = m;; ++k) {
    const double t = log_term(k, log_lambda);
    acc = log_add(acc, t);
    if (t < acc - 40.0 && static_cast<double>(k) > lambda) break;
  }
  return acc;
}

// Smallest K >= 0 with P(Poisson(lambda) > K) <= tol.
std::int64_t poisson_cutoff(double lambda, double tol) {
  if (lambda == 0.0) return 0;
  const double log_lambda = std::log(lambda);
  double cdf = 0.0;
  for (std::int64_t k = 0;; ++k) {
    cdf += std::exp(-lambda + log_term(k, log_lambda));
    if (1.0 - cdf <= tol && static_cast<double>(k) >= lambda) return k;
    if (k > 100'000'000) throw Error("Poisson truncation did not converge");
  }
}

// Count p beyond which max(0, x + nu p), clamped into the box, stops moving.
std::int64_t saturation_count(std::span<const Count> x, std::span<const int> nu, const State& bounds) {
  std::int64_t sat = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (nu[i] < 0) {
      const Count room = std::max<Count>(x[i], 0);
      sat = std::max<std::int64_t>(sat, (room + (-nu[i]) - 1) / (-nu[i]));
    } else if (nu[i] > 0) {
      const Count room = std::max<Count>(bounds[i] - x[i], 0);
      sat = std::max<std::int64_t>(sat, (room + nu[i] - 1) / nu[i]);
    }
  }
  return sat;
}

void check_admissible(std::span<const double> a, std::span<const double> delta) {
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (!(delta[j] >= 0.0) || !std::isfinite(delta[j])) throw Error("inadmissible control: not finite or negative");
    if ((a[j] == 0.0) != (delta[j] == 0.0)) throw Error("inadmissible control for reaction " + std::to_string(j));
  }
}

double exact_step_impl(const ReactionNetwork& net, const ValueSlice& u_next, std::span<const Count> x,
                       std::span<const double> a, std::span<const double> delta, double dt,
                       const TruncationSpec& trunc) {
  const std::size_t J = net.reaction_count();
  const std::size_t d = net.species_count();
  double base = 0.0;
  std::vector<std::size_t> active;
  std::vector<double> log_lambda;
  std::vector<double> lambda;
  for (std::size_t j = 0; j < J; ++j) {
    if (a[j] == 0.0) continue;
    base += dt * (delta[j] - 2.0 * a[j]);
    active.push_back(j);
    lambda.push_back(a[j] * a[j] * dt / delta[j]);
    log_lambda.push_back(std::log(lambda.back()));
  }
  if (active.empty()) return u_next(x);

  State shifted(d);
  const State& bounds = u_next.box->bounds();

  if (active.size() == 1) {
    const std::size_t j = active[0];
    const auto nu = net.change(j);
    const std::int64_t sat = saturation_count(x, nu, bounds);
    std::int64_t stop = sat;
    bool lump = true;
    if (lambda[0] <= 1e4) {
      const std::int64_t cut = poisson_cutoff(lambda[0], trunc.tail_tol);
      if (cut < sat) {
        stop = cut + 1;
        lump = false;
      }
    }
    double total = 0.0;
    for (std::int64_t p = 0; p < stop; ++p) {
      for (std::size_t i = 0; i < d; ++i) shifted[i] = std::max<Count>(0, x[i] + nu[i] * p);
      const double u = u_next(shifted);
      if (u != 0.0) total += u * std::exp(base + log_term(p, log_lambda[0]));
    }
    if (lump) {
      for (std::size_t i = 0; i < d; ++i) shifted[i] = std::max<Count>(0, x[i] + nu[i] * sat);
      const double u = u_next(shifted);
      if (u != 0.0) total += u * std::exp(base + log_upper_series(lambda[0], sat));
    }
    return total;
  }

  // General case: enumerate the product of per-channel cutoffs.
  const double per_channel_tol = trunc.tail_tol / static_cast<double>(active.size());
  std::vector<std::int64_t> cut(active.size());
  double terms = 1.0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    cut[k] = poisson_cutoff(lambda[k], per_channel_tol);
    terms *= static_cast<double>(cut[k] + 1);
  }
  if (terms > static_cast<double>(trunc.max_terms)) {
    throw Error("exact Bellman step needs " + std::to_string(terms) + " terms, above max_terms");
  }
  std::vector<std::int64_t> p(active.size(), 0);
  double total = 0.0;
  for (;;) {
    double log_w = base;
    std::copy(x.begin(), x.end(), shifted.begin());
    for (std::size_t k = 0; k < active.size(); ++k) {
      log_w += log_term(p[k], log_lambda[k]);
      const auto nu = net.change(active[k]);
      for (std::size_t i = 0; i < d; ++i) shifted[i] += nu[i] * p[k];
    }
    for (std::size_t i = 0; i < d; ++i) shifted[i] = std::max<Count>(0, shifted[i]);
    const double u = u_next(shifted);
    if (u != 0.0) total += u * std::exp(log_w);
    std::size_t k = 0;
    while (k < p.size() && ++p[k] > cut[k]) p[k++] = 0;
    if (k == p.size()) break;
  }
  return total;
}

constexpr double kGolden = 0.6180339887498949;
constexpr int kSweeps = 3;
constexpr double kSearchTol = 1e-8;
// Upper cap on the combined rate a^2 dt / delta when several channels are
// active; keeps the enumerated product finite.
constexpr double kMultiChannelRateCap = 500.0;

template <class F>
double golden_section(F&& f, double lo, double hi, double start) {
  // Bracket the minimum by walking downhill from `start`.
  double step = 0.5;
  double s0 = std::clamp(start, lo, hi);
  double f0 = f(s0);
  double fr = f(std::min(hi, s0 + step));
  double dir = 1.0;
  if (fr >= f0) {
    const double fl = f(std::max(lo, s0 - step));
    if (fl >= f0) {
      lo = std::max(lo, s0 - step);
      hi = std::min(hi, s0 + step);
    } else {
      dir = -1.0;
    }
  }
  if (!(fr >= f0) || dir < 0.0) {
    double prev = s0;
    double cur = s0;
    double fcur = f0;
    for (;;) {
      const double next = std::clamp(cur + dir * step, lo, hi);
      const double fnext = f(next);
      if (fnext >= fcur || next == cur) {
        const double a = std::min(prev, next);
        const double b = std::max(prev, next);
        lo = a;
        hi = b;
        break;
      }
      prev = cur;
      cur = next;
      fcur = fnext;
      step *= 2.0;
    }
  }
  double a = lo;
  double b = hi;
  double c = b - kGolden * (b - a);
  double e = a + kGolden * (b - a);
  double fc = f(c);
  double fe = f(e);
  while (b - a > kSearchTol) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + kGolden * (b - a);
      fe = f(e);
    }
  }
  return 0.5 * (a + b);
}

void check_box(const ReactionNetwork& net, const State& bounds, std::size_t max_cells) {
  if (bounds.size() != net.species_count()) throw Error("truncation bounds must have one entry per species");
  const StateBox box(bounds);
  if (box.cells() > max_cells) {
    throw Error("state box has " + std::to_string(box.cells()) + " cells, above the cap of " +
                std::to_string(max_cells));
  }
}

ValueTable make_table(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                      const State& bounds) {
  obs.check_dimension(net.species_count());
  const StateBox box(bounds);
  ValueTable table;
  table.grid = grid;
  table.bounds = bounds;
  table.reactions = net.reaction_count();
  table.values.assign((grid.steps + 1) * box.cells(), 0.0);
  table.controls.assign(grid.steps * box.cells() * net.reaction_count(), 0.0);
  double* terminal = table.values.data() + static_cast<std::size_t>(grid.steps) * box.cells();
  for (std::size_t c = 0; c < box.cells(); ++c) {
    const double g = obs(box.state(c));
    terminal[c] = g * g;
  }
  return table;
}

// Fills slice n of `table` cell by cell, parallel within the slice.
template <class CellFn>
std::uint64_t sweep_slice(ValueTable& table, const StateBox& box, int n, CellFn&& cell_fn) {
  const std::size_t cells = box.cells();
  const std::size_t J = table.reactions;
  std::span<const double> next(table.values.data() + static_cast<std::size_t>(n + 1) * cells, cells);
  double* out = table.values.data() + static_cast<std::size_t>(n) * cells;
  double* ctrl = table.controls.data() + static_cast<std::size_t>(n) * cells * J;
  std::uint64_t clamped_total = 0;
  const auto n_cells = static_cast<std::ptrdiff_t>(cells);
  detail::ExceptionSlot errors;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : clamped_total)
  for (std::ptrdiff_t c = 0; c < n_cells; ++c) {
    errors.run([&] {
      std::uint64_t clamped = 0;
      const ValueSlice u_next{&box, next, &clamped};
      const State x = box.state(static_cast<std::size_t>(c));
      out[c] = cell_fn(u_next, x, std::span<double>(ctrl + static_cast<std::size_t>(c) * J, J));
      clamped_total += clamped;
    });
  }
  errors.rethrow();
  return clamped_total;
}

}  // namespace

double bellman_exact_step(const ReactionNetwork& net, const ValueSlice& u_next, std::span<const Count> x,
                          std::span<const double> delta, double dt, const TruncationSpec& trunc) {
  net.check_state(x);
  if (delta.size() != net.reaction_count()) throw Error("bellman_exact_step: control has wrong length");
  if (!(trunc.tail_tol > 0.0 && trunc.tail_tol < 1.0)) throw Error("tail tolerance must lie in (0, 1)");
  const std::vector<double> a = net.propensities(x);
  check_admissible(a, delta);
  return exact_step_impl(net, u_next, x, a, delta, dt, trunc);
}

double closed_form_control(double a, double u_plus, double u_here) {
  if (!(u_here > 0.0)) throw Error("closed-form control needs u(n+1, x) > 0");
  if (u_plus < 0.0 || a < 0.0) throw Error("closed-form control needs non-negative inputs");
  return a * std::sqrt(u_plus) / std::sqrt(u_here);
}

ApproxStep approx_bellman_step(const ReactionNetwork& net, const ValueSlice& u_next, std::span<const Count> x,
                               double dt) {
  net.check_state(x);
  const double u_here = u_next(x);
  if (!(u_here > 0.0)) throw Error("approximate Bellman step needs u(n+1, x) > 0");
  const std::vector<double> a = net.propensities(x);
  ApproxStep out;
  out.delta_bar.resize(a.size());
  State shifted(x.size());
  double q_sum = 0.0;
  double a_sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    a_sum += a[j];
    if (a[j] == 0.0) continue;
    const auto nu = net.change(j);
    for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = std::max<Count>(0, x[i] + nu[i]);
    const double u_plus = u_next(shifted);
    out.delta_bar[j] = closed_form_control(a[j], u_plus, u_here);
    // inf_delta a^2 u+ / delta + delta u, attained at delta_bar
    q_sum += 2.0 * a[j] * std::sqrt(u_plus * u_here);
  }
  out.value = dt * q_sum + (1.0 - 2.0 * dt * a_sum) * u_here;
  return out;
}

DpSolution solve_exact_dp(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                          const TruncationSpec& trunc) {
  check_box(net, trunc.bounds, trunc.max_cells);
  if (!(trunc.tail_tol > 0.0 && trunc.tail_tol < 1.0)) throw Error("tail tolerance must lie in (0, 1)");
  const StateBox box(trunc.bounds);
  DpSolution sol;
  sol.table = make_table(net, grid, obs, trunc.bounds);
  const double dt = grid.dt;
  const std::size_t J = net.reaction_count();

  for (int n = grid.steps - 1; n >= 0; --n) {
    sol.clamped_lookups += sweep_slice(sol.table, box, n, [&](const ValueSlice& u_next, const State& x,
                                                               std::span<double> ctrl) {
      const std::vector<double> a = net.propensities(x);
      std::vector<double> delta(a);
      const double at_identity = exact_step_impl(net, u_next, x, a, delta, dt, trunc);
      std::size_t active = 0;
      for (double aj : a) active += aj > 0.0 ? 1 : 0;
      if (active == 0 || at_identity == 0.0) {
        std::copy(delta.begin(), delta.end(), ctrl.begin());
        return at_identity;
      }
      // closed-form initializer where it is defined
      const double u_here = u_next(x);
      State shifted(x.size());
      for (std::size_t j = 0; j < J; ++j) {
        if (a[j] == 0.0 || !(u_here > 0.0)) continue;
        const auto nu = net.change(j);
        for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = std::max<Count>(0, x[i] + nu[i]);
        delta[j] = closed_form_control(a[j], u_next(shifted), u_here);
      }
      admissible_controls(a, delta);
      for (int sweep = 0; sweep < kSweeps; ++sweep) {
        for (std::size_t j = 0; j < J; ++j) {
          if (a[j] == 0.0) continue;
          double lo = std::log(kControlFloor * a[j]);
          const double hi = std::log(kControlCeiling * a[j]);
          if (active > 1) lo = std::max(lo, std::log(a[j] * a[j] * dt / kMultiChannelRateCap));
          auto objective = [&](double s) {
            delta[j] = std::exp(s);
            return exact_step_impl(net, u_next, x, a, delta, dt, trunc);
          };
          const double best = golden_section(objective, lo, hi, std::log(delta[j]));
          delta[j] = std::exp(best);
        }
      }
      std::copy(delta.begin(), delta.end(), ctrl.begin());
      return exact_step_impl(net, u_next, x, a, delta, dt, trunc);
    });
  }
  return sol;
}

DpSolution solve_approx_dp(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                           const State& bounds) {
  check_box(net, bounds, TruncationSpec{}.max_cells);
  const StateBox box(bounds);
  DpSolution sol;
  sol.table = make_table(net, grid, obs, bounds);
  for (int n = grid.steps - 1; n >= 0; --n) {
    sol.clamped_lookups += sweep_slice(sol.table, box, n, [&](const ValueSlice& u_next, const State& x,
                                                               std::span<double> ctrl) {
      const ApproxStep step = approx_bellman_step(net, u_next, x, grid.dt);
      std::copy(step.delta_bar.begin(), step.delta_bar.end(), ctrl.begin());
      return step.value;
    });
  }
  return sol;
}

DpSolution policy_second_moment(const ReactionNetwork& net, const TimeGrid& grid, const Observable& obs,
                                const ControlPolicy& policy, const TruncationSpec& trunc) {
  check_box(net, trunc.bounds, trunc.max_cells);
  const StateBox box(trunc.bounds);
  DpSolution sol;
  sol.table = make_table(net, grid, obs, trunc.bounds);
  for (int n = grid.steps - 1; n >= 0; --n) {
    sol.clamped_lookups += sweep_slice(sol.table, box, n, [&](const ValueSlice& u_next, const State& x,
                                                               std::span<double> ctrl) {
      const std::vector<double> a = net.propensities(x);
      std::vector<double> delta(a.size());
      policy.controls(n, x, a, delta);
      admissible_controls(a, delta);
      std::copy(delta.begin(), delta.end(), ctrl.begin());
      return exact_step_impl(net, u_next, x, a, delta, grid.dt, trunc);
    });
  }
  return sol;
}

TabulatedPolicy::TabulatedPolicy(ValueTable table) : table_(std::move(table)), box_(table_.bounds) {
  if (table_.controls.size() != static_cast<std::size_t>(table_.grid.steps) * box_.cells() * table_.reactions) {
    throw Error("value table control block has the wrong size");
  }
}

void TabulatedPolicy::controls(int step, std::span<const Count> x, std::span<const double> a,
                               std::span<double> delta) const {
  if (step < 0 || step >= table_.grid.steps) throw Error("tabulated policy: step out of range");
  bool clamped = false;
  const std::size_t cell = box_.index(x, clamped);
  if (clamped) clamped_.fetch_add(1, std::memory_order_relaxed);
  const auto row = table_.control(step, cell);
  for (std::size_t j = 0; j < a.size(); ++j) {
    // a clamped lookup may land on a cell with different active channels
    delta[j] = a[j] == 0.0 ? 0.0 : (row[j] > 0.0 ? row[j] : a[j]);
  }
}

void write_value_table(std::ostream& out, const ValueTable& table) {
  const std::size_t cells = table.cells();
  out << "# srnis value table v1\n";
  out << "# values: one line per step n = 0..steps, cells row-major (last species fastest)\n";
  out << "# controls: one line per (step, cell), step-major, J entries per line\n";
  out << "species " << table.bounds.size() << "\n";
  out << "reactions " << table.reactions << "\n";
  out << "steps " << table.grid.steps << "\n";
  out << std::setprecision(17) << "dt " << table.grid.dt << "\n";
  out << "bounds";
  for (Count b : table.bounds) out << ' ' << b;
  out << "\nvalues\n";
  for (int n = 0; n <= table.grid.steps; ++n) {
    const auto s = table.slice(n);
    for (std::size_t c = 0; c < cells; ++c) out << (c ? " " : "") << s[c];
    out << '\n';
  }
  out << "controls\n";
  for (int n = 0; n < table.grid.steps; ++n) {
    for (std::size_t c = 0; c < cells; ++c) {
      const auto row = table.control(n, c);
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
      out << '\n';
    }
  }
}

ValueTable read_value_table(std::istream& in) {
  ValueTable table;
  std::string line;
  std::size_t species = 0;
  bool have_values = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "species") {
      ls >> species;
    } else if (key == "reactions") {
      ls >> table.reactions;
    } else if (key == "steps") {
      ls >> table.grid.steps;
    } else if (key == "dt") {
      ls >> table.grid.dt;
    } else if (key == "bounds") {
      table.bounds.resize(species);
      for (auto& b : table.bounds) ls >> b;
    } else if (key == "values") {
      const StateBox box(table.bounds);
      table.values.resize((table.grid.steps + 1) * box.cells());
      for (double& v : table.values) in >> v;
      have_values = true;
    } else if (key == "controls") {
      const StateBox box(table.bounds);
      table.controls.resize(table.grid.steps * box.cells() * table.reactions);
      for (double& v : table.controls) in >> v;
    } else {
      throw Error("value table: unknown header key '" + key + "'");
    }
    if (!in && !in.eof()) throw Error("value table: malformed numeric block");
  }
  if (!have_values || table.controls.empty()) throw Error("value table: missing values or controls block");
  return table;
}

}  // namespace srnis
