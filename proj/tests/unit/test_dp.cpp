#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "srnis/dp.hpp"
#include "srnis/error.hpp"
#include "support/oracles.hpp"

using namespace srnis;

namespace {

ReactionNetwork small_decay(Count x0, double rate = 1.0) {
  return ReactionNetwork({"A"}, {Reaction{{1}, {0}, rate}}, State{x0}, 1.0);
}

TruncationSpec box(State bounds) {
  TruncationSpec t;
  t.bounds = std::move(bounds);
  return t;
}

// first-order condition of dt (delta u + a^2 u_plus / delta) by bisection
double bisect_control(double a, double u_plus, double u_here) {
  auto deriv = [&](double d) { return u_here - a * a * u_plus / (d * d); };
  double lo = 1e-12 * a, hi = 1e12 * a;
  for (int i = 0; i < 400 && hi - lo > 1e-300; ++i) {
    const double mid = std::sqrt(lo * hi);
    (deriv(mid) > 0 ? hi : lo) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

TEST_CASE("box indexing is row-major with the last species fastest") {
  const StateBox b(State{2, 3});
  CHECK(b.cells() == 12);
  bool clamped = false;
  CHECK(b.index(std::vector<Count>{1, 2}, clamped) == 6);
  CHECK_FALSE(clamped);
  CHECK(b.state(7) == State{1, 3});
  CHECK(b.index(std::vector<Count>{5, 1}, clamped) == 9);
  CHECK(clamped);
  CHECK_THROWS_AS(StateBox(State{-1}), Error);
}

TEST_CASE("exact DP agrees with exhaustive search on tiny decays") {
  for (Count x0 : {2, 3}) {
    const auto net = small_decay(x0);
    const auto grid = TimeGrid::from_step_size(1.0, 0.5);
    std::vector<std::pair<Observable, std::function<oracle::real(std::int64_t)>>> cases;
    cases.emplace_back(Observable::indicator(0, 0), [](std::int64_t x) { return x > 0 ? 1.0L : 0.0L; });
    cases.emplace_back(Observable::indicator(0, 1), [](std::int64_t x) { return x > 1 ? 1.0L : 0.0L; });
    const std::vector<double> tab{0.5, 2.0, 0.25, 3.0};
    cases.emplace_back(Observable::tabulated(0, tab), [tab](std::int64_t x) {
      return static_cast<oracle::real>(tab[std::min<std::size_t>(x, tab.size() - 1)]);
    });
    for (const auto& [obs, g] : cases) {
      const auto sol = solve_exact_dp(net, grid, obs, box(State{x0}));
      const auto ref = oracle::brute_force_values_1d(net, 2, 0.5L, g, x0);
      for (int n = 0; n <= 2; ++n) {
        for (Count x = 0; x <= x0; ++x) {
          const double got = sol.table.value(n, std::vector<Count>{x});
          const double want = static_cast<double>(ref[n][x]);
          CAPTURE(n);
          CAPTURE(x);
          CAPTURE(got - want);
          CHECK(std::fabs(got - want) <= 1e-12 * std::max(1.0, std::fabs(want)));
        }
      }
      CHECK(sol.clamped_lookups == 0);
    }
  }
}

TEST_CASE("exact Bellman step matches plain summation for a given control") {
  const auto net = small_decay(6, 1.3);
  const StateBox b(State{6});
  std::vector<double> u{0.0, 0.2, 0.3, 0.9, 1.1, 1.7, 2.5};
  std::uint64_t clamped = 0;
  const ValueSlice slice{&b, u, &clamped};
  for (Count x = 1; x <= 6; ++x) {
    for (double scale : {0.05, 0.7, 1.0, 3.0, 40.0}) {
      const double a = 1.3 * x;
      const std::vector<double> d{scale * a};
      const double got = bellman_exact_step(net, slice, std::vector<Count>{x}, d, 0.25, TruncationSpec{});
      const double want = static_cast<double>(oracle::one_step_moment_1d(
          net, [&](std::int64_t y) { return static_cast<oracle::real>(u[y]); }, x, d[0], 0.25L));
      CHECK(got == doctest::Approx(want).epsilon(1e-11));
    }
  }
  CHECK(clamped == 0);
  CHECK_THROWS_AS(bellman_exact_step(net, slice, std::vector<Count>{3}, std::vector<double>{0.0}, 0.25,
                                     TruncationSpec{}),
                  Error);
}

TEST_CASE("g identically one gives values identically one") {
  const Model m = catalog("michaelis-menten");
  const auto grid = TimeGrid::from_step_size(1.0, 0.25);
  const auto one = Observable::tabulated(3, {1.0});
  TruncationSpec t = box(State{6, 4, 4, 6});
  const auto sol = solve_exact_dp(ReactionNetwork({"S", "E", "C", "P"}, m.network.reactions(), State{6, 4, 0, 0}, 1.0),
                                  grid, one, t);
  for (double v : sol.table.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  const auto approx = solve_approx_dp(ReactionNetwork({"S", "E", "C", "P"}, m.network.reactions(), State{6, 4, 0, 0}, 1.0),
                                      grid, one, t.bounds);
  for (double v : approx.table.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed-form control agrees with bisection of the first-order condition") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> logu(-30.0, 0.0), loga(-3.0, 4.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = std::exp(loga(gen));
    const double up = std::exp(logu(gen));
    const double uh = std::exp(logu(gen));
    const double cf = closed_form_control(a, up, uh);
    CHECK(std::fabs(cf - bisect_control(a, up, uh)) <= 1e-8 * cf);
  }
  CHECK_THROWS_AS(closed_form_control(1.0, 0.5, 0.0), Error);
}

TEST_CASE("approximate DP needs a positive value function") {
  const auto net = small_decay(5);
  const auto grid = TimeGrid::from_step_size(1.0, 1.0 / 64);
  CHECK_THROWS_AS(solve_approx_dp(net, grid, Observable::indicator(0, 2), State{5}), Error);
  const auto sol = solve_approx_dp(net, grid, Observable::tabulated(0, {0.1, 0.3, 0.5, 1.0, 2.0, 3.0}), State{5});
  for (double v : sol.table.values) CHECK(v > 0.0);
  CHECK(sol.table.controls.size() == 64u * 6u);
}

TEST_CASE("identity-policy second moment equals the tau-leap law") {
  const Model m = catalog("decay");
  const auto grid = TimeGrid::from_step_size(1.0, 0.25);
  const IdentityPolicy id;
  const auto sol = policy_second_moment(m.network, grid, m.observable, id, box(State{100}));
  const auto law = oracle::tau_leap_law_1d(m.network, 4, 0.25L);
  oracle::real q = 0.0L;
  for (const auto& [x, p] : law) q += m.observable(std::vector<Count>{x}) * p;
  CHECK(sol.table.value(0, m.network.initial_state()) == doctest::Approx(static_cast<double>(q)).epsilon(1e-10));
}

TEST_CASE("optimal values lie below every fixed policy") {
  const Model m = catalog("decay");
  const auto grid = TimeGrid::from_step_size(1.0, 0.25);
  const auto opt = solve_exact_dp(m.network, grid, m.observable, box(State{100}));
  const TabulatedPolicy replay(opt.table);
  const auto again = policy_second_moment(m.network, grid, m.observable, replay, box(State{100}));
  const auto id = policy_second_moment(m.network, grid, m.observable, IdentityPolicy{}, box(State{100}));
  const double u0 = opt.table.value(0, m.network.initial_state());
  CHECK(again.table.value(0, m.network.initial_state()) == doctest::Approx(u0).epsilon(1e-9));
  CHECK(u0 < id.table.value(0, m.network.initial_state()));
}

TEST_CASE("value table round trip") {
  const auto net = small_decay(4);
  const auto grid = TimeGrid::from_step_size(1.0, 0.5);
  const auto sol = solve_exact_dp(net, grid, Observable::indicator(0, 1), box(State{4}));
  std::stringstream ss;
  write_value_table(ss, sol.table);
  const ValueTable back = read_value_table(ss);
  CHECK(back.bounds == sol.table.bounds);
  CHECK(back.grid.steps == 2);
  CHECK(back.values == sol.table.values);
  CHECK(back.controls == sol.table.controls);
  std::stringstream bad("# srnis value table v1\nmystery 3\n");
  CHECK_THROWS_AS(read_value_table(bad), Error);
}

TEST_CASE("tabulated policy replays controls and clamps outside the box") {
  const auto net = small_decay(4);
  const auto grid = TimeGrid::from_step_size(1.0, 0.5);
  const auto sol = solve_exact_dp(net, grid, Observable::indicator(0, 1), box(State{4}));
  const TabulatedPolicy policy(sol.table);
  std::vector<double> d(1);
  policy.controls(0, std::vector<Count>{3}, std::vector<double>{3.0}, d);
  CHECK(d[0] == sol.table.control(0, 3)[0]);
  policy.controls(1, std::vector<Count>{0}, std::vector<double>{0.0}, d);
  CHECK(d[0] == 0.0);
  CHECK(policy.clamped_lookups() == 0);
  policy.controls(1, std::vector<Count>{9}, std::vector<double>{9.0}, d);
  CHECK(d[0] == sol.table.control(1, 4)[0]);
  CHECK(policy.clamped_lookups() == 1);
}

TEST_CASE("box size limit") {
  const Model m = catalog("michaelis-menten");
  TruncationSpec t = box(State{60, 60, 60, 60});
  t.max_cells = 1000;
  CHECK_THROWS_AS(solve_exact_dp(m.network, TimeGrid::from_step_size(1.0, 0.5), m.observable, t), Error);
}
