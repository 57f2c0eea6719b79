#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "srnis/error.hpp"
#include "srnis/model.hpp"
#include "support/oracles.hpp"

using namespace srnis;

TEST_CASE("decay propensity is linear in the population") {
  const Model m = catalog("decay");
  CHECK(m.network.propensities(State{100})[0] == 100.0);
  CHECK(m.network.propensities(State{0})[0] == 0.0);
}

TEST_CASE("michaelis-menten binding rate at the initial state") {
  const Model m = catalog("michaelis-menten");
  const auto a = m.network.propensities(m.network.initial_state());
  CHECK(a[0] == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(a[1] == 0.0);
  CHECK(a[2] == 0.0);
}

TEST_CASE("higher-order reactants use falling factorials") {
  // 2A + B -> C with rate 0.5: a = 0.5 x_A (x_A - 1) x_B
  ReactionNetwork net({"A", "B", "C"}, {Reaction{{2, 1, 0}, {0, 0, 1}, 0.5}}, {3, 2, 0}, 1.0);
  CHECK(net.propensities(State{3, 2, 0})[0] == doctest::Approx(0.5 * 3 * 2 * 2));
  CHECK(net.propensities(State{1, 5, 0})[0] == 0.0);
  CHECK(net.propensities(State{2, 0, 0})[0] == 0.0);
  // no overflow for populations well past 20!
  CHECK(net.propensities(State{100000, 1, 0})[0] == doctest::Approx(0.5 * 100000.0 * 99999.0));
}

TEST_CASE("propensity errors") {
  const Model m = catalog("michaelis-menten");
  CHECK_THROWS_AS(m.network.propensities(State{1, 2, 3}), Error);
  CHECK_THROWS_AS(m.network.propensities(State{1, -2, 3, 0}), Error);
}

TEST_CASE("network construction rejects invalid input") {
  const auto r = Reaction{{1}, {0}, 1.0};
  CHECK_THROWS_AS(ReactionNetwork({"X"}, {Reaction{{1}, {0}, 0.0}}, {1}, 1.0), Error);
  CHECK_THROWS_AS(ReactionNetwork({"X"}, {Reaction{{1}, {0}, -1.0}}, {1}, 1.0), Error);
  CHECK_THROWS_AS(ReactionNetwork({"X"}, {Reaction{{-1}, {0}, 1.0}}, {1}, 1.0), Error);
  CHECK_THROWS_AS(ReactionNetwork({"X"}, {Reaction{{1, 0}, {0}, 1.0}}, {1}, 1.0), Error);
  CHECK_THROWS_AS(ReactionNetwork({"X"}, {r}, {-1}, 1.0), Error);
  CHECK_THROWS_AS(ReactionNetwork({"X"}, {r}, {1, 2}, 1.0), Error);
  CHECK_THROWS_AS(ReactionNetwork({"X"}, {r}, {1}, 0.0), Error);
  CHECK_NOTHROW(ReactionNetwork({"X"}, {r}, {1}, 1.0));
}

TEST_CASE("indicator observable uses a strict threshold") {
  const auto g = Observable::indicator(0, 50);
  CHECK(g(State{51}) == 1.0);
  CHECK(g(State{50}) == 0.0);
  const auto g3 = Observable::indicator(2, 22);
  CHECK(observable_eval(g3, State{100, 100, 23, 0}) == 1.0);
  CHECK(observable_eval(g3, State{100, 100, 22, 0}) == 0.0);
}

TEST_CASE("linear and tabulated observables") {
  CHECK(Observable::linear(1)(State{4, 7}) == 7.0);
  const auto t = Observable::tabulated(0, {0.1, 0.2, 0.3});
  CHECK(t(State{1}) == 0.2);
  CHECK(t(State{40}) == 0.3);
  CHECK_THROWS_AS(Observable::tabulated(0, {}), Error);
}

TEST_CASE("observable species index is checked") {
  const auto g = Observable::indicator(3, 1);
  CHECK_THROWS_AS(g(State{1, 2}), Error);
  CHECK_THROWS_AS(g.check_dimension(2), Error);
  CHECK_NOTHROW(g.check_dimension(4));
}

TEST_CASE("catalog: decay") {
  const Model m = catalog("decay");
  const auto& net = m.network;
  CHECK(net.species_count() == 1);
  CHECK(net.reaction_count() == 1);
  CHECK(net.reactions()[0].rate == 1.0);
  CHECK(net.change(0)[0] == -1);
  CHECK(net.initial_state() == State{100});
  CHECK(net.final_time() == 1.0);
  CHECK(m.observable.kind() == Observable::Kind::indicator);
  CHECK(m.observable.species() == 0);
  CHECK(m.observable.gamma() == 50.0);
}

TEST_CASE("catalog: michaelis-menten stoichiometry matches the printed matrix") {
  const Model m = catalog("michaelis-menten");
  const auto& net = m.network;
  REQUIRE(net.species_count() == 4);
  REQUIRE(net.reaction_count() == 3);
  const int nu[4][3] = {{-1, 1, 1}, {-1, 1, 0}, {1, -1, -1}, {0, 0, 1}};  // species x reaction
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(net.change(j)[i] == nu[i][j]);
  }
  CHECK(net.reactions()[0].rate == 0.001);
  CHECK(net.reactions()[1].rate == 0.005);
  CHECK(net.reactions()[2].rate == 0.01);
  CHECK(net.initial_state() == State{100, 100, 0, 0});
  CHECK(net.final_time() == 1.0);
  CHECK(m.observable.species() == 2);
  CHECK(m.observable.gamma() == 22.0);
}

TEST_CASE("catalog: futile cycle") {
  const Model m = catalog("futile-cycle");
  const auto& net = m.network;
  REQUIRE(net.species_count() == 6);
  REQUIRE(net.reaction_count() == 6);
  const double theta[6] = {1, 1, 0.1, 1, 1, 0.1};
  for (int j = 0; j < 6; ++j) CHECK(net.reactions()[j].rate == theta[j]);
  CHECK(net.initial_state() == State{1, 50, 0, 1, 50, 0});
  CHECK(net.final_time() == 2.0);
  CHECK(m.observable.species() == 4);
  CHECK(m.observable.gamma() == 60.0);
  // R3: S3 -> S1 + S5
  CHECK(std::vector<int>(net.change(2).begin(), net.change(2).end()) == std::vector<int>{1, 0, -1, 0, 1, 0});
}

TEST_CASE("catalog rejects unknown names") {
  CHECK_THROWS_AS(catalog("lotka-volterra"), Error);
  CHECK(catalog_names().size() == 3);
}

TEST_CASE("property: propensities agree with explicit products and vanish without reactants") {
  std::mt19937_64 gen(7);
  for (const auto& name : catalog_names()) {
    const Model m = catalog(name);
    const auto& net = m.network;
    std::uniform_int_distribution<Count> pick(0, 120);
    for (int trial = 0; trial < 500; ++trial) {
      State x(net.species_count());
      for (auto& v : x) v = trial % 3 == 0 ? pick(gen) % 3 : pick(gen);
      const auto a = net.propensities(x);
      const auto ref = oracle::rates(net, x);
      for (std::size_t j = 0; j < a.size(); ++j) {
        CHECK(a[j] >= 0.0);
        CHECK(a[j] == doctest::Approx(static_cast<double>(ref[j])).epsilon(1e-14));
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (x[i] < net.reactions()[j].consumed[i]) CHECK(a[j] == 0.0);
        }
      }
    }
  }
}
