#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace srnis {

using Count = std::int64_t;
using State = std::vector<Count>;

/// One mass-action channel: sum_i consumed[i] S_i -> sum_i produced[i] S_i.
struct Reaction {
  std::vector<int> consumed;
  std::vector<int> produced;
  double rate = 0.0;
};

/// Immutable stochastic reaction network with mass-action kinetics.
///
/// The stoichiometric matrix is stored reaction-major: change(j) is the
/// d-vector produced - consumed for reaction j.
class ReactionNetwork {
 public:
  ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions, State x0,
                  double final_time);

  std::size_t species_count() const { return species_.size(); }
  std::size_t reaction_count() const { return reactions_.size(); }
  const std::vector<std::string>& species() const { return species_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const State& initial_state() const { return x0_; }
  double final_time() const { return final_time_; }

  std::span<const int> change(std::size_t j) const {
    return {change_.data() + j * species_.size(), species_.size()};
  }

  /// Mass-action propensities a_j(x) written to `out` (length J). A channel
  /// whose reactants are not all present has propensity exactly 0.
  /// Only lengths are checked here; the kernels never produce negative states.
  void propensities(std::span<const Count> x, std::span<double> out) const;
  /// Checked variant: also rejects negative entries.
  std::vector<double> propensities(std::span<const Count> x) const;

  /// Throws if x has the wrong length or a negative entry.
  void check_state(std::span<const Count> x) const;

 private:
  std::vector<std::string> species_;
  std::vector<Reaction> reactions_;
  State x0_;
  double final_time_;
  std::vector<int> change_;
  // Sparse reactant lists per channel: (species, order).
  std::vector<std::vector<std::pair<std::size_t, int>>> reactants_;
};

/// Scalar function g of the final state.
class Observable {
 public:
  enum class Kind { indicator, linear, tabulated };

  /// g(x) = 1{x_i > gamma}
  static Observable indicator(std::size_t species, double gamma);
  /// g(x) = x_i
  static Observable linear(std::size_t species);
  /// g(x) = table[min(x_i, table.size()-1)]; bounded custom observable.
  static Observable tabulated(std::size_t species, std::vector<double> table);

  Kind kind() const { return kind_; }
  std::size_t species() const { return species_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& table() const { return table_; }
  std::string description() const;

  double operator()(std::span<const Count> x) const;

  /// Throws if the species index does not exist in a d-species network.
  void check_dimension(std::size_t d) const;

 private:
  Observable(Kind kind, std::size_t species, double gamma, std::vector<double> table);

  Kind kind_;
  std::size_t species_;
  double gamma_;
  std::vector<double> table_;
};

double observable_eval(const Observable& obs, std::span<const Count> x);

struct Model {
  ReactionNetwork network;
  Observable observable;
};

/// Benchmark networks: "decay", "michaelis-menten", "futile-cycle".
Model catalog(const std::string& name);
std::vector<std::string> catalog_names();

}  // namespace srnis
