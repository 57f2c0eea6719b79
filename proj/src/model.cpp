#include "srnis/model.hpp"

#include <cmath>
#include <sstream>

#include "srnis/error.hpp"

namespace srnis {

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions,
                                 State x0, double final_time)
    : species_(std::move(species)),
      reactions_(std::move(reactions)),
      x0_(std::move(x0)),
      final_time_(final_time) {
  const std::size_t d = species_.size();
  if (d == 0) throw Error("network needs at least one species");
  if (reactions_.empty()) throw Error("network needs at least one reaction");
  if (!(final_time_ > 0.0) || !std::isfinite(final_time_)) throw Error("final time must be positive");
  if (x0_.size() != d) throw Error("initial state has wrong length");
  for (Count v : x0_)
    if (v < 0) throw Error("initial state must be non-negative");

  change_.assign(reactions_.size() * d, 0);
  reactants_.resize(reactions_.size());
  for (std::size_t j = 0; j < reactions_.size(); ++j) {
    const Reaction& r = reactions_[j];
    if (r.consumed.size() != d || r.produced.size() != d) {
      throw Error("reaction " + std::to_string(j) + ": stoichiometry length must equal species count");
    }
    if (!(r.rate > 0.0) || !std::isfinite(r.rate)) {
      throw Error("reaction " + std::to_string(j) + ": rate constant must be positive");
    }
    for (std::size_t i = 0; i < d; ++i) {
      if (r.consumed[i] < 0 || r.produced[i] < 0) {
        throw Error("reaction " + std::to_string(j) + ": stoichiometric coefficients must be non-negative");
      }
      change_[j * d + i] = r.produced[i] - r.consumed[i];
      if (r.consumed[i] > 0) reactants_[j].emplace_back(i, r.consumed[i]);
    }
  }
}

void ReactionNetwork::check_state(std::span<const Count> x) const {
  if (x.size() != species_.size()) {
    throw Error("state has length " + std::to_string(x.size()) + ", expected " +
                std::to_string(species_.size()));
  }
  for (Count v : x)
    if (v < 0) throw Error("state has a negative entry");
}

void ReactionNetwork::propensities(std::span<const Count> x, std::span<double> out) const {
  if (x.size() != species_.size() || out.size() != reactions_.size()) {
    throw Error("propensity: dimension mismatch");
  }
  for (std::size_t j = 0; j < reactions_.size(); ++j) {
    double a = reactions_[j].rate;
    for (const auto& [i, order] : reactants_[j]) {
      const Count xi = x[i];
      if (xi < order) {
        a = 0.0;
        break;
      }
      // falling factorial x (x-1) ... (x-order+1)
      for (int k = 0; k < order; ++k) a *= static_cast<double>(xi - k);
    }
    out[j] = a;
  }
}

std::vector<double> ReactionNetwork::propensities(std::span<const Count> x) const {
  check_state(x);
  std::vector<double> out(reactions_.size());
  propensities(x, out);
  return out;
}

Observable::Observable(Kind kind, std::size_t species, double gamma, std::vector<double> table)
    : kind_(kind), species_(species), gamma_(gamma), table_(std::move(table)) {}

Observable Observable::indicator(std::size_t species, double gamma) {
  if (!std::isfinite(gamma)) throw Error("indicator threshold must be finite");
  return Observable(Kind::indicator, species, gamma, {});
}

Observable Observable::linear(std::size_t species) { return Observable(Kind::linear, species, 0.0, {}); }

Observable Observable::tabulated(std::size_t species, std::vector<double> table) {
  if (table.empty()) throw Error("tabulated observable needs at least one value");
  for (double v : table)
    if (!std::isfinite(v)) throw Error("tabulated observable values must be finite");
  return Observable(Kind::tabulated, species, 0.0, std::move(table));
}

std::string Observable::description() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::indicator:
      os << "1{x_" << species_ << " > " << gamma_ << "}";
      break;
    case Kind::linear:
      os << "x_" << species_;
      break;
    case Kind::tabulated:
      os << "table(x_" << species_ << ", " << table_.size() << " entries)";
      break;
  }
  return os.str();
}

void Observable::check_dimension(std::size_t d) const {
  if (species_ >= d) {
    throw Error("observable species index " + std::to_string(species_) + " out of range for " +
                std::to_string(d) + " species");
  }
}

double Observable::operator()(std::span<const Count> x) const {
  if (species_ >= x.size()) throw Error("observable species index out of range");
  const Count xi = x[species_];
  switch (kind_) {
    case Kind::indicator:
      return static_cast<double>(xi) > gamma_ ? 1.0 : 0.0;
    case Kind::linear:
      return static_cast<double>(xi);
    case Kind::tabulated: {
      const auto k = static_cast<std::size_t>(std::max<Count>(xi, 0));
      return table_[std::min(k, table_.size() - 1)];
    }
  }
  return 0.0;
}

double observable_eval(const Observable& obs, std::span<const Count> x) { return obs(x); }

namespace {

Reaction make_reaction(std::size_t d, std::initializer_list<std::pair<std::size_t, int>> in,
                       std::initializer_list<std::pair<std::size_t, int>> out, double rate) {
  Reaction r;
  r.consumed.assign(d, 0);
  r.produced.assign(d, 0);
  for (auto [i, n] : in) r.consumed[i] = n;
  for (auto [i, n] : out) r.produced[i] = n;
  r.rate = rate;
  return r;
}

}  // namespace

std::vector<std::string> catalog_names() { return {"decay", "michaelis-menten", "futile-cycle"}; }

Model catalog(const std::string& name) {
  if (name == "decay") {
    // X -> 0
    std::vector<Reaction> rx{make_reaction(1, {{0, 1}}, {}, 1.0)};
    return {ReactionNetwork({"X"}, std::move(rx), {100}, 1.0), Observable::indicator(0, 50)};
  }
  if (name == "michaelis-menten") {
    // E + S -> C, C -> E + S, C -> E + P
    std::vector<Reaction> rx{
        make_reaction(4, {{0, 1}, {1, 1}}, {{2, 1}}, 0.001),
        make_reaction(4, {{2, 1}}, {{0, 1}, {1, 1}}, 0.005),
        make_reaction(4, {{2, 1}}, {{0, 1}, {3, 1}}, 0.01),
    };
    return {ReactionNetwork({"E", "S", "C", "P"}, std::move(rx), {100, 100, 0, 0}, 1.0),
            Observable::indicator(2, 22)};
  }
  if (name == "futile-cycle") {
    std::vector<Reaction> rx{
        make_reaction(6, {{0, 1}, {1, 1}}, {{2, 1}}, 1.0),   // S1 + S2 -> S3
        make_reaction(6, {{2, 1}}, {{0, 1}, {1, 1}}, 1.0),   // S3 -> S1 + S2
        make_reaction(6, {{2, 1}}, {{0, 1}, {4, 1}}, 0.1),   // S3 -> S1 + S5
        make_reaction(6, {{3, 1}, {4, 1}}, {{5, 1}}, 1.0),   // S4 + S5 -> S6
        make_reaction(6, {{5, 1}}, {{3, 1}, {4, 1}}, 1.0),   // S6 -> S4 + S5
        make_reaction(6, {{5, 1}}, {{3, 1}, {1, 1}}, 0.1),   // S6 -> S4 + S2
    };
    return {ReactionNetwork({"S1", "S2", "S3", "S4", "S5", "S6"}, std::move(rx), {1, 50, 0, 1, 50, 0}, 2.0),
            Observable::indicator(4, 60)};
  }
  throw Error("unknown catalog network '" + name + "'");
}

}  // namespace srnis
