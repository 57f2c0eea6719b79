#include "srnis/ansatz.hpp"

#include <cmath>

#include "srnis/error.hpp"

namespace srnis {

namespace {

// log(1 + e^y) without overflow.
double softplus(double y) { return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sigmoid(double z) { return -softplus(-z); }

// sigmoid argument at x + nu without materializing the shifted state.
double shifted_argument(double t, std::span<const Count> x, std::span<const int> nu,
                        const AnsatzParams& p, State& scratch) {
  for (std::size_t i = 0; i < x.size(); ++i) scratch[i] = std::max<Count>(0, x[i] + nu[i]);
  return sigmoid_argument(t, scratch, p);
}

void check_params(std::span<const Count> x, const AnsatzParams& p) {
  if (x.size() != p.beta_space.size()) throw Error("ansatz: state length does not match beta_space");
  if (p.target_species >= x.size()) throw Error("ansatz: target species out of range");
}

}  // namespace

std::vector<double> AnsatzParams::learnable() const {
  std::vector<double> v(beta_space);
  v.push_back(beta_time);
  return v;
}

void AnsatzParams::set_learnable(std::span<const double> values) {
  if (values.size() != learnable_size()) throw Error("ansatz: learnable vector has wrong length");
  std::copy(values.begin(), values.end() - 1, beta_space.begin());
  beta_time = values.back();
}

FinalConditionFit fit_final_condition(double gamma, double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope)) throw Error("final-condition fit needs a positive slope");
  return {-slope * (gamma + 0.5), slope};
}

AnsatzParams initial_ansatz(const ReactionNetwork& net, const Observable& obs, double slope) {
  if (obs.kind() != Observable::Kind::indicator) {
    throw Error("sigmoid ansatz requires an indicator-threshold observable");
  }
  obs.check_dimension(net.species_count());
  const FinalConditionFit fit = fit_final_condition(obs.gamma(), slope);
  AnsatzParams p;
  p.beta_space.assign(net.species_count(), 0.0);
  p.b0 = fit.b0;
  p.beta0 = fit.beta0;
  p.target_species = obs.species();
  p.gamma = obs.gamma();
  return p;
}

double sigmoid_argument(double t, std::span<const Count> x, const AnsatzParams& p) {
  double inner = p.beta_time;
  for (std::size_t i = 0; i < x.size(); ++i) inner += p.beta_space[i] * static_cast<double>(x[i]);
  return (1.0 - t) * inner + p.b0 + p.beta0 * static_cast<double>(x[p.target_species]);
}

double u_hat(double t, std::span<const Count> x, const AnsatzParams& p) {
  check_params(x, p);
  return sigmoid(sigmoid_argument(t, x, p));
}

double log_u_hat(double t, std::span<const Count> x, const AnsatzParams& p) {
  check_params(x, p);
  return log_sigmoid(sigmoid_argument(t, x, p));
}

std::vector<double> u_hat_partials(double t, std::span<const Count> x, const AnsatzParams& p) {
  check_params(x, p);
  const double z = sigmoid_argument(t, x, p);
  // u (1 - u) = sigma(z) sigma(-z)
  const double w = (1.0 - t) * sigmoid(z) * sigmoid(-z);
  std::vector<double> out(x.size() + 1);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = w * static_cast<double>(x[i]);
  out.back() = w;
  return out;
}

double ansatz_time(const TimeGrid& grid, int step) {
  return static_cast<double>(step + 1) / static_cast<double>(grid.steps);
}

AnsatzPolicy::AnsatzPolicy(const ReactionNetwork& net, AnsatzParams params, const TimeGrid& grid)
    : net_(&net), params_(std::move(params)), grid_(grid) {
  if (params_.beta_space.size() != net.species_count()) {
    throw Error("ansatz: beta_space length does not match the network");
  }
  if (params_.target_species >= net.species_count()) throw Error("ansatz: target species out of range");
}

void AnsatzPolicy::controls(int step, std::span<const Count> x, std::span<const double> a,
                            std::span<double> delta) const {
  const double t = ansatz_time(grid_, step);
  const double log_here = log_sigmoid(sigmoid_argument(t, x, params_));
  thread_local State shifted;
  shifted.resize(x.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0) {
      delta[j] = 0.0;
      continue;
    }
    const double log_plus = log_sigmoid(shifted_argument(t, x, net_->change(j), params_, shifted));
    delta[j] = a[j] * std::exp(0.5 * (log_plus - log_here));
  }
}

void AnsatzPolicy::controls_with_partials(int step, std::span<const Count> x, std::span<const double> a,
                                          std::span<double> delta, std::span<double> partials) const {
  const std::size_t d = x.size();
  const std::size_t width = d + 1;
  const double t = ansatz_time(grid_, step);
  const double z_here = sigmoid_argument(t, x, params_);
  const double log_here = log_sigmoid(z_here);
  thread_local State shifted;
  shifted.resize(d);
  std::fill(partials.begin(), partials.end(), 0.0);
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0) {
      delta[j] = 0.0;
      continue;
    }
    const double z_plus = shifted_argument(t, x, net_->change(j), params_, shifted);
    delta[j] = a[j] * std::exp(0.5 * (log_sigmoid(z_plus) - log_here));
    // Quotient rule on a sqrt(u+ / u), simplified with a^2 u+ / (delta u) = delta.
    // (1 - u+) x+ - (1 - u) x = x D + (x+ - x)(1 - u+), with
    // D = (1 - u+) - (1 - u) = -sigma(-z+) sigma(z) expm1(z+ - z) free of cancellation.
    const double one_minus_plus = sigmoid(-z_plus);
    const double diff = -one_minus_plus * sigmoid(z_here) * std::expm1(z_plus - z_here);
    const double scale = 0.5 * delta[j] * (1.0 - t);
    double* row = partials.data() + j * width;
    for (std::size_t i = 0; i < d; ++i) {
      row[i] = scale * (static_cast<double>(x[i]) * diff +
                        static_cast<double>(shifted[i] - x[i]) * one_minus_plus);
    }
    row[d] = scale * diff;
  }
}

std::vector<double> control_from_ansatz(const ReactionNetwork& net, const AnsatzParams& p,
                                        const TimeGrid& grid, int step, std::span<const Count> x) {
  if (step < 0 || step >= grid.steps) throw Error("control_from_ansatz: step out of range");
  net.check_state(x);
  const AnsatzPolicy policy(net, p, grid);
  const std::vector<double> a = net.propensities(x);
  std::vector<double> delta(a.size());
  policy.controls(step, x, a, delta);
  return delta;
}

std::vector<double> control_partials(const ReactionNetwork& net, const AnsatzParams& p,
                                     const TimeGrid& grid, int step, std::span<const Count> x) {
  if (step < 0 || step >= grid.steps) throw Error("control_partials: step out of range");
  net.check_state(x);
  const AnsatzPolicy policy(net, p, grid);
  const std::vector<double> a = net.propensities(x);
  std::vector<double> delta(a.size());
  std::vector<double> partials(a.size() * (x.size() + 1));
  policy.controls_with_partials(step, x, a, delta, partials);
  return partials;
}

}  // namespace srnis
