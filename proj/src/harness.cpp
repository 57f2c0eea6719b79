#include "srnis/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>

#include "srnis/error.hpp"
#include "srnis/rng.hpp"

namespace srnis {

using ordered_json = nlohmann::ordered_json;

std::uint64_t plan_samples(double var_estimate, double tol, double c_alpha) {
  if (!(tol > 0.0)) throw Error("plan_samples: tolerance must be positive");
  if (!(var_estimate >= 0.0)) throw Error("plan_samples: variance must be non-negative");
  const double m = std::ceil(c_alpha * c_alpha * 4.0 * var_estimate / (tol * tol));
  if (m > 1.8e19) throw Error("plan_samples: sample count overflows");
  return static_cast<std::uint64_t>(m);
}

double rare_event_samples(double q, double tol_rel, double c_alpha) {
  if (!(q > 0.0 && q <= 1.0)) throw Error("rare_event_samples: q must lie in (0, 1]");
  if (!(tol_rel > 0.0)) throw Error("rare_event_samples: tolerance must be positive");
  return c_alpha * c_alpha / (q * tol_rel * tol_rel);
}

double bernoulli_squared_cv(double q) {
  if (!(q > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (1.0 - q) / q;
}

std::filesystem::path default_output_dir() {
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') return dir;
  return ".";
}

namespace {

void check_divides(double final_time, double dt, const char* what) {
  try {
    (void)TimeGrid::from_step_size(final_time, dt);
  } catch (const Error& e) {
    throw Error(std::string(what) + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate(double final_time) const {
  check_divides(final_time, dt_pl, "dt_pl");
  check_divides(final_time, dt_f, "dt_f");
  if (learn_paths < 2 || paths < 2) throw Error("path counts must be at least 2");
  if (iterations < 1) throw Error("iterations must be at least 1");
  if (!(step_size > 0.0)) throw Error("step_size must be positive");
  if (!(slope > 0.0)) throw Error("slope must be positive");
}

void apply_config(ExperimentConfig& c, const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error("config must be an object");
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "model") c.model = value.get<std::string>();
      else if (key == "dt_pl") c.dt_pl = value.get<double>();
      else if (key == "dt_f") c.dt_f = value.get<double>();
      else if (key == "learn_paths") c.learn_paths = value.get<std::size_t>();
      else if (key == "paths") c.paths = value.get<std::size_t>();
      else if (key == "iterations") c.iterations = value.get<int>();
      else if (key == "step_size") c.step_size = value.get<double>();
      else if (key == "slope") c.slope = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "output_dir") c.output_dir = value.get<std::string>();
      else if (key == "params_file") c.params_file = value.get<std::string>();
      else throw Error("unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw Error("config key '" + key + "': " + e.what());
    }
  }
}

ExperimentConfig read_config(const std::filesystem::path& path) {
  ExperimentConfig c;
  apply_config(c, read_json_file(path));
  return c;
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json doc;
  doc["model"] = c.model;
  doc["dt_pl"] = c.dt_pl;
  doc["dt_f"] = c.dt_f;
  doc["learn_paths"] = c.learn_paths;
  doc["paths"] = c.paths;
  doc["iterations"] = c.iterations;
  doc["step_size"] = c.step_size;
  doc["slope"] = c.slope;
  doc["seed"] = c.seed;
  doc["output_dir"] = c.output_dir.string();
  doc["params_file"] = c.params_file.string();
  return doc;
}

std::uint64_t tl_phase_seed(std::uint64_t seed) { return derive_seed(seed, 0x7100000000ull); }
std::uint64_t is_phase_seed(std::uint64_t seed) { return derive_seed(seed, 0x7100000001ull); }

namespace {

bool half_width_within(const ISEstimate& e, double rel) {
  return e.mean > 0.0 && kConfidence95 * e.standard_error() <= rel * e.mean;
}

}  // namespace

Comparison compare_tl_vs_is(const ExperimentConfig& config, const Model& model) {
  const ReactionNetwork& net = model.network;
  config.validate(net.final_time());
  const TimeGrid grid_f = TimeGrid::from_step_size(net.final_time(), config.dt_f);
  const TimeGrid grid_pl = TimeGrid::from_step_size(net.final_time(), config.dt_pl);

  Comparison out;
  if (!config.params_file.empty()) {
    out.params = ansatz_from_json(read_json_file(config.params_file));
    if (out.params.params.beta_space.size() != net.species_count()) {
      throw Error("parameter file does not match the model dimension");
    }
  } else {
    const AnsatzParams init = initial_ansatz(net, model.observable, config.slope);
    LearnConfig lc;
    lc.iterations = config.iterations;
    lc.paths = config.learn_paths;
    lc.step_size = config.step_size;
    lc.seed = config.seed;
    out.learning = adam_learn(net, grid_pl, model.observable, init, lc);
    out.learned = true;
    out.params.params = out.learning.best;
    out.params.provenance = {config.dt_pl, config.seed, out.learning.best_iteration};
  }

  out.tl = is_mc_estimate(net, grid_f, model.observable, nullptr, config.paths, tl_phase_seed(config.seed));
  const AnsatzPolicy policy(net, out.params.params, grid_f);
  out.is = is_mc_estimate(net, grid_f, model.observable, &policy, config.paths, is_phase_seed(config.seed));

  out.reduction_defined = out.tl.mean != 0.0 && out.is.squared_cv > 0.0 && std::isfinite(out.tl.squared_cv);
  out.reduction_factor =
      out.reduction_defined ? out.tl.squared_cv / out.is.squared_cv : std::numeric_limits<double>::quiet_NaN();
  out.tl_reliable = half_width_within(out.tl, 0.1);
  out.is_reliable = half_width_within(out.is, 0.1);

  WorkReport& w = out.work;
  const double J = static_cast<double>(net.reaction_count());
  w.poisson_draws = out.tl.poisson_draws + out.is.poisson_draws;
  w.learning_draws = out.learning.poisson_draws;
  w.paths = out.tl.samples + out.is.samples;
  w.learning_seconds = out.learning.runtime_seconds;
  w.estimation_seconds = out.tl.runtime_seconds + out.is.runtime_seconds;
  const double iters = out.learned ? static_cast<double>(out.learning.trace.size()) : 0.0;
  w.w_pl = iters * static_cast<double>(config.learn_paths) * grid_pl.steps * J;
  w.w_forward = grid_f.steps * J;
  w.w_is_tl = w.w_pl + static_cast<double>(config.paths) * w.w_forward;
  return out;
}

ordered_json estimate_to_json(const ISEstimate& e) {
  ordered_json doc;
  doc["mean"] = e.mean;
  doc["variance"] = e.variance;
  doc["squared_cv"] = std::isfinite(e.squared_cv) ? ordered_json(e.squared_cv) : ordered_json(nullptr);
  doc["kurtosis"] = std::isfinite(e.kurtosis) ? ordered_json(e.kurtosis) : ordered_json(nullptr);
  doc["second_moment"] = e.second_moment;
  doc["standard_error"] = e.standard_error();
  doc["M"] = e.samples;
  doc["dt"] = e.dt;
  doc["runtime_seconds"] = e.runtime_seconds;
  doc["poisson_draws"] = e.poisson_draws;
  return doc;
}

ordered_json comparison_to_json(const Comparison& c) {
  ordered_json doc;
  doc["tl"] = estimate_to_json(c.tl);
  doc["is"] = estimate_to_json(c.is);
  doc["reduction_defined"] = c.reduction_defined;
  doc["reduction_factor"] = c.reduction_defined ? ordered_json(c.reduction_factor) : ordered_json(nullptr);
  doc["kurtosis_tl"] = estimate_to_json(c.tl)["kurtosis"];
  doc["kurtosis_is"] = estimate_to_json(c.is)["kurtosis"];
  doc["tl_reliable"] = c.tl_reliable;
  doc["is_reliable"] = c.is_reliable;
  doc["learned"] = c.learned;
  if (c.learned) {
    doc["best_iteration"] = c.learning.best_iteration;
    doc["learning_aborted"] = c.learning.aborted;
    if (c.learning.aborted) doc["abort_reason"] = c.learning.abort_reason;
  }
  doc["params"] = ansatz_to_json(c.params);
  ordered_json w;
  w["poisson_draws"] = c.work.poisson_draws;
  w["learning_draws"] = c.work.learning_draws;
  w["paths"] = c.work.paths;
  w["learning_seconds"] = c.work.learning_seconds;
  w["estimation_seconds"] = c.work.estimation_seconds;
  w["w_pl"] = c.work.w_pl;
  w["w_forward"] = c.work.w_forward;
  w["w_is_tl"] = c.work.w_is_tl;
  doc["work"] = w;
  return doc;
}

std::vector<TransferRow> dt_transfer_experiment(const ExperimentConfig& config, const Model& model,
                                                const AnsatzParams& params, const std::vector<double>& dt_list) {
  if (dt_list.empty()) throw Error("dt_transfer_experiment: empty step-size list");
  if (params.beta_space.size() != model.network.species_count()) {
    throw Error("parameters do not match the model dimension");
  }
  if (config.paths < 2) throw Error("path count must be at least 2");
  std::vector<TransferRow> rows;
  for (double dt : dt_list) {
    const TimeGrid grid = TimeGrid::from_step_size(model.network.final_time(), dt);
    const AnsatzPolicy policy(model.network, params, grid);
    TransferRow row;
    row.dt_f = dt;
    row.is = is_mc_estimate(model.network, grid, model.observable, &policy, config.paths,
                            is_phase_seed(config.seed));
    row.tl_squared_cv = bernoulli_squared_cv(row.is.mean);
    rows.push_back(row);
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const std::vector<LearningRecord>& trace) {
  std::size_t d = trace.empty() ? 0 : trace.front().beta.size() - 1;
  std::vector<std::string> header{"iter", "mean", "squared_cv", "kurtosis", "grad_norm", "beta_time"};
  for (std::size_t i = 1; i <= d; ++i) header.push_back("beta_space_" + std::to_string(i));
  CsvWriter csv(out, header);
  for (const LearningRecord& r : trace) {
    csv << r.iteration << r.mean << r.squared_cv << r.kurtosis << r.grad_norm << r.beta[d];
    for (std::size_t i = 0; i < d; ++i) csv << r.beta[i];
    csv.end_row();
  }
}

void write_transfer_csv(std::ostream& out, const std::vector<TransferRow>& rows) {
  CsvWriter csv(out, {"dt_f", "mean", "variance", "squared_cv", "kurtosis", "M", "tl_squared_cv"});
  for (const TransferRow& r : rows) {
    csv << r.dt_f << r.is.mean << r.is.variance << r.is.squared_cv << r.is.kurtosis << r.is.samples
        << r.tl_squared_cv;
    csv.end_row();
  }
}

}  // namespace srnis
