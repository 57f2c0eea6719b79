#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "srnis/importance.hpp"
#include "srnis/io.hpp"
#include "srnis/learning.hpp"

namespace srnis {

inline constexpr double kConfidence95 = 1.96;

/// Paths needed for a statistical error below `tol` at 95% confidence:
/// ceil(c^2 * 4 * var / tol^2).
std::uint64_t plan_samples(double var_estimate, double tol, double c_alpha = kConfidence95);

/// Plain Monte Carlo paths for relative error `tol_rel` on a probability q:
/// c^2 / (q tol_rel^2), unrounded.
double rare_event_samples(double q, double tol_rel, double c_alpha = kConfidence95);

/// Squared coefficient of variation of a Bernoulli(q) sample, (1 - q) / q.
double bernoulli_squared_cv(double q);

/// Environment variable holding the default output directory.
inline constexpr const char* kOutputDirEnv = "SRNIS_OUTPUT_DIR";
std::filesystem::path default_output_dir();

struct ExperimentConfig {
  std::string model = "decay";
  double dt_pl = 1.0 / 16;
  double dt_f = 1.0 / 16;
  std::size_t learn_paths = 10000;  // M0
  std::size_t paths = 1000000;      // M
  int iterations = 100;
  double step_size = 0.1;
  double slope = 2.0;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;
  std::filesystem::path params_file;  // learned parameters; skips learning when set

  void validate(double final_time) const;
};

/// Overwrites fields present in `doc`; unknown keys are an error.
void apply_config(ExperimentConfig& config, const nlohmann::json& doc);
ExperimentConfig read_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

/// Sub-streams of the master seed used by the harness phases.
std::uint64_t tl_phase_seed(std::uint64_t seed);
std::uint64_t is_phase_seed(std::uint64_t seed);

struct WorkReport {
  std::uint64_t poisson_draws = 0;  // forward phases only
  std::uint64_t learning_draws = 0;
  std::uint64_t paths = 0;
  double learning_seconds = 0.0;
  double estimation_seconds = 0.0;
  // Cost model in units of one Poisson draw per channel and step.
  double w_pl = 0.0;       // I M0 N_pl J
  double w_forward = 0.0;  // N_f J, per path
  double w_is_tl = 0.0;    // w_pl + M w_forward
};

struct Comparison {
  ISEstimate tl;
  ISEstimate is;
  bool reduction_defined = false;
  double reduction_factor = 0.0;  // tl.squared_cv / is.squared_cv
  bool tl_reliable = false;       // TL 95% half-width within 10% of its mean
  bool is_reliable = false;
  bool learned = false;
  LearnResult learning;
  AnsatzFile params;
  WorkReport work;
};

/// Plain TL and IS estimates at dt_f with the same M, learning at dt_pl
/// first unless config.params_file is set.
Comparison compare_tl_vs_is(const ExperimentConfig& config, const Model& model);

nlohmann::ordered_json estimate_to_json(const ISEstimate& e);
nlohmann::ordered_json comparison_to_json(const Comparison& c);

struct TransferRow {
  double dt_f = 0.0;
  ISEstimate is;
  double tl_squared_cv = 0.0;  // Bernoulli reference at the IS mean
};

std::vector<TransferRow> dt_transfer_experiment(const ExperimentConfig& config, const Model& model,
                                                const AnsatzParams& params, const std::vector<double>& dt_list);

void write_trace_csv(std::ostream& out, const std::vector<LearningRecord>& trace);
void write_transfer_csv(std::ostream& out, const std::vector<TransferRow>& rows);

}  // namespace srnis
