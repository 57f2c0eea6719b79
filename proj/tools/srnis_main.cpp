// Command-line front end for simulation, learning, estimation and DP solves.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srnis/dp.hpp"
#include "srnis/ensemble.hpp"
#include "srnis/error.hpp"
#include "srnis/harness.hpp"
#include "srnis/io.hpp"
#include "srnis/validate.hpp"

namespace fs = std::filesystem;
using namespace srnis;

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> model;
  std::optional<double> dt_pl;
  std::optional<double> dt_f;
  std::optional<std::size_t> learn_paths;
  std::optional<std::size_t> paths;
  std::optional<int> iterations;
  std::optional<double> step_size;
  std::optional<double> slope;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<std::string> params_file;

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    c.output_dir = default_output_dir();
    if (config) apply_config(c, read_json_file(*config));
    if (model) c.model = *model;
    if (dt_pl) c.dt_pl = *dt_pl;
    if (dt_f) c.dt_f = *dt_f;
    if (learn_paths) c.learn_paths = *learn_paths;
    if (paths) c.paths = *paths;
    if (iterations) c.iterations = *iterations;
    if (step_size) c.step_size = *step_size;
    if (slope) c.slope = *slope;
    if (seed) c.seed = *seed;
    if (output_dir) c.output_dir = *output_dir;
    if (params_file) c.params_file = *params_file;
    return c;
  }
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment config; flags override its fields");
  cmd->add_option("-m,--model", o.model, "catalog name or model file");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("-o,--output-dir", o.output_dir, "output directory (default $SRNIS_OUTPUT_DIR or .)");
}

fs::path out_path(const ExperimentConfig& c, const std::optional<std::string>& explicit_path, const char* name) {
  return explicit_path ? fs::path(*explicit_path) : c.output_dir / name;
}

void write_json(const fs::path& p, const nlohmann::ordered_json& doc) { write_text_file(p, doc.dump(2) + "\n"); }

std::vector<double> parse_dt_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) {
      out.push_back(std::stod(s));
    } else {
      out.push_back(std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1)));
    }
  }
  return out;
}

// Accepts "0.0625" or "1/16".
double parse_dt(const std::string& s) { return parse_dt_list({s}).front(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Importance sampling for rare events in stochastic reaction networks"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP worker count (0 keeps the runtime default)");

  // simulate
  Overrides sim_o;
  std::string sim_dt = "1/16";
  std::optional<std::string> sim_out;
  auto* sim = app.add_subcommand("simulate", "plain tau-leap paths, one g value per path");
  add_common(sim, sim_o);
  sim->add_option("--dt", sim_dt, "step size, e.g. 1/16");
  sim->add_option("-M,--paths", sim_o.paths, "number of paths");
  sim->add_option("--out", sim_out, "CSV output (path_id,g_value)");

  // learn
  Overrides learn_o;
  std::optional<std::string> dt_pl_text;
  std::optional<std::string> trace_out;
  std::optional<std::string> params_out;
  auto* learn = app.add_subcommand("learn", "Adam on the ansatz parameters");
  add_common(learn, learn_o);
  learn->add_option("--dt-pl", dt_pl_text, "learning step size");
  learn->add_option("--m0", learn_o.learn_paths, "paths per iteration");
  learn->add_option("-I,--iterations", learn_o.iterations, "Adam iterations");
  learn->add_option("--step-size", learn_o.step_size, "Adam step size");
  learn->add_option("--slope", learn_o.slope, "terminal sigmoid slope used for b0 and beta0");
  learn->add_option("--trace", trace_out, "trace CSV path");
  learn->add_option("--params-out", params_out, "best parameter file path");

  // estimate
  Overrides est_o;
  std::optional<std::string> dt_f_text;
  std::optional<std::string> table_in;
  std::optional<std::string> report_out;
  auto* est = app.add_subcommand("estimate", "IS estimate with an ansatz or DP-table policy");
  add_common(est, est_o);
  est->add_option("--params", est_o.params_file, "ansatz parameter file");
  est->add_option("--table", table_in, "value table file from dp-solve");
  est->add_option("--dt-f", dt_f_text, "forward step size");
  est->add_option("-M,--paths", est_o.paths, "number of paths");
  est->add_option("--report", report_out, "report JSON path");

  // dp-solve
  Overrides dp_o;
  std::string dp_dt = "1/4";
  std::vector<Count> dp_bounds;
  double dp_tol = 1e-12;
  bool dp_approx = false;
  std::optional<std::string> table_out;
  auto* dps = app.add_subcommand("dp-solve", "value function and optimal controls on a bounded box");
  add_common(dps, dp_o);
  dps->add_option("--dt", dp_dt, "step size");
  dps->add_option("--bound", dp_bounds, "upper bound per species")->required();
  dps->add_option("--tol", dp_tol, "Poisson tail mass tolerance");
  dps->add_flag("--approx", dp_approx, "first-order approximate recursion instead of the exact one");
  dps->add_option("--out", table_out, "table file path");

  // compare
  Overrides cmp_o;
  std::optional<std::string> cmp_dt_pl;
  std::optional<std::string> cmp_dt_f;
  auto* cmp = app.add_subcommand("compare", "plain TL versus learned IS at the same path count");
  add_common(cmp, cmp_o);
  cmp->add_option("--dt-pl", cmp_dt_pl, "learning step size");
  cmp->add_option("--dt-f", cmp_dt_f, "forward step size");
  cmp->add_option("--m0", cmp_o.learn_paths, "paths per learning iteration");
  cmp->add_option("-M,--paths", cmp_o.paths, "estimation paths");
  cmp->add_option("-I,--iterations", cmp_o.iterations, "Adam iterations");
  cmp->add_option("--step-size", cmp_o.step_size, "Adam step size");
  cmp->add_option("--slope", cmp_o.slope, "terminal sigmoid slope");
  cmp->add_option("--params", cmp_o.params_file, "learned parameters; skips learning");

  // dt-transfer
  Overrides dtt_o;
  std::vector<std::string> dtt_list{"1/16", "1/32", "1/64"};
  auto* dtt = app.add_subcommand("dt-transfer", "fixed parameters across forward step sizes");
  add_common(dtt, dtt_o);
  dtt->add_option("--params", dtt_o.params_file, "ansatz parameter file")->required();
  dtt->add_option("--dt", dtt_list, "forward step sizes");
  dtt->add_option("-M,--paths", dtt_o.paths, "paths per step size");

  // validate
  Overrides val_o;
  std::string val_dt = "1/16";
  auto* val = app.add_subcommand("validate", "invariant checks on a model");
  add_common(val, val_o);
  val->add_option("--dt", val_dt, "step size");

  // catalog
  std::string cat_name;
  std::optional<std::string> cat_dir;
  auto* cat = app.add_subcommand("catalog", "print a bundled model document");
  cat->add_option("name", cat_name, "decay, michaelis-menten or futile-cycle")->required();
  cat->add_option("--write-dir", cat_dir, "write <name>.json into this directory instead");

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads > 0) set_worker_count(threads);

    if (*sim) {
      ExperimentConfig c = sim_o.resolve();
      const Model model = load_model(c.model);
      const TimeGrid grid = TimeGrid::from_step_size(model.network.final_time(), parse_dt(sim_dt));
      EnsembleOptions opts;
      opts.keep_values = true;
      const auto res = sample_ensemble(model.network, grid, model.observable, nullptr, c.paths, c.seed, opts);
      std::ostringstream csv_text;
      CsvWriter csv(csv_text, {"path_id", "g_value"});
      for (std::size_t i = 0; i < res.values.size(); ++i) {
        csv << static_cast<std::uint64_t>(i) << res.values[i];
        csv.end_row();
      }
      const fs::path p = out_path(c, sim_out, "simulate.csv");
      write_text_file(p, csv_text.str());
      std::printf("mean %s over %zu paths -> %s\n", format_double(res.weighted.mean()).c_str(), c.paths,
                  p.string().c_str());
    } else if (*learn) {
      if (dt_pl_text) learn_o.dt_pl = parse_dt(*dt_pl_text);
      ExperimentConfig c = learn_o.resolve();
      const Model model = load_model(c.model);
      c.validate(model.network.final_time());
      const TimeGrid grid = TimeGrid::from_step_size(model.network.final_time(), c.dt_pl);
      LearnConfig lc{c.iterations, c.learn_paths, c.step_size, c.seed};
      const LearnResult res =
          adam_learn(model.network, grid, model.observable, initial_ansatz(model.network, model.observable, c.slope), lc);
      std::ostringstream trace;
      write_trace_csv(trace, res.trace);
      write_text_file(out_path(c, trace_out, "trace.csv"), trace.str());
      write_json(out_path(c, params_out, "params.json"),
                 ansatz_to_json({res.best, {c.dt_pl, c.seed, res.best_iteration}}));
      if (res.best_iteration < 0) {
        std::printf("no iteration produced a finite squared_cv (event never observed)\n");
      } else {
        std::printf("best iteration %d of %zu, squared_cv %s\n", res.best_iteration, res.trace.size(),
                    format_double(res.trace[res.best_iteration].squared_cv).c_str());
      }
      if (res.aborted) {
        std::fprintf(stderr, "learning aborted: %s\n", res.abort_reason.c_str());
        return 3;
      }
    } else if (*est) {
      if (dt_f_text) est_o.dt_f = parse_dt(*dt_f_text);
      ExperimentConfig c = est_o.resolve();
      const Model model = load_model(c.model);
      const TimeGrid grid = TimeGrid::from_step_size(model.network.final_time(), c.dt_f);
      if (!c.params_file.empty() && table_in) throw Error("give either --params or --table, not both");
      std::unique_ptr<ControlPolicy> policy;
      std::string source = "tau-leap";
      if (!c.params_file.empty()) {
        policy = std::make_unique<AnsatzPolicy>(model.network, ansatz_from_json(read_json_file(c.params_file)).params,
                                                grid);
        source = c.params_file.string();
      } else if (table_in) {
        std::ifstream in(*table_in);
        if (!in) throw Error("cannot open table '" + *table_in + "'");
        ValueTable table = read_value_table(in);
        if (table.grid.steps != grid.steps) throw Error("table step count does not match --dt-f");
        policy = std::make_unique<TabulatedPolicy>(std::move(table));
        source = *table_in;
      }
      const ISEstimate e = is_mc_estimate(model.network, grid, model.observable, policy.get(), c.paths, c.seed);
      auto doc = estimate_to_json(e);
      doc["policy"] = source;
      if (auto* tp = dynamic_cast<TabulatedPolicy*>(policy.get())) doc["clamped_lookups"] = tp->clamped_lookups();
      write_json(out_path(c, report_out, "estimate.json"), doc);
      std::printf("mean %s  squared_cv %s  M %llu\n", format_double(e.mean).c_str(),
                  format_double(e.squared_cv).c_str(), static_cast<unsigned long long>(e.samples));
    } else if (*dps) {
      ExperimentConfig c = dp_o.resolve();
      const Model model = load_model(c.model);
      const TimeGrid grid = TimeGrid::from_step_size(model.network.final_time(), parse_dt(dp_dt));
      State bounds(dp_bounds.begin(), dp_bounds.end());
      DpSolution sol;
      if (dp_approx) {
        sol = solve_approx_dp(model.network, grid, model.observable, bounds);
      } else {
        TruncationSpec t;
        t.tail_tol = dp_tol;
        t.bounds = bounds;
        sol = solve_exact_dp(model.network, grid, model.observable, t);
      }
      const fs::path p = out_path(c, table_out, "value_table.txt");
      std::ostringstream text;
      write_value_table(text, sol.table);
      write_text_file(p, text.str());
      bool clamped = false;
      const StateBox box(bounds);
      const std::size_t root = box.index(model.network.initial_state(), clamped);
      std::printf("u(0, x0) = %s%s, clamped lookups %llu -> %s\n", format_double(sol.table.slice(0)[root]).c_str(),
                  clamped ? " (x0 outside box)" : "", static_cast<unsigned long long>(sol.clamped_lookups),
                  p.string().c_str());
    } else if (*cmp) {
      if (cmp_dt_pl) cmp_o.dt_pl = parse_dt(*cmp_dt_pl);
      if (cmp_dt_f) cmp_o.dt_f = parse_dt(*cmp_dt_f);
      ExperimentConfig c = cmp_o.resolve();
      const Model model = load_model(c.model);
      const Comparison res = compare_tl_vs_is(c, model);
      auto doc = comparison_to_json(res);
      doc["config"] = config_to_json(c);
      write_json(c.output_dir / "comparison.json", doc);
      if (res.learned) {
        std::ostringstream trace;
        write_trace_csv(trace, res.learning.trace);
        write_text_file(c.output_dir / "trace.csv", trace.str());
        write_json(c.output_dir / "params.json", ansatz_to_json(res.params));
      }
      std::printf("TL mean %s cv2 %s | IS mean %s cv2 %s | reduction %s%s\n", format_double(res.tl.mean).c_str(),
                  format_double(res.tl.squared_cv).c_str(), format_double(res.is.mean).c_str(),
                  format_double(res.is.squared_cv).c_str(),
                  res.reduction_defined ? format_double(res.reduction_factor).c_str() : "undefined",
                  res.tl_reliable ? "" : " (TL estimate unreliable)");
    } else if (*dtt) {
      ExperimentConfig c = dtt_o.resolve();
      const Model model = load_model(c.model);
      const AnsatzFile f = ansatz_from_json(read_json_file(c.params_file));
      const auto rows = dt_transfer_experiment(c, model, f.params, parse_dt_list(dtt_list));
      std::ostringstream text;
      write_transfer_csv(text, rows);
      write_text_file(c.output_dir / "dt_transfer.csv", text.str());
      std::cout << text.str();
    } else if (*val) {
      ExperimentConfig c = val_o.resolve();
      const Model model = load_model(c.model);
      bool ok = true;
      for (const auto& r : validate_model(model, parse_dt(val_dt), c.seed)) {
        std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        ok &= r.passed;
      }
      return ok ? 0 : 1;
    } else if (*cat) {
      const std::string doc = model_document(catalog(cat_name));
      if (cat_dir) {
        write_text_file(fs::path(*cat_dir) / (cat_name + ".json"), doc);
      } else {
        std::cout << doc;
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
