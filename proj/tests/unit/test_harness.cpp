#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "srnis/error.hpp"
#include "srnis/harness.hpp"

using namespace srnis;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("srnis_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("sample planning") {
  CHECK(plan_samples(1.0, 0.01) == 153664);
  CHECK(plan_samples(0.0, 0.01) == 0);
  CHECK(plan_samples(2.5e-3, 1e-3, 2.0) == 40000);
  CHECK_THROWS_AS(plan_samples(1.0, 0.0), Error);
  CHECK_THROWS_AS(plan_samples(-1.0, 0.1), Error);
  // probability 1e-5 at 2.5% relative error needs about 6e8 plain paths
  CHECK(rare_event_samples(1e-5, 0.025) == doctest::Approx(1.96 * 1.96 / (1e-5 * 0.025 * 0.025)));
  CHECK(rare_event_samples(1e-7, 0.016) == doctest::Approx(1.5e11).epsilon(0.01));
  CHECK(bernoulli_squared_cv(0.2) == doctest::Approx(4.0));
  CHECK(std::isnan(bernoulli_squared_cv(0.0)));
}

TEST_CASE("config files and overrides") {
  ExperimentConfig c;
  apply_config(c, nlohmann::json::parse(R"({"model": "futile-cycle", "dt_f": 0.03125, "paths": 500, "seed": 9})"));
  CHECK(c.model == "futile-cycle");
  CHECK(c.dt_f == 0.03125);
  CHECK(c.paths == 500);
  CHECK(c.seed == 9);
  CHECK(c.iterations == 100);
  CHECK_THROWS_AS(apply_config(c, nlohmann::json::parse(R"({"pathz": 3})")), Error);
  CHECK_THROWS_AS(apply_config(c, nlohmann::json::parse(R"({"paths": "many"})")), Error);

  ExperimentConfig back;
  apply_config(back, config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));

  ExperimentConfig bad;
  bad.dt_f = 0.3;
  CHECK_THROWS_AS(bad.validate(1.0), Error);
  bad.dt_f = 0.25;
  bad.learn_paths = 1;
  CHECK_THROWS_AS(bad.validate(1.0), Error);
}

TEST_CASE("output directory from the environment") {
  ::unsetenv(kOutputDirEnv);
  CHECK(default_output_dir() == fs::path("."));
  ::setenv(kOutputDirEnv, "/tmp/srnis-out", 1);
  CHECK(default_output_dir() == fs::path("/tmp/srnis-out"));
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("csv output uses full precision and fixed headers") {
  std::vector<LearningRecord> trace(1);
  trace[0].iteration = 0;
  trace[0].mean = 0.1;
  trace[0].squared_cv = 1.0 / 3.0;
  trace[0].kurtosis = 3.0;
  trace[0].grad_norm = 2.0;
  trace[0].beta = {0.5, -0.25, 1e-300};
  std::ostringstream out;
  write_trace_csv(out, trace);
  CHECK(first_line(out.str()) == "iter,mean,squared_cv,kurtosis,grad_norm,beta_time,beta_space_1,beta_space_2");
  CHECK(out.str().find("0.33333333333333331") != std::string::npos);
  CHECK(out.str().find("0.10000000000000001") != std::string::npos);

  std::ostringstream t;
  write_transfer_csv(t, {});
  CHECK(first_line(t.str()) == "dt_f,mean,variance,squared_cv,kurtosis,M,tl_squared_cv");

  std::ostringstream c;
  CsvWriter w(c, {"a", "b"});
  w << 1.0;
  CHECK_THROWS_AS(w.end_row(), Error);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("bundled model files match the catalog") {
  for (const auto& name : catalog_names()) {
    const fs::path path = fs::path(SRNIS_SOURCE_DIR) / "models" / (name + ".json");
    CAPTURE(name);
    CHECK(slurp(path) == model_document(catalog(name)));
    const Model m = load_model(path.string());
    CHECK(model_document(m) == model_document(catalog(name)));
  }
  CHECK_THROWS_AS(load_model("no-such-model"), Error);
}

TEST_CASE("parameter files keep their provenance") {
  const Model m = catalog("michaelis-menten");
  AnsatzFile f;
  f.params = initial_ansatz(m.network, m.observable, 2.0);
  f.params.set_learnable(std::vector<double>{0.1, -1e-17, 1.0 / 3.0, 2.5, std::nextafter(1.0, 2.0)});
  f.provenance = {1.0 / 16, 42, 17};
  const AnsatzFile back = ansatz_from_json(nlohmann::json::parse(ansatz_to_json(f).dump()));
  CHECK(back.params.learnable() == f.params.learnable());
  CHECK(back.params.b0 == f.params.b0);
  CHECK(back.params.beta0 == f.params.beta0);
  CHECK(back.provenance.dt_pl == 1.0 / 16);
  CHECK(back.provenance.seed == 42);
  CHECK(back.provenance.iteration == 17);
}

TEST_CASE("comparison bookkeeping") {
  const Model m = catalog("decay");
  const fs::path dir = scratch_dir("compare");
  ExperimentConfig c;
  c.iterations = 5;
  c.learn_paths = 2000;
  c.paths = 20000;
  c.seed = 3;
  const Comparison learned = compare_tl_vs_is(c, m);
  CHECK(learned.learned);
  CHECK(learned.learning.trace.size() == 5);
  CHECK(learned.params.provenance.iteration == learned.learning.best_iteration);
  CHECK(learned.work.poisson_draws == 2ull * 20000 * 16);
  CHECK(learned.work.learning_draws == 5ull * 2000 * 16);
  CHECK(learned.work.w_pl == 5.0 * 2000 * 16);
  CHECK(learned.work.w_is_tl == learned.work.w_pl + 20000.0 * 16);
  REQUIRE(learned.reduction_defined);
  CHECK(learned.reduction_factor == learned.tl.squared_cv / learned.is.squared_cv);

  // reading the learned parameters back reproduces both estimates and skips learning
  write_text_file(dir / "params.json", ansatz_to_json(learned.params).dump(2));
  c.params_file = dir / "params.json";
  const Comparison replay = compare_tl_vs_is(c, m);
  CHECK_FALSE(replay.learned);
  CHECK(replay.learning.trace.empty());
  CHECK(replay.work.w_pl == 0.0);
  CHECK(replay.tl.mean == learned.tl.mean);
  CHECK(replay.is.mean == learned.is.mean);
  CHECK(replay.is.variance == learned.is.variance);

  const auto rows = dt_transfer_experiment(c, m, replay.params.params, {1.0 / 16, 1.0 / 32});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].is.mean == replay.is.mean);
  CHECK(rows[0].tl_squared_cv == doctest::Approx(bernoulli_squared_cv(rows[0].is.mean)));
  CHECK(rows[1].is.poisson_draws == 20000ull * 32);
  CHECK_THROWS_AS(dt_transfer_experiment(c, m, replay.params.params, {0.3}), Error);

  const auto doc = comparison_to_json(replay);
  CHECK(doc.at("tl").at("mean").get<double>() == replay.tl.mean);
  fs::remove_all(dir);
}
