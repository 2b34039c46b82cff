#include <atomic>
#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "test_util.hpp"
#include "vista/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("vista_pipe_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

vista::VistaConfig oracle_config(const TempDir& tmp) {
  vista::VistaConfig config;
  config.n = 25;
  config.graph_family = "er";
  config.h = 3.0;
  config.num_samples = 50;
  config.mb_estimator = "oracle";
  config.learner = "oracle";
  config.voting_mode = "weighted";
  config.lambda = 1.0;  // inside the feasible range for m >= 2 at t = 0.5
  config.threshold = 0.5;
  config.master_seed = 97;
  config.out_dir = tmp.file("out");
  return config;
}

}  // namespace

TEST_CASE("exact recovery with oracle components") {
  TempDir tmp;
  const auto config = oracle_config(tmp);
  const auto result = vista::run_pipeline(config);
  REQUIRE(result.has_truth);
  REQUIRE(result.report.metrics.has_value());
  CHECK(result.report.metrics->shd == 0);
  CHECK(result.final_dag == result.truth);

  for (const char* name : {"truth.tsv", "data.csv", "mb.json", "locals.json",
                           "votes.csv", "merged.tsv", "final.tsv", "report.json"}) {
    CHECK(fs::exists(fs::path(config.out_dir) / name));
  }
}

TEST_CASE("single-node pipeline degenerates cleanly") {
  TempDir tmp;
  auto config = oracle_config(tmp);
  config.n = 1;
  const auto result = vista::run_pipeline(config);
  CHECK(result.final_dag.node_count() == 1);
  CHECK(result.final_dag.edge_count() == 0);
  REQUIRE(result.report.metrics.has_value());
  CHECK(result.report.metrics->shd == 0);
  CHECK(result.report.metrics->f1 == 0.0);  // zero-denominator convention
}

TEST_CASE("pipeline output is byte-identical across parallelism") {
  TempDir tmp1, tmp2;
  auto serial = oracle_config(tmp1);
  serial.learner = "noisy-oracle";
  serial.p = 0.85;
  serial.q = 0.05;
  serial.jobs = 1;
  auto parallel = serial;
  parallel.out_dir = tmp2.file("out");
  parallel.jobs = 8;
  vista::run_pipeline(serial);
  vista::run_pipeline(parallel);
  CHECK(read_file(serial.out_dir + "/final.tsv") ==
        read_file(parallel.out_dir + "/final.tsv"));
  CHECK(read_file(serial.out_dir + "/votes.csv") ==
        read_file(parallel.out_dir + "/votes.csv"));
}

TEST_CASE("sweep rows match run_pipeline at the same lambda") {
  TempDir tmp;
  auto config = oracle_config(tmp);
  config.learner = "noisy-oracle";
  config.p = 0.9;
  config.q = 0.02;
  config.write_artifacts = false;

  const auto rows = vista::sweep_lambda(config, {config.lambda});
  REQUIRE(rows.size() == 1);
  const auto direct = vista::run_pipeline(config);
  REQUIRE(direct.report.metrics.has_value());
  CHECK(rows[0].f1 == direct.report.metrics->f1);
  CHECK(rows[0].shd == direct.report.metrics->shd);
  CHECK(rows[0].precision == direct.report.metrics->precision);
}

TEST_CASE("sweep plateaus once lambda * min(m) >= 40") {
  TempDir tmp;
  auto config = oracle_config(tmp);
  config.learner = "noisy-oracle";
  config.p = 0.9;
  config.q = 0.02;
  config.threshold = 0.5;
  config.write_artifacts = false;
  const auto run = vista::run_pipeline(config);
  const long long min_m = std::max<long long>(1, run.report.min_occurrence);
  const double base = 40.0 / static_cast<double>(min_m);
  const auto rows = vista::sweep_lambda(config, {base, base * 1.1});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].precision == rows[1].precision);
  CHECK(rows[0].recall == rows[1].recall);
  CHECK(rows[0].shd == rows[1].shd);
}

TEST_CASE("lambda evaluation reuses a cached tally without learner calls") {
  // The divide stage runs once; every lambda is a re-merge of the tally.
  const auto truth = vista::gen_er_dag(20, 3.0, 11);
  std::vector<vista::MarkovBlanket> blankets;
  for (int v = 0; v < 20; ++v) blankets.push_back(vista::oracle_mb(truth, v));

  std::atomic<int> learner_calls{0};
  const vista::NoisyOracleLearner noisy(truth, 0.9, 0.02, 0.0);
  const vista::LocalLearner counting = [&](const vista::SubgraphTask& task) {
    ++learner_calls;
    return noisy(task);
  };
  const auto learned = vista::learn_all_subgraphs(counting, blankets, nullptr, 3, 1);
  const auto tally = vista::tally_votes(learned.locals, 20);
  CHECK(learner_calls == 20);

  for (double lambda : {0.3, 0.5, 0.8, 1.2, 2.0}) {
    vista::evaluate_lambda(tally, truth, lambda, 0.5);
  }
  CHECK(learner_calls == 20);  // merges never re-invoke the learner
}

TEST_CASE("stage failures carry the stage name and keep partial artifacts") {
  TempDir tmp;
  auto config = oracle_config(tmp);
  config.data_path = tmp.file("missing.csv");
  try {
    vista::run_pipeline(config);
    FAIL("expected PipelineError");
  } catch (const vista::PipelineError& e) {
    CHECK(e.stage == "generate");
  }

  // Failure mid-pipeline: zero-variance data with grow-shrink MB.
  auto broken = oracle_config(tmp);
  broken.out_dir = tmp.file("broken");
  broken.mb_estimator = "grow-shrink";
  {
    std::ofstream out(tmp.file("flat.csv"));
    out << "x0,x1\n";
    for (int i = 0; i < 50; ++i) out << "1.0,2.0\n";
  }
  broken.data_path = tmp.file("flat.csv");
  broken.truth_path.clear();
  broken.standardize = true;
  CHECK_THROWS_AS(vista::run_pipeline(broken), vista::PipelineError);
}

TEST_CASE("config json round trip and overrides") {
  vista::VistaConfig config;
  config.n = 42;
  config.learner = "notears-lite";
  config.lambda = 0.75;
  nlohmann::json j = config;
  const auto back = j.get<vista::VistaConfig>();
  CHECK(back.n == 42);
  CHECK(back.learner == "notears-lite");
  CHECK(back.lambda == 0.75);

  // Partial JSON keeps defaults elsewhere.
  const auto partial = nlohmann::json{{"n", 7}}.get<vista::VistaConfig>();
  CHECK(partial.n == 7);
  CHECK(partial.threshold == 0.7);

  // The upstream hash ignores downstream and execution-only fields.
  auto a = config;
  auto b = config;
  b.lambda = 2.0;
  b.threshold = 0.2;
  b.jobs = 8;
  b.out_dir = "elsewhere";
  CHECK(vista::upstream_config_hash(a) == vista::upstream_config_hash(b));
  b.master_seed = 123;
  CHECK(vista::upstream_config_hash(a) != vista::upstream_config_hash(b));
}

TEST_CASE("grow-shrink + notears pipeline runs end to end") {
  TempDir tmp;
  vista::VistaConfig config;
  config.n = 8;
  config.h = 1.5;
  config.num_samples = 1200;
  config.standardize = false;  // keep the scale signal for the local learner
  config.mb_estimator = "grow-shrink";
  config.learner = "notears-lite";
  config.voting_mode = "weighted";
  config.lambda = 1.0;
  config.threshold = 0.5;
  config.master_seed = 5;
  config.out_dir = tmp.file("out");
  const auto result = vista::run_pipeline(config);
  CHECK(vista::is_acyclic(result.final_dag));
  REQUIRE(result.report.metrics.has_value());
  CHECK(result.report.metrics->f1 > 0.3);  // loose sanity, not a benchmark
}

TEST_CASE("divide-phase wall time scales with the worker pool") {
  // Coarse sanity: learn-stage time with k workers stays within
  // (1/min(k, cores) + 0.35) of the serial time for n >= 100.
  TempDir tmp;
  vista::VistaConfig config;
  config.n = 100;
  config.h = 3.0;
  config.num_samples = 600;
  config.mb_estimator = "oracle";
  config.learner = "notears-lite";
  config.master_seed = 31;
  config.write_artifacts = false;
  config.out_dir = tmp.file("out");

  auto learn_seconds = [](const vista::PipelineResult& result) {
    for (const auto& t : result.report.timings) {
      if (t.stage == "learn") return t.seconds;
    }
    return 0.0;
  };
  config.jobs = 1;
  const double serial = learn_seconds(vista::run_pipeline(config));
  const int cores = static_cast<int>(std::thread::hardware_concurrency());
  config.jobs = std::max(2, std::min(4, cores));
  const double parallel = learn_seconds(vista::run_pipeline(config));
  const double bound =
      (1.0 / std::min(config.jobs, std::max(1, cores)) + 0.35) * serial;
  CHECK(parallel <= std::max(bound, serial * 1.35));
}
