#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "vista/ci.hpp"
#include "vista/io.hpp"
#include "vista/learners.hpp"
#include "vista/markov_blanket.hpp"
#include "vista/metrics.hpp"
#include "vista/notears.hpp"
#include "vista/synth.hpp"
#include "vista/voting.hpp"

namespace vista {

class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage(std::move(stage)) {}
  std::string stage;
};

/// Every pipeline knob. All fields have defaults; the CLI overrides them
/// one-for-one and a JSON config file maps field names directly.
struct VistaConfig {
  int n = 30;
  std::string graph_family = "er";  // er | sf
  double h = 3.0;
  int num_samples = 1000;
  double noise_scale = 1.0;
  std::string sem = "linear";  // linear | quadratic
  bool standardize = true;
  double weight_low = 0.5;
  double weight_high = 2.0;

  std::string mb_estimator = "oracle";  // oracle | grow-shrink
  double ci_alpha = 0.01;
  bool mb_symmetrize = false;

  std::string learner = "noisy-oracle";  // oracle | noisy-oracle | notears-lite
  double p = 0.9;
  double q = 0.02;
  double reverse_prob = 0.05;
  double tau = 0.1;
  double omega = 0.3;

  std::string voting_mode = "weighted";  // weighted | naive
  double lambda = 0.5;
  double threshold = 0.7;

  std::uint64_t master_seed = 1;
  int jobs = 1;
  std::string out_dir = "out";
  bool write_artifacts = true;

  // Optional: load instead of generating. truth_path is required by oracle
  // MB/learners when data_path is set.
  std::string data_path;
  std::string truth_path;

  void validate() const {
    if (n < 1) throw std::invalid_argument("config: n >= 1");
    if (graph_family != "er" && graph_family != "sf") {
      throw std::invalid_argument("config: graph_family must be er|sf");
    }
    if (sem != "linear" && sem != "quadratic") {
      throw std::invalid_argument("config: sem must be linear|quadratic");
    }
    if (mb_estimator != "oracle" && mb_estimator != "grow-shrink") {
      throw std::invalid_argument("config: mb_estimator must be oracle|grow-shrink");
    }
    if (learner != "oracle" && learner != "noisy-oracle" && learner != "notears-lite") {
      throw std::invalid_argument("config: unknown learner '" + learner + "'");
    }
    if (voting_mode != "weighted" && voting_mode != "naive") {
      throw std::invalid_argument("config: voting_mode must be weighted|naive");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
      throw std::invalid_argument("config: threshold in (0,1)");
    }
    if (voting_mode == "weighted" && !(lambda > 0.0)) {
      throw std::invalid_argument("config: lambda > 0 in weighted mode");
    }
    if (jobs < 1) throw std::invalid_argument("config: jobs >= 1");
    if (num_samples < 1) throw std::invalid_argument("config: num_samples >= 1");
  }

  VotingParams voting_params() const {
    VotingParams params;
    params.mode = voting_mode == "naive" ? VotingMode::naive : VotingMode::weighted;
    params.lambda = lambda;
    params.threshold = threshold;
    return params;
  }
};

inline void to_json(nlohmann::json& j, const VistaConfig& c) {
  j = nlohmann::json{{"n", c.n},
                     {"graph_family", c.graph_family},
                     {"h", c.h},
                     {"num_samples", c.num_samples},
                     {"noise_scale", c.noise_scale},
                     {"sem", c.sem},
                     {"standardize", c.standardize},
                     {"weight_low", c.weight_low},
                     {"weight_high", c.weight_high},
                     {"mb_estimator", c.mb_estimator},
                     {"ci_alpha", c.ci_alpha},
                     {"mb_symmetrize", c.mb_symmetrize},
                     {"learner", c.learner},
                     {"p", c.p},
                     {"q", c.q},
                     {"reverse_prob", c.reverse_prob},
                     {"tau", c.tau},
                     {"omega", c.omega},
                     {"voting_mode", c.voting_mode},
                     {"lambda", c.lambda},
                     {"threshold", c.threshold},
                     {"master_seed", c.master_seed},
                     {"jobs", c.jobs},
                     {"out_dir", c.out_dir},
                     {"write_artifacts", c.write_artifacts},
                     {"data_path", c.data_path},
                     {"truth_path", c.truth_path}};
}

inline void from_json(const nlohmann::json& j, VistaConfig& c) {
  VistaConfig defaults;
  c = defaults;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("n", c.n);
  get("graph_family", c.graph_family);
  get("h", c.h);
  get("num_samples", c.num_samples);
  get("noise_scale", c.noise_scale);
  get("sem", c.sem);
  get("standardize", c.standardize);
  get("weight_low", c.weight_low);
  get("weight_high", c.weight_high);
  get("mb_estimator", c.mb_estimator);
  get("ci_alpha", c.ci_alpha);
  get("mb_symmetrize", c.mb_symmetrize);
  get("learner", c.learner);
  get("p", c.p);
  get("q", c.q);
  get("reverse_prob", c.reverse_prob);
  get("tau", c.tau);
  get("omega", c.omega);
  get("voting_mode", c.voting_mode);
  get("lambda", c.lambda);
  get("threshold", c.threshold);
  get("master_seed", c.master_seed);
  get("jobs", c.jobs);
  get("out_dir", c.out_dir);
  get("write_artifacts", c.write_artifacts);
  get("data_path", c.data_path);
  get("truth_path", c.truth_path);
}

/// FNV-1a over the fields upstream of voting. Votes cached under this hash
/// stay valid across lambda/threshold/mode changes and any parallelism.
inline std::uint64_t upstream_config_hash(const VistaConfig& c) {
  std::string blob;
  auto add = [&blob](const std::string& s) {
    blob += s;
    blob += '\x1f';
  };
  add(std::to_string(c.n));
  add(c.graph_family);
  add(std::to_string(c.h));
  add(std::to_string(c.num_samples));
  add(std::to_string(c.noise_scale));
  add(c.sem);
  add(c.standardize ? "1" : "0");
  add(std::to_string(c.weight_low));
  add(std::to_string(c.weight_high));
  add(c.mb_estimator);
  add(std::to_string(c.ci_alpha));
  add(c.mb_symmetrize ? "1" : "0");
  add(c.learner);
  add(std::to_string(c.p));
  add(std::to_string(c.q));
  add(std::to_string(c.reverse_prob));
  add(std::to_string(c.tau));
  add(std::to_string(c.omega));
  add(std::to_string(c.master_seed));
  add(c.data_path);
  add(c.truth_path);

  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char byte : blob) {
    hash ^= byte;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct MetricReport {
  double fdr = 0.0, tpr = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  long long shd = 0;
  Confusion counts;
};

inline MetricReport metric_report(const Digraph& est, const Digraph& truth) {
  MetricReport report;
  report.counts = confusion(est, truth);
  report.fdr = fdr(report.counts);
  report.tpr = tpr(report.counts);
  report.precision = precision(report.counts);
  report.recall = recall(report.counts);
  report.f1 = f1(report.counts);
  report.shd = shd(report.counts);
  return report;
}

inline nlohmann::json metric_json(const MetricReport& m) {
  return {{"fdr", m.fdr},
          {"tpr", m.tpr},
          {"shd", m.shd},
          {"f1", m.f1},
          {"precision", m.precision},
          {"recall", m.recall},
          {"tp", m.counts.tp},
          {"fp_extra", m.counts.fp_extra},
          {"fp_reverse", m.counts.fp_reverse},
          {"fn", m.counts.fn}};
}

struct RunReport {
  VistaConfig config;
  std::vector<StageTime> timings;
  int mb_size_min = 0, mb_size_max = 0;
  double mb_size_mean = 0.0;
  long long total_votes = 0;
  int pairs_with_votes = 0;
  long long min_occurrence = 0;  // over pairs with votes
  long long max_occurrence = 0;
  MergeDiagnostics merge_diagnostics;
  std::vector<std::tuple<int, int, double>> fas_removed;
  std::vector<int> fas_order;
  std::vector<LearnerFailure> learner_failures;
  std::optional<MetricReport> metrics;
  std::map<std::string, std::string> artifacts;
};

struct PipelineResult {
  Digraph truth;              // empty when no ground truth available
  bool has_truth = false;
  Digraph final_dag;
  WeightedDigraph final_weighted;
  VoteTally tally;
  MergeResult merge;
  RunReport report;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTime>& sink) : sink_(sink) {}
  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, start);
      } else {
        auto value = fn();
        record(stage, start);
        return value;
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(stage, e.what());
    }
  }

 private:
  void record(const std::string& stage,
              std::chrono::steady_clock::time_point start) {
    const auto end = std::chrono::steady_clock::now();
    sink_.push_back({stage, std::chrono::duration<double>(end - start).count()});
  }
  std::vector<StageTime>& sink_;
};

inline LocalLearner build_learner(const VistaConfig& config, const Digraph* truth) {
  if (config.learner == "oracle" || config.learner == "noisy-oracle") {
    if (truth == nullptr) {
      throw std::invalid_argument("learner '" + config.learner +
                                  "' requires a ground-truth graph");
    }
    if (config.learner == "oracle") return make_oracle_learner(*truth);
    return NoisyOracleLearner(*truth, config.p, config.q, config.reverse_prob);
  }
  NotearsOptions opt;
  opt.tau = config.tau;
  opt.omega = config.omega;
  return [opt](const SubgraphTask& task) {
    if (task.local_data.rows() == 0) {
      throw std::invalid_argument("notears-lite requires data");
    }
    return notears_lite_learn(task.local_data, opt);
  };
}

}  // namespace detail

/// End-to-end run: generate or load data, identify blankets, learn local
/// graphs in parallel, tally, merge, score against the truth when available,
/// and persist artifacts. Deterministic for a fixed master_seed at any
/// parallelism degree; artifacts are written as each stage completes so a
/// failing stage retains everything upstream of it.
inline PipelineResult run_pipeline(const VistaConfig& config) {
  config.validate();
  PipelineResult result;
  result.report.config = config;
  detail::StageClock clock(result.report.timings);
  const std::filesystem::path out_dir(config.out_dir);
  const bool write = config.write_artifacts;
  auto artifact = [&](const std::string& name) {
    const std::string path = (out_dir / name).string();
    result.report.artifacts[name] = path;
    return path;
  };
  if (write) std::filesystem::create_directories(out_dir);

  // --- truth + data -------------------------------------------------------
  std::optional<WeightedScm> scm;
  DataMatrix data;
  clock.run("generate", [&] {
    if (!config.truth_path.empty()) {
      const EdgeListFile file = load_edge_tsv(config.truth_path);
      result.truth = file.digraph();
      result.has_truth = true;
      if (file.weighted && config.data_path.empty()) {
        // A weighted truth file doubles as the SCM spec.
        WeightedScm loaded;
        loaded.graph = result.truth;
        loaded.noise_scale = config.noise_scale;
        for (const auto& [u, v, w] : file.edges) loaded.weights[{u, v}] = w;
        scm = std::move(loaded);
      }
    } else if (config.data_path.empty()) {
      Digraph truth(1);  // n = 1: a single node, no pairs to decide
      if (config.n > 1) {
        truth = config.graph_family == "er"
                    ? gen_er_dag(config.n, config.h, derive_seed(config.master_seed, 1))
                    : gen_sf_dag(config.n, config.h, derive_seed(config.master_seed, 1));
      }
      scm = sample_weights(truth, config.weight_low, config.weight_high,
                           derive_seed(config.master_seed, 2), config.noise_scale);
      result.truth = std::move(truth);
      result.has_truth = true;
    }
    if (!config.data_path.empty()) {
      data = load_data_csv(config.data_path);
    } else if (scm) {
      const auto noise_seed = derive_seed(config.master_seed, 3);
      data = config.sem == "linear"
                 ? sample_linear_sem(*scm, config.num_samples, noise_seed)
                 : sample_quadratic_sem(*scm, config.num_samples, noise_seed);
    }
    if (config.standardize && data.size() > 0) data = standardize(data);
  });
  const int n = result.has_truth ? result.truth.node_count()
                                 : static_cast<int>(data.cols());
  if (write) {
    if (scm) {
      // truth.tsv keeps the signed SEM coefficients.
      auto out = detail::open_out(artifact("truth.tsv"));
      out << "# n=" << n << "\n";
      for (const auto& [edge, w] : scm->weights) {
        out << edge.first << "\t" << edge.second << "\t" << detail::format_double(w)
            << "\n";
      }
      nlohmann::json sidecar{{"n", n},
                             {"noise_scale", scm->noise_scale},
                             {"seed", config.master_seed}};
      detail::open_out(artifact("truth.json")) << sidecar.dump(2) << "\n";
    } else if (result.has_truth) {
      save_edge_tsv(artifact("truth.tsv"), result.truth);
    }
    if (data.size() > 0) save_data_csv(artifact("data.csv"), data);
  }

  // --- markov blankets ----------------------------------------------------
  std::vector<MarkovBlanket> blankets = clock.run("mb", [&] {
    std::function<MarkovBlanket(int)> estimator;
    if (config.mb_estimator == "oracle") {
      if (!result.has_truth) {
        throw std::invalid_argument("oracle MB estimator requires a ground-truth graph");
      }
      const Digraph& truth = result.truth;
      estimator = [&truth](int v) { return oracle_mb(truth, v); };
    } else {
      if (data.size() == 0) {
        throw std::invalid_argument("grow-shrink MB estimator requires data");
      }
      const auto ci = make_fisher_z_predicate(data, config.ci_alpha);
      const int cols = static_cast<int>(data.cols());
      estimator = [ci, cols](int v) { return grow_shrink_mb(ci, cols, v); };
    }
    auto mbs = all_markov_blankets(estimator, n, config.jobs);
    if (config.mb_symmetrize) symmetrize_or(mbs);
    return mbs;
  });
  if (!blankets.empty()) {
    int lo = n, hi = 0;
    double sum = 0.0;
    for (const auto& mb : blankets) {
      const int size = static_cast<int>(mb.members.size());
      lo = std::min(lo, size);
      hi = std::max(hi, size);
      sum += size;
    }
    result.report.mb_size_min = lo;
    result.report.mb_size_max = hi;
    result.report.mb_size_mean = sum / static_cast<double>(blankets.size());
  }
  if (write) save_mb_json(artifact("mb.json"), blankets);

  // --- local learning -----------------------------------------------------
  LearnResult learned = clock.run("learn", [&] {
    const LocalLearner learner =
        detail::build_learner(config, result.has_truth ? &result.truth : nullptr);
    const DataMatrix* data_ptr = data.size() > 0 ? &data : nullptr;
    return learn_all_subgraphs(learner, blankets, data_ptr, config.master_seed,
                               config.jobs);
  });
  result.report.learner_failures = learned.failures;
  if (write) save_locals_json(artifact("locals.json"), learned.locals);

  // --- tally --------------------------------------------------------------
  result.tally = clock.run("tally", [&] { return tally_votes(learned.locals, n); });
  result.report.total_votes = result.tally.total_votes();
  long long min_occ = 0, max_occ = 0;
  int pairs = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const long long m = result.tally.occurrence(i, j);
      if (m > 0) {
        ++pairs;
        min_occ = (pairs == 1) ? m : std::min(min_occ, m);
        max_occ = std::max(max_occ, m);
      }
    }
  }
  result.report.pairs_with_votes = pairs;
  result.report.min_occurrence = min_occ;
  result.report.max_occurrence = max_occ;
  if (write) {
    save_votes_csv(artifact("votes.csv"), result.tally, upstream_config_hash(config));
  }

  // --- merge --------------------------------------------------------------
  result.merge = clock.run("merge", [&] { return merge(result.tally, config.voting_params()); });
  result.final_dag = result.merge.dag;
  result.final_weighted = result.merge.final_weighted;
  result.report.merge_diagnostics = result.merge.diagnostics;
  result.report.fas_removed = result.merge.fas.removed_edges;
  result.report.fas_order = result.merge.fas.order;
  if (write) {
    save_edge_tsv(artifact("merged.tsv"), result.merge.merged);
    save_edge_tsv(artifact("final.tsv"), result.final_weighted);
  }

  // --- metrics ------------------------------------------------------------
  if (result.has_truth) {
    clock.run("metrics", [&] {
      result.report.metrics = metric_report(result.final_dag, result.truth);
    });
  }

  if (write) {
    nlohmann::json report;
    report["config"] = config;
    report["config_hash"] = upstream_config_hash(config);
    nlohmann::json timings = nlohmann::json::array();
    for (const auto& t : result.report.timings) {
      timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    }
    report["timings"] = timings;
    report["mb"] = {{"min", result.report.mb_size_min},
                    {"max", result.report.mb_size_max},
                    {"mean", result.report.mb_size_mean}};
    report["votes"] = {{"total", result.report.total_votes},
                       {"pairs_with_votes", result.report.pairs_with_votes},
                       {"min_occurrence", result.report.min_occurrence},
                       {"max_occurrence", result.report.max_occurrence}};
    nlohmann::json removed = nlohmann::json::array();
    for (const auto& [u, v, w] : result.report.fas_removed) removed.push_back({u, v, w});
    report["fas"] = {{"order", result.report.fas_order}, {"removed", removed}};
    report["merge"] = {
        {"candidate_edges", result.report.merge_diagnostics.candidate_edges},
        {"removed_by_fas", result.report.merge_diagnostics.removed_by_fas},
        {"removed_by_threshold", result.report.merge_diagnostics.removed_by_threshold},
        {"score_histogram", result.report.merge_diagnostics.score_histogram}};
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : result.report.learner_failures) {
      failures.push_back({{"node", f.node}, {"message", f.message}});
    }
    report["learner_failures"] = failures;
    if (result.report.metrics) report["metrics"] = metric_json(*result.report.metrics);
    nlohmann::json artifacts = nlohmann::json::object();
    for (const auto& [name, path] : result.report.artifacts) artifacts[name] = path;
    report["artifacts"] = artifacts;
    detail::open_out(artifact("report.json")) << report.dump(2) << "\n";
  }
  return result;
}

struct SweepRow {
  double lambda = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fdr = 0.0;
  double tpr = 0.0;
  double f1 = 0.0;
  long long shd = 0;
};

/// Re-merges a cached tally at one lambda; no learner is involved.
inline SweepRow evaluate_lambda(const VoteTally& tally, const Digraph& truth,
                                double lambda, double threshold) {
  VotingParams params;
  params.mode = VotingMode::weighted;
  params.lambda = lambda;
  params.threshold = threshold;
  const MergeResult merged = merge(tally, params);
  const MetricReport m = metric_report(merged.dag, truth);
  return {lambda, m.precision, m.recall, m.fdr, m.tpr, m.f1, m.shd};
}

inline void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  auto out = detail::open_out(path);
  out << "lambda,precision,recall,fdr,tpr,f1,shd\n";
  for (const auto& r : rows) {
    out << detail::format_double(r.lambda) << "," << detail::format_double(r.precision)
        << "," << detail::format_double(r.recall) << "," << detail::format_double(r.fdr)
        << "," << detail::format_double(r.tpr) << "," << detail::format_double(r.f1)
        << "," << r.shd << "\n";
  }
}

/// Lambda sweep: one learning pass builds the tally, then every grid value is
/// a re-merge. Learners are never re-invoked.
inline std::vector<SweepRow> sweep_lambda(const VistaConfig& config,
                                          const std::vector<double>& grid) {
  VistaConfig base = config;
  base.voting_mode = "weighted";
  PipelineResult run = run_pipeline(base);
  if (!run.has_truth) {
    throw PipelineError("sweep", "lambda sweep needs ground truth for metrics");
  }
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double lambda : grid) {
    rows.push_back(evaluate_lambda(run.tally, run.truth, lambda, config.threshold));
  }
  if (config.write_artifacts) {
    save_sweep_csv((std::filesystem::path(config.out_dir) / "sweep.csv").string(), rows);
  }
  return rows;
}

/// Tally straight from persisted local graphs (merge subcommand path).
inline VoteTally tally_votes(const std::vector<LocalEdges>& locals, int n) {
  VoteTally tally(n);
  for (const auto& lg : locals) {
    for (const auto& [u, v] : lg.edges) tally.add_vote(u, v);
  }
  return tally;
}

}  // namespace vista
