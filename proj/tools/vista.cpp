// vista: divide-and-conquer causal structure learning CLI.
//
// Subcommands compose through files: generate -> mb -> learn -> merge, or run
// everything at once with `pipeline`. `sweep-lambda` re-merges cached votes,
// `theory` exposes the bound calculators, `eval` scores an estimate.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vista/ci.hpp"
#include "vista/io.hpp"
#include "vista/pipeline.hpp"
#include "vista/theory.hpp"

namespace {

using nlohmann::json;

struct ConfigCli {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda, threshold, h, ci_alpha, p, q, reverse_prob, tau, omega,
      noise_scale, weight_low, weight_high;
  std::optional<int> n, jobs, num_samples;
  std::optional<std::string> learner, mb, out, family, sem, mode, data_path, truth_path;
  std::optional<bool> standardize, mb_symmetrize;
};

void attach_config_options(CLI::App* cmd, ConfigCli& cli) {
  cmd->add_option("--config", cli.config_path, "JSON config file; flags override fields");
  cmd->add_option("--seed", cli.seed, "master seed");
  cmd->add_option("--lambda", cli.lambda, "weighted-voting lambda");
  cmd->add_option("--threshold,-t", cli.threshold, "global decision threshold t");
  cmd->add_option("--learner", cli.learner, "oracle | noisy-oracle | notears-lite");
  cmd->add_option("--mb", cli.mb, "MB estimator: oracle | grow-shrink");
  cmd->add_option("--jobs,-j", cli.jobs, "parallelism degree");
  cmd->add_option("--out,-o", cli.out, "output directory");
  cmd->add_option("--n", cli.n, "node count");
  cmd->add_option("--family", cli.family, "graph family: er | sf");
  cmd->add_option("--h", cli.h, "average degree");
  cmd->add_option("--samples,-N", cli.num_samples, "observational sample count");
  cmd->add_option("--sem", cli.sem, "linear | quadratic");
  cmd->add_option("--noise-scale", cli.noise_scale, "SEM noise scale");
  cmd->add_option("--weight-low", cli.weight_low, "min |edge weight|");
  cmd->add_option("--weight-high", cli.weight_high, "max |edge weight|");
  cmd->add_option("--standardize", cli.standardize, "standardize data columns");
  cmd->add_option("--mode", cli.mode, "voting mode: weighted | naive");
  cmd->add_option("--ci-alpha", cli.ci_alpha, "Fisher-z significance level");
  cmd->add_option("--mb-symmetrize", cli.mb_symmetrize, "OR-symmetrize estimated MBs");
  cmd->add_option("--p", cli.p, "noisy-oracle true-edge keep probability");
  cmd->add_option("--q", cli.q, "noisy-oracle spurious-edge probability");
  cmd->add_option("--reverse-prob", cli.reverse_prob, "noisy-oracle reversal probability");
  cmd->add_option("--tau", cli.tau, "notears-lite l1 penalty");
  cmd->add_option("--omega", cli.omega, "notears-lite edge threshold");
  cmd->add_option("--data", cli.data_path, "load data.csv instead of generating");
  cmd->add_option("--truth", cli.truth_path, "load truth.tsv instead of generating");
}

vista::VistaConfig resolve_config(const ConfigCli& cli) {
  vista::VistaConfig config;
  if (!cli.config_path.empty()) {
    json j;
    vista::detail::open_in(cli.config_path) >> j;
    config = j.get<vista::VistaConfig>();
  }
  auto apply = [](auto& field, const auto& override_value) {
    if (override_value) field = *override_value;
  };
  apply(config.master_seed, cli.seed);
  apply(config.lambda, cli.lambda);
  apply(config.threshold, cli.threshold);
  apply(config.learner, cli.learner);
  apply(config.mb_estimator, cli.mb);
  apply(config.jobs, cli.jobs);
  apply(config.out_dir, cli.out);
  apply(config.n, cli.n);
  apply(config.graph_family, cli.family);
  apply(config.h, cli.h);
  apply(config.num_samples, cli.num_samples);
  apply(config.sem, cli.sem);
  apply(config.noise_scale, cli.noise_scale);
  apply(config.weight_low, cli.weight_low);
  apply(config.weight_high, cli.weight_high);
  apply(config.standardize, cli.standardize);
  apply(config.voting_mode, cli.mode);
  apply(config.ci_alpha, cli.ci_alpha);
  apply(config.mb_symmetrize, cli.mb_symmetrize);
  apply(config.p, cli.p);
  apply(config.q, cli.q);
  apply(config.reverse_prob, cli.reverse_prob);
  apply(config.tau, cli.tau);
  apply(config.omega, cli.omega);
  apply(config.data_path, cli.data_path);
  apply(config.truth_path, cli.truth_path);
  return config;
}

std::filesystem::path out_path(const vista::VistaConfig& config, const std::string& name) {
  return std::filesystem::path(config.out_dir) / name;
}

int cmd_generate(const vista::VistaConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  vista::Digraph truth =
      config.graph_family == "er"
          ? vista::gen_er_dag(config.n, config.h, vista::derive_seed(config.master_seed, 1))
          : vista::gen_sf_dag(config.n, config.h, vista::derive_seed(config.master_seed, 1));
  const auto scm =
      vista::sample_weights(truth, config.weight_low, config.weight_high,
                            vista::derive_seed(config.master_seed, 2), config.noise_scale);
  vista::DataMatrix data =
      config.sem == "linear"
          ? vista::sample_linear_sem(scm, config.num_samples,
                                     vista::derive_seed(config.master_seed, 3))
          : vista::sample_quadratic_sem(scm, config.num_samples,
                                        vista::derive_seed(config.master_seed, 3));
  if (config.standardize) data = vista::standardize(data);

  auto out = vista::detail::open_out(out_path(config, "truth.tsv").string());
  out << "# n=" << truth.node_count() << "\n";
  for (const auto& [edge, w] : scm.weights) {
    out << edge.first << "\t" << edge.second << "\t" << vista::detail::format_double(w)
        << "\n";
  }
  json sidecar{{"n", truth.node_count()},
               {"noise_scale", scm.noise_scale},
               {"seed", config.master_seed}};
  vista::detail::open_out(out_path(config, "truth.json").string()) << sidecar.dump(2) << "\n";
  vista::save_data_csv(out_path(config, "data.csv").string(), data);
  std::cout << "wrote " << out_path(config, "truth.tsv").string() << " ("
            << truth.edge_count() << " edges), data.csv (" << data.rows() << "x"
            << data.cols() << ")\n";
  return 0;
}

int cmd_mb(const vista::VistaConfig& config) {
  std::vector<vista::MarkovBlanket> blankets;
  if (config.mb_estimator == "oracle") {
    const std::string truth_path = !config.truth_path.empty()
                                       ? config.truth_path
                                       : out_path(config, "truth.tsv").string();
    const vista::Digraph truth = vista::load_edge_tsv(truth_path).digraph();
    blankets = vista::all_markov_blankets(
        [&truth](int v) { return vista::oracle_mb(truth, v); }, truth.node_count(),
        config.jobs);
  } else {
    const std::string data_path = !config.data_path.empty()
                                      ? config.data_path
                                      : out_path(config, "data.csv").string();
    const vista::DataMatrix data = vista::load_data_csv(data_path);
    const auto ci = vista::make_fisher_z_predicate(data, config.ci_alpha);
    const int n = static_cast<int>(data.cols());
    blankets = vista::all_markov_blankets(
        [&](int v) { return vista::grow_shrink_mb(ci, n, v); }, n, config.jobs);
  }
  if (config.mb_symmetrize) vista::symmetrize_or(blankets);
  std::filesystem::create_directories(config.out_dir);
  vista::save_mb_json(out_path(config, "mb.json").string(), blankets);
  std::cout << "wrote " << out_path(config, "mb.json").string() << "\n";
  return 0;
}

int cmd_learn(const vista::VistaConfig& config) {
  const auto blankets = vista::load_mb_json(out_path(config, "mb.json").string());
  std::optional<vista::Digraph> truth;
  if (config.learner == "oracle" || config.learner == "noisy-oracle") {
    const std::string truth_path = !config.truth_path.empty()
                                       ? config.truth_path
                                       : out_path(config, "truth.tsv").string();
    truth = vista::load_edge_tsv(truth_path).digraph();
  }
  vista::DataMatrix data;
  if (config.learner == "notears-lite") {
    const std::string data_path = !config.data_path.empty()
                                      ? config.data_path
                                      : out_path(config, "data.csv").string();
    data = vista::load_data_csv(data_path);
  }
  const vista::LocalLearner learner =
      vista::detail::build_learner(config, truth ? &*truth : nullptr);
  const auto learned =
      vista::learn_all_subgraphs(learner, blankets, data.size() > 0 ? &data : nullptr,
                                 config.master_seed, config.jobs);
  vista::save_locals_json(out_path(config, "locals.json").string(), learned.locals);
  std::cout << "wrote " << out_path(config, "locals.json").string();
  if (!learned.failures.empty()) {
    std::cout << " (" << learned.failures.size() << " subgraph failures)";
  }
  std::cout << "\n";
  return 0;
}

int cmd_merge(const vista::VistaConfig& config) {
  vista::VoteTally tally;
  const auto votes_path = out_path(config, "votes.csv").string();
  const auto locals_path = out_path(config, "locals.json").string();
  if (std::filesystem::exists(locals_path)) {
    const auto locals = vista::load_locals_json(locals_path);
    int n = 0;
    for (const auto& lg : locals) {
      n = std::max(n, lg.node + 1);
      for (const auto& [u, v] : lg.edges) n = std::max({n, u + 1, v + 1});
    }
    n = std::max(n, config.n);
    tally = vista::tally_votes(locals, n);
    vista::save_votes_csv(votes_path, tally, vista::upstream_config_hash(config));
  } else {
    tally = vista::load_votes_csv(votes_path).tally;
  }
  const vista::MergeResult merged = vista::merge(tally, config.voting_params());
  vista::save_edge_tsv(out_path(config, "merged.tsv").string(), merged.merged);
  vista::save_edge_tsv(out_path(config, "final.tsv").string(), merged.final_weighted);
  vista::save_score_csv(out_path(config, "scores.csv").string(), merged.scores);
  json removed = json::array();
  for (const auto& [u, v, w] : merged.fas.removed_edges) removed.push_back({u, v, w});
  const json diagnostics{{"candidate_edges", merged.diagnostics.candidate_edges},
                         {"removed_by_fas", merged.diagnostics.removed_by_fas},
                         {"removed_by_threshold", merged.diagnostics.removed_by_threshold},
                         {"score_histogram", merged.diagnostics.score_histogram},
                         {"fas", {{"order", merged.fas.order}, {"removed", removed}}}};
  vista::detail::open_out(out_path(config, "merge.json").string())
      << diagnostics.dump(2) << "\n";
  std::cout << "final DAG: " << merged.dag.edge_count() << " edges (fas removed "
            << merged.diagnostics.removed_by_fas << ", threshold removed "
            << merged.diagnostics.removed_by_threshold << ")\n";
  return 0;
}

int cmd_pipeline(const vista::VistaConfig& config) {
  const auto result = vista::run_pipeline(config);
  json summary;
  summary["final_edges"] = result.final_dag.edge_count();
  if (result.report.metrics) summary["metrics"] = vista::metric_json(*result.report.metrics);
  summary["report"] = out_path(config, "report.json").string();
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const vista::VistaConfig& config, std::vector<double> grid, int grid_count) {
  if (grid.empty()) {
    // Default grid: geometric sweep across the feasible interval for the
    // smallest observed occurrence, extended into the plateau.
    vista::VistaConfig probe = config;
    probe.write_artifacts = false;
    const auto run = vista::run_pipeline(probe);
    const long long m = std::max<long long>(1, run.report.min_occurrence);
    const auto range = vista::lambda_range(m, config.threshold, 0.05);
    const double lo = range.lambda_min * 1.05;
    const double hi = 44.0 / static_cast<double>(m);
    const int count = std::max(grid_count, 2);
    for (int i = 0; i < count; ++i) {
      grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    }
  }
  const auto votes_path = out_path(config, "votes.csv").string();
  const auto truth_path = out_path(config, "truth.tsv").string();
  std::vector<vista::SweepRow> rows;
  if (std::filesystem::exists(votes_path) && std::filesystem::exists(truth_path)) {
    const auto votes = vista::load_votes_csv(votes_path);
    if (votes.config_hash && *votes.config_hash == vista::upstream_config_hash(config)) {
      const auto truth = vista::load_edge_tsv(truth_path).digraph();
      for (double lambda : grid) {
        rows.push_back(
            vista::evaluate_lambda(votes.tally, truth, lambda, config.threshold));
      }
      vista::save_sweep_csv(out_path(config, "sweep.csv").string(), rows);
    }
  }
  if (rows.empty()) rows = vista::sweep_lambda(config, grid);
  std::cout << "lambda,precision,recall,fdr,tpr,f1,shd\n";
  for (const auto& r : rows) {
    std::printf("%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%lld\n", r.lambda, r.precision, r.recall,
                r.fdr, r.tpr, r.f1, r.shd);
  }
  return 0;
}

int cmd_eval(const std::string& est_path, const std::string& truth_path) {
  const auto est = vista::load_edge_tsv(est_path);
  const auto truth = vista::load_edge_tsv(truth_path);
  const int n = std::max(est.n, truth.n);
  vista::Digraph eg(n), tg(n);
  for (const auto& [u, v, w] : est.edges) eg.add_edge(u, v);
  for (const auto& [u, v, w] : truth.edges) tg.add_edge(u, v);
  std::cout << vista::metric_json(vista::metric_report(eg, tg)).dump(2) << "\n";
  return 0;
}

// --- theory subcommand ------------------------------------------------------

struct TheoryParams {
  std::map<std::string, double> values{
      {"m", 2},      {"p", 0.9},     {"q", 0.05},      {"t", 0.7},         {"lambda", 0.5},
      {"eps", 0.05}, {"n", 100},     {"h", 3},         {"m-min", 2},       {"dp", 0.2},
      {"dq", 0.2},   {"alpha", 2.5}, {"c-alpha", 1.0}, {"trials", 100000}, {"mc-seed", 1}};
};

json run_theory_op(const std::string& op, const std::map<std::string, double>& v,
                   const std::string& family, const std::vector<long long>& true_m,
                   const std::vector<long long>& false_m, bool naive_rule) {
  const auto at = [&](const char* key) { return v.at(key); };
  if (op == "effective-threshold") {
    return {{"r", vista::effective_threshold(at("t"), at("lambda"),
                                             static_cast<long long>(at("m")))}};
  }
  if (op == "sufficient") {
    vista::VoteModel model{static_cast<long long>(at("m")), at("p"), at("q"), at("t"),
                           at("lambda"), at("eps")};
    const auto check = vista::check_sufficient_condition(model);
    return {{"applicable", check.applicable}, {"holds", check.holds},
            {"lhs", check.lhs},               {"required", check.required},
            {"slack", check.slack},           {"r", check.effective_threshold}};
  }
  if (op == "min-votes") {
    const auto bound = vista::min_votes_bound(at("p"), at("t"), at("lambda"), at("eps"));
    return {{"feasible", bound.feasible},
            {"m", bound.required},
            {"raw", bound.raw},
            {"denominator", bound.denominator}};
  }
  if (op == "lambda-range") {
    const auto range =
        vista::lambda_range(static_cast<long long>(at("m")), at("t"), at("eps"));
    return {{"empty", range.empty},
            {"lambda_min", range.lambda_min},
            {"lambda_max", range.lambda_max}};
  }
  if (op == "structure-bound") {
    const auto bound = vista::structure_error_bound(true_m, false_m, at("p"), at("q"),
                                                    at("t"), at("lambda"), naive_rule);
    return {{"total", bound.total},
            {"fn_term", bound.fn_term},
            {"fp_term", bound.fp_term},
            {"vacuous_true", bound.vacuous_true},
            {"vacuous_false", bound.vacuous_false}};
  }
  if (op == "worst-case") {
    const auto bound = vista::worst_case_bound(
        static_cast<int>(at("n")), at("h"), static_cast<long long>(at("m-min")), at("p"),
        at("q"), at("t"), at("lambda"));
    return {{"total", bound.total},   {"fn_term", bound.fn_term},
            {"fp_term", bound.fp_term}, {"n_fn", bound.n_fn},
            {"n_fp", bound.n_fp},     {"vacuous", bound.vacuous}};
  }
  if (op == "consistency") {
    return {{"constant", vista::consistency_constant(at("dp"), at("dq"))},
            {"tight", vista::consistency_constant_tight(at("dp"), at("dq"))}};
  }
  if (op == "mc-rate") {
    vista::VoteModel model{static_cast<long long>(at("m")), at("p"), at("q"), at("t"),
                           at("lambda"), at("eps")};
    const double rate = vista::monte_carlo_accept_rate(
        model, static_cast<long long>(at("trials")),
        static_cast<std::uint64_t>(at("mc-seed")));
    return {{"rate", rate}};
  }
  if (op == "er-sf") {
    const auto fam = family == "sf" ? vista::GraphFamily::sf : vista::GraphFamily::er;
    const auto bound =
        vista::er_sf_bound(fam, static_cast<int>(at("n")), at("h"), at("alpha"), at("p"),
                           at("q"), at("t"), at("lambda"), at("c-alpha"));
    return {{"total", bound.total},     {"fn_term", bound.fn_term},
            {"fp_term", bound.fp_term}, {"residual", bound.residual},
            {"delta_p", bound.delta_p}, {"delta_q", bound.delta_q}};
  }
  throw CLI::ValidationError("--op", "unknown theory op '" + op + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VISTA: divide-and-conquer causal discovery with weighted voting"};
  app.require_subcommand(1);

  ConfigCli cli;
  std::vector<double> sweep_grid;
  int sweep_count = 12;
  std::string est_path, truth_path;
  std::string theory_op = "effective-threshold";
  std::string theory_family = "er";
  std::vector<std::string> grid_specs;
  std::string true_m_csv, false_m_csv;
  bool naive_rule = false;
  std::map<std::string, double> theory_values = TheoryParams{}.values;

  auto* generate = app.add_subcommand("generate", "generate truth + SEM data");
  auto* mb = app.add_subcommand("mb", "identify Markov blankets -> mb.json");
  auto* learn = app.add_subcommand("learn", "run the local learner -> locals.json");
  auto* merge = app.add_subcommand("merge", "tally + vote + FAS + filter -> final.tsv");
  auto* pipeline = app.add_subcommand("pipeline", "full end-to-end run");
  auto* sweep = app.add_subcommand("sweep-lambda", "re-merge cached votes over a lambda grid");
  auto* theory = app.add_subcommand("theory", "bound calculators (JSON; CSV with --grid)");
  auto* eval = app.add_subcommand("eval", "score an estimated graph against truth");

  // Long-form help only: the short -h slot belongs to the average-degree flag.
  app.set_help_flag("--help", "print help");
  for (auto* cmd : {generate, mb, learn, merge, pipeline, sweep, theory, eval}) {
    cmd->set_help_flag("--help", "print help");
  }
  // Shared config flags: one ConfigCli drives all data subcommands.
  for (auto* cmd : {generate, mb, learn, merge, pipeline, sweep}) {
    attach_config_options(cmd, cli);
  }
  sweep->add_option("--lambdas", sweep_grid, "explicit lambda grid")->delimiter(',');
  sweep->add_option("--grid-count", sweep_count, "points in the default grid");

  eval->add_option("--est", est_path, "estimated graph TSV")->required();
  eval->add_option("--truth", truth_path, "ground truth TSV")->required();

  theory->add_option("--op", theory_op,
                     "effective-threshold | sufficient | min-votes | lambda-range | "
                     "structure-bound | worst-case | consistency | mc-rate | er-sf");
  theory->add_option("--family", theory_family, "er | sf (er-sf op)");
  theory->add_option("--true-m", true_m_csv, "comma list of per-true-edge vote counts");
  theory->add_option("--false-m", false_m_csv, "comma list of per-false-pair vote counts");
  theory->add_flag("--naive", naive_rule, "use the naive rule in structure-bound");
  theory->add_option("--grid", grid_specs,
                     "param=lo:hi:steps (repeat up to 2) -> CSV on stdout");
  for (auto& [key, value] : theory_values) {
    theory->add_option("--" + key, value);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage error -> 1
  }

  try {
    if (eval->parsed()) return cmd_eval(est_path, truth_path);
    if (theory->parsed()) {
      auto parse_ll_list = [](const std::string& csv) {
        std::vector<long long> out;
        if (csv.empty()) return out;
        for (const auto& field : vista::detail::split(csv, ',')) {
          out.push_back(std::stoll(field));
        }
        return out;
      };
      const auto true_m = parse_ll_list(true_m_csv);
      const auto false_m = parse_ll_list(false_m_csv);
      if (grid_specs.empty()) {
        std::cout << run_theory_op(theory_op, theory_values, theory_family, true_m,
                                   false_m, naive_rule)
                         .dump(2)
                  << "\n";
        return 0;
      }
      if (grid_specs.size() > 2) {
        throw CLI::ValidationError("--grid", "at most 2 grid parameters");
      }
      struct Axis {
        std::string name;
        std::vector<double> values;
      };
      std::vector<Axis> axes;
      for (const auto& spec : grid_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--grid", "need param=lo:hi:steps");
        Axis axis;
        axis.name = spec.substr(0, eq);
        const auto parts = vista::detail::split(spec.substr(eq + 1), ':');
        if (parts.size() != 3) throw CLI::ValidationError("--grid", "need param=lo:hi:steps");
        const double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
        const int steps = std::stoi(parts[2]);
        for (int i = 0; i < steps; ++i) {
          axis.values.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1.0));
        }
        axes.push_back(std::move(axis));
      }
      std::cout << axes[0].name;
      if (axes.size() > 1) std::cout << "," << axes[1].name;
      bool header_done = false;
      std::vector<std::string> value_keys;
      const std::size_t outer = axes[0].values.size();
      const std::size_t inner = axes.size() > 1 ? axes[1].values.size() : 1;
      std::string body;
      for (std::size_t i = 0; i < outer; ++i) {
        for (std::size_t k = 0; k < inner; ++k) {
          auto values = theory_values;
          values[axes[0].name] = axes[0].values[i];
          if (axes.size() > 1) values[axes[1].name] = axes[1].values[k];
          const json row = run_theory_op(theory_op, values, theory_family, true_m,
                                         false_m, naive_rule);
          if (!header_done) {
            for (auto it = row.begin(); it != row.end(); ++it) value_keys.push_back(it.key());
            for (const auto& key : value_keys) std::cout << "," << key;
            std::cout << "\n";
            header_done = true;
          }
          body += std::to_string(axes[0].values[i]);
          if (axes.size() > 1) body += "," + std::to_string(axes[1].values[k]);
          for (const auto& key : value_keys) {
            body += ",";
            const auto& cell = row.at(key);
            body += cell.is_boolean() ? (cell.get<bool>() ? "1" : "0") : cell.dump();
          }
          body += "\n";
        }
      }
      std::cout << body;
      return 0;
    }

    const vista::VistaConfig config = resolve_config(cli);
    if (generate->parsed()) return cmd_generate(config);
    if (mb->parsed()) return cmd_mb(config);
    if (learn->parsed()) return cmd_learn(config);
    if (merge->parsed()) return cmd_merge(config);
    if (pipeline->parsed()) return cmd_pipeline(config);
    if (sweep->parsed()) return cmd_sweep(config, sweep_grid, sweep_count);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;  // stage failure
  }
  return 0;
}
