// Command-line surface: `estimate` runs the estimators with
// perturbation-resampling inference on a CSV dataset; `simulate` drives the
// replicated benchmark and coverage experiments.
//
// Exit codes: 0 success, 1 input error, 2 estimation error, 3 internal error.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssate/io.hpp"

namespace {

using namespace ssate;

int cmd_estimate(const std::string& data_path, const std::string& config_path,
                 const std::string& estimators_arg, const std::string& out_prefix) {
  RunConfig cfg = parse_run_config(config_path);
  if (!estimators_arg.empty()) {
    cfg.estimators.clear();
    std::string cur;
    for (char c : estimators_arg + ",") {
      if (c == ',') {
        if (!cur.empty()) cfg.estimators.push_back(parse_estimator(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (cfg.estimators.empty()) throw InputError("--estimators: empty list");
  }

  Dataset data = read_dataset_csv(data_path);
  if (data.n_labeled() == 0)
    throw EstimationError(
        "dataset has no labeled rows (every y is empty); estimators require a nonempty labeled "
        "subset");

  InferenceResult result = resample_inference(data, cfg.model, cfg.estimators);

  write_text_atomic(out_prefix + ".jsonl", estimate_records_jsonl(result, cfg.estimators));
  write_text_atomic(out_prefix + ".txt", estimate_table(result, cfg.estimators));
  write_text_atomic(out_prefix + ".manifest.cfg",
                    format_run_config(cfg, {std::string("ssate ") + kVersion,
                                            "command: estimate", "data: " + data_path}));
  std::fputs(estimate_table(result, cfg.estimators).c_str(), stdout);

  bool any_ok = !result.summaries.empty();
  if (!any_ok) {
    for (const auto& [k, msg] : result.errors)
      std::fprintf(stderr, "%s: %s\n", estimator_name(k).c_str(), msg.c_str());
    return 2;
  }
  return 0;
}

int cmd_simulate(const std::string& scenario_arg, int n, int total, int reps, long long seed,
                 const std::string& estimators_arg, const std::string& config_path, bool coverage,
                 int draws, const std::string& out_prefix) {
  RunConfig cfg;
  if (!config_path.empty()) {
    cfg = parse_run_config(config_path);
  } else {
    cfg = default_run_config();
  }
  cfg.model.seed = static_cast<std::uint64_t>(seed);

  if (!estimators_arg.empty()) {
    cfg.estimators.clear();
    std::string cur;
    for (char c : estimators_arg + ",") {
      if (c == ',') {
        if (!cur.empty()) cfg.estimators.push_back(parse_estimator(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }

  std::vector<std::string> manifest_comments = {std::string("ssate ") + kVersion,
                                                "command: simulate",
                                                "scenario: " + scenario_arg,
                                                "n: " + std::to_string(n),
                                                "N: " + std::to_string(total)};

  if (coverage) {
    if (scenario_arg != "both-correct" && scenario_arg != "both_correct")
      throw InputError("--coverage runs the both-correct scenario only");
    CoverageReport report =
        run_coverage(n, total, reps, draws, cfg.model.seed, cfg.model);
    write_text_atomic(out_prefix + ".jsonl", coverage_record_jsonl(report));
    write_text_atomic(out_prefix + ".txt", coverage_table(report));
    manifest_comments.push_back("sims: " + std::to_string(reps));
    manifest_comments.push_back("draws: " + std::to_string(draws));
    write_text_atomic(out_prefix + ".manifest.cfg", format_run_config(cfg, manifest_comments));
    std::fputs(coverage_table(report).c_str(), stdout);
    return 0;
  }

  ScenarioKind scenario = parse_scenario(scenario_arg);
  BenchmarkResult result = run_benchmark({scenario}, {SizeSpec{n, total}}, cfg.estimators, reps,
                                         cfg.model.seed, cfg.model);
  write_text_atomic(out_prefix + ".jsonl", benchmark_records_jsonl(result));
  write_text_atomic(out_prefix + ".txt", benchmark_table(result));
  write_text_atomic(out_prefix + ".csv", benchmark_plot_csv(result));
  manifest_comments.push_back("reps: " + std::to_string(reps));
  write_text_atomic(out_prefix + ".manifest.cfg", format_run_config(cfg, manifest_comments));
  std::fputs(benchmark_table(result).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised average treatment effect estimation"};
  app.require_subcommand(1);

  std::string data_path, config_path, estimators_arg, out_prefix, scenario_arg;
  int n = 100, total = 1112, reps = 200, draws = 500;
  long long seed = 0;
  bool coverage = false;

  CLI::App* est = app.add_subcommand("estimate", "Estimate treatment effects from a CSV dataset");
  est->add_option("--data", data_path, "input CSV (y,t,x1..,w1..)")->required();
  est->add_option("--config", config_path, "run configuration file")->required();
  est->add_option("--estimators", estimators_arg, "comma-separated estimator list");
  est->add_option("--out", out_prefix, "output prefix")->required();

  CLI::App* sim = app.add_subcommand("simulate", "Run the replicated simulation experiments");
  sim->add_option("--scenario", scenario_arg, "both-correct | mis-mu | mis-pi")->required();
  sim->add_option("--n", n, "labeled rows");
  sim->add_option("--N", total, "total rows");
  sim->add_option("--reps", reps, "replications (or simulations with --coverage)");
  sim->add_option("--seed", seed, "master seed")->required();
  sim->add_option("--estimators", estimators_arg, "comma-separated estimator list");
  sim->add_option("--config", config_path, "optional run configuration file");
  sim->add_flag("--coverage", coverage, "run the resampling-calibration experiment");
  sim->add_option("--draws", draws, "perturbation draws per simulation (with --coverage)");
  sim->add_option("--out", out_prefix, "output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (est->parsed()) return cmd_estimate(data_path, config_path, estimators_arg, out_prefix);
    return cmd_simulate(scenario_arg, n, total, reps, seed, estimators_arg, config_path, coverage,
                        draws, out_prefix);
  } catch (const ssate::InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 1;
  } catch (const ssate::EstimationError& e) {
    std::fprintf(stderr, "estimation error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
