#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssate/dataset.hpp"
#include "ssate/estimators.hpp"
#include "ssate/resampling.hpp"
#include "ssate/simulation.hpp"

namespace ssate {

// CSV schema: header `y,t,x1..x{p},w1..w{q}`; an empty y field marks an
// unlabeled row; t is 0/1; all other fields are decimal floating point.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& data, const std::string& path);

// Key = value run configuration (# starts a comment).  Unknown keys are
// rejected; `seed` is required.
struct RunConfig {
  ModelConfig model;
  std::vector<EstimatorKind> estimators;  // defaults to every estimator
};

RunConfig default_run_config();
RunConfig parse_run_config_text(const std::string& text, const std::string& origin);
RunConfig parse_run_config(const std::string& path);

// Serializes every effective parameter back into config format; the result
// is itself a valid --config input that reproduces the run.
std::string format_run_config(const RunConfig& config, const std::vector<std::string>& comments);

// Lossless float formatting (17 significant digits) used by all
// machine-readable outputs.
std::string format_double(double v);

// Minimal ordered JSON-lines record: values are emitted in insertion order.
class JsonRecord {
 public:
  void add(const std::string& key, double value);
  void add(const std::string& key, int value);
  void add(const std::string& key, long value);
  void add(const std::string& key, const std::string& value);
  std::string line() const;

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

// Temp-file + rename so partially written outputs never appear.
void write_text_atomic(const std::string& path, const std::string& content);

// Report rendering for the CLI.
std::string estimate_records_jsonl(const InferenceResult& result,
                                   const std::vector<EstimatorKind>& order);
std::string estimate_table(const InferenceResult& result,
                           const std::vector<EstimatorKind>& order);
std::string benchmark_records_jsonl(const BenchmarkResult& result);
std::string benchmark_table(const BenchmarkResult& result);
std::string benchmark_plot_csv(const BenchmarkResult& result);
std::string coverage_record_jsonl(const CoverageReport& report);
std::string coverage_table(const CoverageReport& report);

}  // namespace ssate
