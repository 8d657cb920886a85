#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssate/dataset.hpp"
#include "ssate/estimators.hpp"

namespace ssate {

// Distribution of the perturbation weights.  scaled_beta draws iid
// 4 x Beta(0.5, 1.5) values (nonnegative, unit mean and variance);
// multinomial_bootstrap draws counts that sum to N.
struct PerturbationScheme {
  PerturbDist distribution = PerturbDist::scaled_beta;
  int draws = 1000;          // B
  std::uint64_t seed = 0;

  void validate() const {
    if (draws < 100) throw InputError("perturbation: need at least 100 draws");
  }
};

// Deterministic in (seed, draw_index); independent of any other stream.
Eigen::VectorXd draw_weights(const PerturbationScheme& scheme, int n_rows, int draw_index);

// Re-runs the requested estimator's full pipeline under the given weights,
// reusing the tuning selections frozen by the point estimate when provided.
double perturb_estimate(const Dataset& data, const ModelConfig& config,
                        const Eigen::VectorXd& weights,
                        EstimatorKind kind = EstimatorKind::ss_dr,
                        const TuningSelections* tuning = nullptr);

struct ResampleSummary {
  std::vector<double> draws;   // valid perturbed estimates, draw order
  double se_sd = 0.0;
  double se_mad = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double pvalue = 1.0;
  int excluded = 0;            // degenerate draws dropped before summarizing
};

// Percentile CI at `level`, sd and MAD standard errors, and the two-sided
// p-value from inverting the percentile CI (granularity floor 2/B).
ResampleSummary summarize(const std::vector<double>& draws, double point_estimate, double level);

struct InferenceResult {
  std::map<EstimatorKind, EstimateReport> point;
  std::map<EstimatorKind, ResampleSummary> summaries;
  std::map<EstimatorKind, std::string> errors;  // estimators that failed
  TuningSelections tuning;
};

// Point estimates plus perturbation-resampling inference for each requested
// estimator.  Draw b uses the weights stream (config.seed, b); draws where an
// estimator degenerates are excluded, and more than 5% exclusions fail that
// estimator.
InferenceResult resample_inference(const Dataset& data, const ModelConfig& config,
                                   const std::vector<EstimatorKind>& kinds);

}  // namespace ssate
