#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssate/dataset.hpp"
#include "ssate/estimators.hpp"

namespace ssate {

enum class ScenarioKind { both_correct, mis_mu, mis_pi };

std::string scenario_name(ScenarioKind kind);
ScenarioKind parse_scenario(const std::string& name);

// Data-generating process: equicorrelated normal X, Bernoulli T and Y from
// scenario-specific index models, and count surrogates
// W = floor(Gamma (1, X', T, Y)' + eps).
struct SimulationScenario {
  ScenarioKind kind = ScenarioKind::both_correct;
  int p_x = 10;
  int p_w = 5;
  double sigma2_x = 1.0;
  double rho_x = 0.2;
  double sigma2_w = 5.0;
  double rho_w = 0.2;
  Eigen::MatrixXd gamma;       // 5 x 13 surrogate loading matrix
  double alpha0 = -0.3;
  Eigen::VectorXd alpha1;      // 0.35 * ones(10)
  double beta0 = -0.65;
  Eigen::VectorXd beta1;       // (1,1,1,.5,.5,.5,-1.15,-1,-1,-1)
  double beta2 = 1.0;          // treatment coefficient (value not printed in
                               // the source tables; fixed here)
  Eigen::VectorXd alpha1_1, alpha1_2;  // misspecified-PS index directions
  Eigen::VectorXd beta1_1, beta1_2;    // misspecified-outcome index directions

  double true_ps(const Eigen::VectorXd& x) const;
  double true_mu(const Eigen::VectorXd& x, double treatment) const;
};

SimulationScenario make_scenario(ScenarioKind kind);

// First n rows labeled (missing completely at random by construction);
// bit-identical for identical (scenario, n, N, seed).
Dataset generate_dataset(const SimulationScenario& scenario, int n, int total, std::uint64_t seed);

// Monte-Carlo evaluation of E{mu_1(X) - mu_0(X)} under the true models.
struct DeltaTruth {
  double value = 0.0;
  double mc_se = 0.0;
};
DeltaTruth delta_true(const SimulationScenario& scenario, long draws = 10000000,
                      std::uint64_t seed = 7771);

struct SizeSpec {
  int n = 100;
  int total = 1112;
};

struct BenchmarkRow {
  ScenarioKind scenario;
  int n = 0;
  int total = 0;
  EstimatorKind kind;
  double bias = 0.0;
  double rmse = 0.0;
  double re_vs_cc_dr = 0.0;  // MSE(cc_dr) / MSE(kind)
  double delta_true = 0.0;
  double delta_true_se = 0.0;
  int reps_used = 0;
  int failures = 0;
  std::uint64_t seed = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
};

// Replicated bias/RMSE/relative-efficiency experiment.  Replication failures
// are excluded; more than 2% of them fail the cell.
BenchmarkResult run_benchmark(const std::vector<ScenarioKind>& scenarios,
                              const std::vector<SizeSpec>& sizes,
                              const std::vector<EstimatorKind>& kinds, int reps,
                              std::uint64_t seed, const ModelConfig& config);

struct CoverageReport {
  int n = 0;
  int total = 0;
  int sims_used = 0;
  int failures = 0;
  double bias = 0.0;
  double emp_se = 0.0;   // sd of the point estimates
  double ase_sd = 0.0;   // mean resampled-sd standard error
  double ase_mad = 0.0;  // mean MAD standard error
  double rmse = 0.0;
  double coverage = 0.0;  // fraction of percentile CIs covering the truth
  double delta_true = 0.0;
};

// Perturbation-resampling calibration experiment under the both-correct
// scenario.
CoverageReport run_coverage(int n, int total, int sims, int draws, std::uint64_t seed,
                            const ModelConfig& config);

}  // namespace ssate
