#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssate/common.hpp"
#include "ssate/dataset.hpp"
#include "ssate/dips.hpp"
#include "ssate/imputation.hpp"

namespace ssate {

enum class EstimatorKind { ss_dr, cc_ipw, cc_reg, cc_dr, ss_naive, ss_prepost, cc_naive };

std::string estimator_name(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);
const std::vector<EstimatorKind>& all_estimators();

struct EstimateReport {
  EstimatorKind kind = EstimatorKind::ss_dr;
  double delta = 0.0;
  double mu1 = 0.0;
  double mu0 = 0.0;
  Diagnostics diagnostics;
};

// Data-driven selections made by the point estimate and held fixed across
// perturbation draws: penalty grids, pilot/imputation penalty levels, and
// the PS score direction used by the smoothed-PS plug-ins.
struct TuningSelections {
  PenaltyGrid alpha_grid;
  PenaltyGrid beta_grid;
  double alpha_pilot_lambda = 0.0;
  double beta_pilot_lambda = 0.0;
  double gamma_lambda = 0.0;
  Eigen::VectorXd alpha1_point;
};

// Evaluates the requested estimators on one (possibly perturbation-weighted)
// pass over the data, sharing the underlying model fits.  With `tuning`
// null, penalties are selected from the data and reported through
// `tuning_out`; otherwise the frozen selections are reused and only the
// fits themselves are recomputed under the weights.
std::map<EstimatorKind, EstimateReport> run_estimators(
    const std::vector<EstimatorKind>& kinds, const Dataset& data, const ModelConfig& config,
    const Eigen::VectorXd& weights = Eigen::VectorXd(),
    const TuningSelections* tuning = nullptr, TuningSelections* tuning_out = nullptr);

// Same pass, but an estimator-level degeneracy (EstimationError) only drops
// that estimator from the result; its message lands in `errors`.
std::map<EstimatorKind, EstimateReport> run_estimators_tolerant(
    const std::vector<EstimatorKind>& kinds, const Dataset& data, const ModelConfig& config,
    const Eigen::VectorXd& weights, const TuningSelections* tuning,
    TuningSelections* tuning_out, std::map<EstimatorKind, std::string>* errors);

// Single-estimator entry points (unit weights, fresh selection).
EstimateReport ss_dr(const Dataset& data, const ModelConfig& config);
EstimateReport cc_estimate(EstimatorKind kind, const Dataset& data, const ModelConfig& config);
EstimateReport ss_naive(const Dataset& data, const ModelConfig& config);
EstimateReport ss_prepost(const Dataset& data, const ModelConfig& config);

// Efficient-influence values U_pi {Y - xi} on labeled rows (diagnostic only).
Eigen::VectorXd efficient_influence(const Eigen::VectorXd& y, const Eigen::VectorXd& t,
                                    const Eigen::VectorXd& pi, const Eigen::VectorXd& xi);

// Hajek-normalized inverse-probability-weighted means of `outcome` for the
// treated and control arms.
struct ArmMeans {
  double mu1 = 0.0;
  double mu0 = 0.0;
};
ArmMeans hajek_means(const Eigen::VectorXd& t, const Eigen::VectorXd& ps,
                     const Eigen::VectorXd& outcome,
                     const Eigen::VectorXd& weights = Eigen::VectorXd());

// Standard augmented IPW arm means on labeled data.
ArmMeans aipw_means(const Eigen::VectorXd& y, const Eigen::VectorXd& t, const Eigen::VectorXd& ps,
                    const Eigen::VectorXd& mu1_hat, const Eigen::VectorXd& mu0_hat,
                    const Eigen::VectorXd& weights = Eigen::VectorXd());

// Pretest-posttest style arm means with the labeling indicator folded in:
//   mu_k = (1/sum w) sum_i w_i [ omega_ki {(R_i/rho) Y_i - (R_i/rho - 1) e_k(V_i)}
//                                - (omega_ki - 1) m_k(X_i) ].
// Unlabeled Y values are masked by R_i = 0 and never read.
ArmMeans prepost_means(const Eigen::VectorXd& y, const std::vector<bool>& labeled,
                       const Eigen::VectorXd& t, const Eigen::VectorXd& ps, double rho,
                       const Eigen::VectorXd& e1, const Eigen::VectorXd& e0,
                       const Eigen::VectorXd& m1, const Eigen::VectorXd& m0,
                       const Eigen::VectorXd& weights = Eigen::VectorXd());

// Unnormalized IPW functional (1/sum w) sum w {T Y/pi - (1-T) Y/(1-pi)}.
double ipw_functional(const Eigen::VectorXd& y, const Eigen::VectorXd& t,
                      const Eigen::VectorXd& ps, const Eigen::VectorXd& weights = Eigen::VectorXd());

// SS_DR with a supplied propensity score (bypasses the smoothed double-index
// PS); optionally drops the W block from the imputation basis.  Used by the
// robust-imputation diagnostics.
struct OracleSsDrResult {
  EstimateReport report;
  Eigen::VectorXd y_imputed;  // length N
  ImputationFit imputation;
};
OracleSsDrResult ss_dr_oracle_ps(const Dataset& data, const ModelConfig& config,
                                 const Eigen::VectorXd& oracle_ps, bool omit_w = false);

}  // namespace ssate
