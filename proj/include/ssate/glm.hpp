#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ssate/common.hpp"
#include "ssate/link.hpp"

namespace ssate {

// Result of a penalized GLM fit.  The intercept (column 0) is never
// penalized and never leaves the support.
struct GlmFit {
  Eigen::VectorXd coefficients;       // intercept first
  double lambda = 0.0;                // penalty level actually used
  bool converged = false;
  std::vector<double> objective_trace;  // per-iteration score norm / per-grid BIC
  std::vector<int> support;           // indices of nonzero coefficients
  double pilot_lambda = 0.0;          // adaptive lasso only: ridge pilot penalty

  Eigen::VectorXd predict_eta(const Eigen::MatrixXd& design) const {
    return design * coefficients;
  }
};

enum class PenaltySelection { cv_deviance, modified_bic };

// Strictly decreasing sequence of candidate penalty levels.
struct PenaltyGrid {
  std::vector<double> values;
  PenaltySelection selection = PenaltySelection::cv_deviance;

  void validate() const {
    if (values.empty()) throw InputError("penalty grid: empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] < 0.0) throw InputError("penalty grid: negative value");
      if (i > 0 && values[i] >= values[i - 1])
        throw InputError("penalty grid: values must be strictly decreasing");
    }
  }
};

// 50 log-spaced penalties from 1e1*s down to 1e-4*s, where s is the
// max-norm of the unpenalized score at the intercept-only model.
PenaltyGrid make_default_grid(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                              const LinkSpec& link, const Eigen::VectorXd& weights,
                              const std::vector<int>& unpenalized,
                              PenaltySelection selection);

// Solves the ridge-penalized estimating equation
//   (1/sum w) sum_i w_i z_i {y_i - g(gamma' z_i)} - lambda * gamma_pen = 0
// by damped Newton (cap 200 iterations, tolerance 1e-8 in max-norm).
// `unpenalized` lists coordinates excluded from the penalty; it must
// contain the intercept index 0.
GlmFit fit_ridge_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                     const LinkSpec& link, double lambda,
                     const std::vector<int>& unpenalized = {0},
                     const Eigen::VectorXd& weights = Eigen::VectorXd(),
                     const Eigen::VectorXd& warm_start = Eigen::VectorXd());

// K-fold cross-validation (fold = row index mod folds) minimizing held-out
// deviance; ties break toward the larger penalty.
double cross_validate_ridge(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                            const LinkSpec& link, const PenaltyGrid& grid, int folds,
                            const std::vector<int>& unpenalized = {0},
                            const Eigen::VectorXd& weights = Eigen::VectorXd());

struct AdaptiveLassoOptions {
  // Pilot ridge penalty; NaN selects it by cross-validation.
  double pilot_lambda = std::numeric_limits<double>::quiet_NaN();
  // Forces the final penalty level; NaN selects by modified BIC.
  double fixed_lambda = std::numeric_limits<double>::quiet_NaN();
  int cv_folds = 5;
};

// Adaptive LASSO by cyclic coordinate descent on
//   (1/sum w) sum_i w_i nll(y_i, gamma' z_i) + lambda sum_j |u_j| / |w~_j|
// with pilot weights w~ from a ridge fit and lambda chosen by the modified
// BIC (deviance + df log n).  Coefficients are refit without penalty on the
// selected support, so retained coefficients are unshrunk and dropped ones
// are exact zeros.
GlmFit fit_adaptive_lasso(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                          const LinkSpec& link, const PenaltyGrid& grid = PenaltyGrid{},
                          const std::vector<int>& unpenalized = {0},
                          const Eigen::VectorXd& weights = Eigen::VectorXd(),
                          const AdaptiveLassoOptions& options = AdaptiveLassoOptions{});

// Deviance of a fit on given data (weighted sum of unit deviances).
double deviance(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                const LinkSpec& link, const Eigen::VectorXd& coefficients,
                const Eigen::VectorXd& weights = Eigen::VectorXd());

}  // namespace ssate
