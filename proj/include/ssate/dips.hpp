#pragma once

#include <Eigen/Dense>

#include "ssate/common.hpp"
#include "ssate/dataset.hpp"
#include "ssate/glm.hpp"
#include "ssate/kernel.hpp"

namespace ssate {

// Bivariate scores (alpha1'x, beta1'x), standardized and mapped through the
// normal CDF so the smoother sees approximately uniform inputs in (0,1).
struct ScoreSet {
  Eigen::VectorXd raw_alpha, raw_beta;          // exact inner products
  Eigen::VectorXd transformed_alpha, transformed_beta;  // in (0,1)
  bool alpha_degenerate = false;  // zero-variance direction, mapped to 0.5
  bool beta_degenerate = false;
};

ScoreSet bivariate_scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& alpha1,
                          const Eigen::VectorXd& beta1,
                          const Eigen::VectorXd& weights = Eigen::VectorXd());

struct SmoothResult {
  Eigen::VectorXd pi_hat;     // truncated to [eps, 1-eps]
  int truncated_low = 0;      // raw values clamped at eps
  int truncated_high = 0;
  int denominator_fallbacks = 0;  // points where the global treated fraction was used
  bool degenerate_arm = false;    // all-treated or all-control input
};

// Nadaraya-Watson treated-fraction smoother over the transformed scores:
//   pi_i = sum_j K_h(S_j - S_i) w_j T_j / sum_j K_h(S_j - S_i) w_j,
// self term included, then clamped to [eps, 1-eps].  Negative kernel weights
// are kept; a nonpositive denominator falls back to the global treated
// fraction.  Summation order is fixed by row order.
SmoothResult smooth_ps(const Eigen::VectorXd& transformed_alpha,
                       const Eigen::VectorXd& transformed_beta, const Eigen::VectorXd& treatment,
                       const KernelSpec& kernel, double truncation_eps,
                       const Eigen::VectorXd& weights = Eigen::VectorXd());

// The fitted double-index propensity score: working-model fits for the PS
// and baseline outcome plus the smoothed, truncated PS per row.
struct DipsFit {
  GlmFit alpha;            // PS working model, T ~ X on all rows
  GlmFit beta;             // outcome working model, Y ~ X + T on labeled rows
  Eigen::VectorXd pi_hat;  // length N, in [eps, 1-eps]
  KernelSpec kernel;
  ScoreSet scores;
  Diagnostics diagnostics;
};

DipsFit fit_dips(const Dataset& data, const ModelConfig& config);

// Weighted variant used by the perturbation pipeline.  Fits are weighted by
// `weights` (length N); when `alpha1_override` is non-null the PS working
// model is not refit and the given direction is used for the scores (the
// printed resampling scheme keeps the original alpha direction).
DipsFit fit_dips_weighted(const Dataset& data, const ModelConfig& config,
                          const Eigen::VectorXd& weights,
                          const Eigen::VectorXd* alpha1_override = nullptr);

}  // namespace ssate
