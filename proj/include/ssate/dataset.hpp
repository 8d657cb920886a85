#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ssate/common.hpp"
#include "ssate/link.hpp"

namespace ssate {

// Pooled sample: N rows of (T, X, W) with Y observed on the labeled subset
// only.  y holds NaN on unlabeled rows; `labeled` lists the rows with an
// observed outcome in ascending order.
struct Dataset {
  Eigen::MatrixXd x;  // N x p_x baseline covariates
  Eigen::MatrixXd w;  // N x p_w post-treatment surrogates
  Eigen::VectorXd t;  // N, each entry 0 or 1
  Eigen::VectorXd y;  // N, NaN where unlabeled
  std::vector<int> labeled;

  int rows() const { return static_cast<int>(t.size()); }
  int n_labeled() const { return static_cast<int>(labeled.size()); }
  int p_x() const { return static_cast<int>(x.cols()); }
  int p_w() const { return static_cast<int>(w.cols()); }

  // V = (W, X): surrogates first, baseline covariates after.
  Eigen::MatrixXd v() const {
    Eigen::MatrixXd out(rows(), p_w() + p_x());
    if (p_w() > 0) out.leftCols(p_w()) = w;
    out.rightCols(p_x()) = x;
    return out;
  }

  void validate() const {
    const int n = rows();
    if (n == 0) throw InputError("dataset: no rows");
    if (x.rows() != n || (w.size() > 0 && w.rows() != n) || y.size() != n)
      throw InputError("dataset: inconsistent row counts");
    for (int i = 0; i < n; ++i) {
      if (t[i] != 0.0 && t[i] != 1.0) throw InputError("dataset: t entries must be 0 or 1");
    }
    for (int i : labeled) {
      if (i < 0 || i >= n) throw InputError("dataset: labeled index out of range");
      if (!std::isfinite(y[i])) throw InputError("dataset: labeled row has non-finite y");
    }
    if (!x.allFinite() || (w.size() > 0 && !w.allFinite()))
      throw InputError("dataset: non-finite covariate");
  }
};

enum class PerturbDist { scaled_beta, multinomial_bootstrap };

// Every tuning knob of the estimation pipeline.  Defaults mirror the
// simulation settings; all of them are echoed into output manifests.
struct ModelConfig {
  LinkKind link_outcome = LinkKind::logistic;
  LinkKind link_imputation = LinkKind::logistic;
  int spline_knots = 6;
  int kernel_order = 4;
  double bandwidth_alpha = 0.15;
  double bandwidth_scale = 0.25;
  double ps_truncation = 0.01;
  int cv_folds = 5;
  int n_perturb = 1000;
  PerturbDist perturb_dist = PerturbDist::scaled_beta;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  bool count_log_transform = false;

  // Perturbation bookkeeping: false keeps the original PS direction for the
  // smoothed-PS plug-ins (the printed scheme), true re-estimates both
  // directions under the perturbed fits.
  bool perturb_fully_starred = false;

  // Adds interactions between the V basis expansion and T to the imputation
  // design (off by default: main-effects model).
  bool interaction_vt = false;

  // Averages the outcome-regression contrast over all rows instead of the
  // labeled rows only.
  bool cc_reg_all_rows = false;

  // Test hooks: fixed penalty levels bypass data-driven selection when set.
  double fixed_pilot_lambda = std::numeric_limits<double>::quiet_NaN();
  double fixed_alasso_lambda_alpha = std::numeric_limits<double>::quiet_NaN();
  double fixed_alasso_lambda_beta = std::numeric_limits<double>::quiet_NaN();
  double fixed_gamma_lambda = std::numeric_limits<double>::quiet_NaN();

  void validate() const {
    if (spline_knots < 2) throw InputError("config: spline_knots must be >= 2");
    if (kernel_order != 4 && kernel_order != 6)
      throw InputError("config: kernel_order must be 4 or 6");
    if (!(bandwidth_alpha > 0.0 && bandwidth_alpha < 0.25))
      throw InputError("config: bandwidth_alpha must lie in (0, 0.25)");
    if (bandwidth_scale <= 0.0) throw InputError("config: bandwidth_scale must be positive");
    if (!(ps_truncation > 0.0 && ps_truncation < 0.5))
      throw InputError("config: ps_truncation must lie in (0, 0.5)");
    if (cv_folds < 2) throw InputError("config: cv_folds must be >= 2");
    if (n_perturb < 100) throw InputError("config: n_perturb must be >= 100");
    if (!(ci_level > 0.0 && ci_level < 1.0))
      throw InputError("config: ci_level must lie in (0, 1)");
  }
};

}  // namespace ssate
