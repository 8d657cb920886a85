#pragma once

#include <Eigen/Dense>

#include "ssate/common.hpp"
#include "ssate/glm.hpp"
#include "ssate/link.hpp"
#include "ssate/spline.hpp"

namespace ssate {

// Signed inverse-PS utility covariate: 1/ps on treated rows, -1/(1-ps) on
// control rows.  ps must lie strictly inside (0,1).
double utility_covariate(double treatment, double ps);

Eigen::VectorXd utility_covariates(const Eigen::VectorXd& treatment, const Eigen::VectorXd& ps);

// The utility-augmented imputation model: ridge-penalized GLM of Y on
// [1 | h(V) | T | spline(U)] fitted on labeled rows, plus the basis
// metadata needed to impute any row.
struct ImputationFit {
  GlmFit gamma;
  SplineBasis basis;
  LinkSpec link;
  int design_width = 0;
};

ImputationFit fit_imputation(const Eigen::MatrixXd& labeled_design, const Eigen::VectorXd& labeled_y,
                             const SplineBasis& basis, const LinkSpec& link, double lambda,
                             const Eigen::VectorXd& weights = Eigen::VectorXd());

// Row-wise g(gamma' z) for a prebuilt design.
Eigen::VectorXd impute(const ImputationFit& fit, const Eigen::MatrixXd& design);

// Convenience: builds the design for (V, T, U) and imputes.
Eigen::VectorXd impute_rows(const ImputationFit& fit, const Eigen::MatrixXd& v,
                            const Eigen::VectorXd& t, const Eigen::VectorXd& u);

}  // namespace ssate
