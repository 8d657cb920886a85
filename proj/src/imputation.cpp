#include "ssate/imputation.hpp"

#include <cmath>

namespace ssate {

double utility_covariate(double treatment, double ps) {
  if (!(ps > 0.0 && ps < 1.0)) throw InputError("utility covariate: ps must lie in (0, 1)");
  if (treatment != 0.0 && treatment != 1.0)
    throw InputError("utility covariate: treatment must be 0 or 1");
  return treatment == 1.0 ? 1.0 / ps : -1.0 / (1.0 - ps);
}

Eigen::VectorXd utility_covariates(const Eigen::VectorXd& treatment, const Eigen::VectorXd& ps) {
  if (treatment.size() != ps.size()) throw InputError("utility covariate: length mismatch");
  Eigen::VectorXd u(treatment.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = utility_covariate(treatment[i], ps[i]);
  return u;
}

ImputationFit fit_imputation(const Eigen::MatrixXd& labeled_design,
                             const Eigen::VectorXd& labeled_y, const SplineBasis& basis,
                             const LinkSpec& link, double lambda,
                             const Eigen::VectorXd& weights) {
  if (labeled_design.rows() < 2) throw InputError("fit_imputation: need at least 2 labeled rows");
  if (labeled_design.cols() != basis.design_width)
    throw InputError("fit_imputation: design width does not match basis");
  ImputationFit fit;
  fit.gamma = fit_ridge_glm(labeled_design, labeled_y, link, lambda, {0}, weights);
  fit.basis = basis;
  fit.link = link;
  fit.design_width = basis.design_width;
  return fit;
}

Eigen::VectorXd impute(const ImputationFit& fit, const Eigen::MatrixXd& design) {
  if (design.cols() != fit.gamma.coefficients.size())
    throw InputError("impute: design/coefficient width mismatch");
  Eigen::VectorXd eta = design * fit.gamma.coefficients;
  for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = fit.link.inverse(eta[i]);
  return eta;
}

Eigen::VectorXd impute_rows(const ImputationFit& fit, const Eigen::MatrixXd& v,
                            const Eigen::VectorXd& t, const Eigen::VectorXd& u) {
  return impute(fit, build_imputation_design(v, t, u, fit.basis));
}

}  // namespace ssate
