#include "ssate/glm.hpp"

#include <algorithm>
#include <cmath>

namespace ssate {

namespace {

Eigen::VectorXd resolve_weights(const Eigen::VectorXd& weights, Eigen::Index n) {
  if (weights.size() == 0) return Eigen::VectorXd::Ones(n);
  if (weights.size() != n) throw InputError("glm: weight length mismatch");
  if (!weights.allFinite()) throw InputError("glm: non-finite weights");
  if ((weights.array() < 0.0).any()) throw InputError("glm: negative weights");
  if (weights.sum() <= 0.0) throw InputError("glm: weights sum to zero");
  return weights;
}

void check_inputs(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  if (design.rows() == 0) throw InputError("glm: empty design");
  if (design.rows() != response.size()) throw InputError("glm: design/response size mismatch");
  if (!design.allFinite() || !response.allFinite())
    throw InputError("glm: non-finite input");
}

Eigen::VectorXd penalty_mask(Eigen::Index p, const std::vector<int>& unpenalized) {
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(p);
  bool has_intercept = false;
  for (int j : unpenalized) {
    if (j < 0 || j >= p) throw InputError("glm: unpenalized index out of range");
    mask[j] = 0.0;
    if (j == 0) has_intercept = true;
  }
  if (!has_intercept) throw InputError("glm: intercept must be unpenalized");
  return mask;
}

double start_intercept(const Eigen::VectorXd& response, const Eigen::VectorXd& weights,
                       const LinkSpec& link) {
  double m = response.dot(weights) / weights.sum();
  if (link.kind == LinkKind::logistic) m = std::clamp(m, 1e-6, 1.0 - 1e-6);
  return link.link(m);
}

// Penalized score (1/sw) Z' diag(w) {y - g(Z gamma)} - lambda * mask .* gamma.
Eigen::VectorXd penalized_score(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                const LinkSpec& link, const Eigen::VectorXd& gamma,
                                double lambda, const Eigen::VectorXd& mask,
                                const Eigen::VectorXd& weights, double sw) {
  Eigen::VectorXd eta = design * gamma;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = weights[i] * (response[i] - link.inverse(eta[i]));
  Eigen::VectorXd score = design.transpose() * resid / sw;
  score -= lambda * mask.cwiseProduct(gamma);
  return score;
}

}  // namespace

double deviance(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                const LinkSpec& link, const Eigen::VectorXd& coefficients,
                const Eigen::VectorXd& weights) {
  Eigen::VectorXd w = resolve_weights(weights, design.rows());
  Eigen::VectorXd eta = design * coefficients;
  double dev = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) dev += w[i] * link.unit_deviance(response[i], eta[i]);
  return dev;
}

PenaltyGrid make_default_grid(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                              const LinkSpec& link, const Eigen::VectorXd& weights,
                              const std::vector<int>& unpenalized, PenaltySelection selection) {
  check_inputs(design, response);
  Eigen::VectorXd w = resolve_weights(weights, design.rows());
  const double sw = w.sum();
  Eigen::VectorXd mask = penalty_mask(design.cols(), unpenalized);

  Eigen::VectorXd gamma0 = Eigen::VectorXd::Zero(design.cols());
  gamma0[0] = start_intercept(response, w, link);
  Eigen::VectorXd score = penalized_score(design, response, link, gamma0, 0.0, mask, w, sw);
  double s = 0.0;
  for (Eigen::Index j = 0; j < score.size(); ++j)
    if (mask[j] > 0.0) s = std::max(s, std::abs(score[j]));
  if (!(s > 0.0)) s = 1.0;

  const int npts = 50;
  PenaltyGrid grid;
  grid.selection = selection;
  grid.values.resize(npts);
  const double hi = std::log(1e1 * s);
  const double lo = std::log(1e-4 * s);
  for (int k = 0; k < npts; ++k)
    grid.values[k] = std::exp(hi + (lo - hi) * static_cast<double>(k) / (npts - 1));
  return grid;
}

GlmFit fit_ridge_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                     const LinkSpec& link, double lambda, const std::vector<int>& unpenalized,
                     const Eigen::VectorXd& weights, const Eigen::VectorXd& warm_start) {
  check_inputs(design, response);
  if (lambda < 0.0 || !std::isfinite(lambda)) throw InputError("glm: invalid lambda");
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  Eigen::VectorXd w = resolve_weights(weights, n);
  const double sw = w.sum();
  Eigen::VectorXd mask = penalty_mask(p, unpenalized);

  Eigen::VectorXd gamma;
  if (warm_start.size() == p) {
    gamma = warm_start;
  } else {
    gamma = Eigen::VectorXd::Zero(p);
    gamma[0] = start_intercept(response, w, link);
  }

  constexpr int kMaxIter = 200;
  constexpr double kTol = 1e-8;
  GlmFit fit;
  fit.lambda = lambda;

  Eigen::VectorXd score = penalized_score(design, response, link, gamma, lambda, mask, w, sw);
  double score_norm = score.lpNorm<Eigen::Infinity>();
  fit.objective_trace.push_back(score_norm);

  for (int iter = 0; iter < kMaxIter && score_norm > kTol; ++iter) {
    Eigen::VectorXd eta = design * gamma;
    Eigen::VectorXd hw(n);
    for (Eigen::Index i = 0; i < n; ++i) hw[i] = w[i] * link.derivative(eta[i]);
    Eigen::MatrixXd hess(p, p);
    hess.setZero();
    hess.selfadjointView<Eigen::Lower>().rankUpdate(
        (design.array().colwise() * (hw.array() / sw).sqrt()).matrix().transpose());
    hess += (lambda * mask.array()).matrix().asDiagonal();

    Eigen::VectorXd step;
    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      Eigen::MatrixXd h = hess;
      if (jitter > 0.0) h += jitter * Eigen::MatrixXd::Identity(p, p);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h.selfadjointView<Eigen::Lower>());
      step = ldlt.solve(score);
      if (ldlt.info() == Eigen::Success && step.allFinite()) break;
      jitter = jitter == 0.0 ? 1e-10 : jitter * 1e3;
    }
    if (!step.allFinite()) break;

    // Backtracking on the score norm.
    double t = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      Eigen::VectorXd cand = gamma + t * step;
      Eigen::VectorXd cand_score =
          penalized_score(design, response, link, cand, lambda, mask, w, sw);
      double cand_norm = cand_score.lpNorm<Eigen::Infinity>();
      if (cand_norm < score_norm || cand_norm <= kTol) {
        gamma = cand;
        score = cand_score;
        score_norm = cand_norm;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    fit.objective_trace.push_back(score_norm);
    if (!accepted) break;
  }

  fit.coefficients = gamma;
  fit.converged = score_norm <= kTol;
  for (Eigen::Index j = 0; j < p; ++j)
    if (gamma[j] != 0.0 || j == 0) fit.support.push_back(static_cast<int>(j));
  return fit;
}

double cross_validate_ridge(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                            const LinkSpec& link, const PenaltyGrid& grid, int folds,
                            const std::vector<int>& unpenalized, const Eigen::VectorXd& weights) {
  check_inputs(design, response);
  grid.validate();
  const Eigen::Index n = design.rows();
  if (folds < 2) throw InputError("cv: folds must be >= 2");
  if (n < folds) throw InputError("cv: need at least `folds` rows");
  Eigen::VectorXd w = resolve_weights(weights, n);

  const std::size_t nl = grid.values.size();
  std::vector<double> total_dev(nl, 0.0);

  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train_idx, test_idx;
    for (Eigen::Index i = 0; i < n; ++i)
      (static_cast<int>(i % folds) == f ? test_idx : train_idx).push_back(i);
    if (train_idx.empty() || test_idx.empty()) continue;

    Eigen::MatrixXd ztr(train_idx.size(), design.cols());
    Eigen::VectorXd ytr(train_idx.size()), wtr(train_idx.size());
    for (std::size_t k = 0; k < train_idx.size(); ++k) {
      ztr.row(k) = design.row(train_idx[k]);
      ytr[k] = response[train_idx[k]];
      wtr[k] = w[train_idx[k]];
    }
    if (wtr.sum() <= 0.0) continue;

    Eigen::VectorXd warm;
    for (std::size_t l = 0; l < nl; ++l) {
      GlmFit fit = fit_ridge_glm(ztr, ytr, link, grid.values[l], unpenalized, wtr, warm);
      warm = fit.coefficients;
      for (Eigen::Index i : test_idx) {
        double eta = design.row(i).dot(fit.coefficients);
        total_dev[l] += w[i] * link.unit_deviance(response[i], eta);
      }
    }
  }

  // Grid is decreasing, so scanning in order and keeping strict improvements
  // breaks ties toward the larger penalty.
  std::size_t best = 0;
  for (std::size_t l = 1; l < nl; ++l)
    if (total_dev[l] < total_dev[best]) best = l;
  return grid.values[best];
}

namespace {

struct CdPath {
  Eigen::VectorXd coefficients;
  bool converged = true;
};

// Cyclic coordinate descent with a fixed curvature majorizer.  Coordinates
// are visited in index order, which is what makes the duplicated-column
// tie-break deterministic (the lowest index absorbs the signal first).
CdPath coordinate_descent(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                          const LinkSpec& link, const Eigen::VectorXd& penalty_factor,
                          double lambda, const Eigen::VectorXd& weights, double sw,
                          Eigen::VectorXd gamma) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  const double curv = link.curvature_bound();

  Eigen::VectorXd col_l(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    col_l[j] = curv * (weights.array() * design.col(j).array().square()).sum() / sw;
    if (col_l[j] <= 0.0) col_l[j] = 1.0;  // constant-zero column: any step is a no-op
  }

  Eigen::VectorXd eta = design * gamma;
  constexpr int kMaxSweeps = 2000;
  constexpr double kCoefTol = 1e-11;
  constexpr double kKktTol = 1e-8;
  bool converged = false;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      double pf = penalty_factor[j];
      if (std::isinf(pf)) continue;  // zero pilot weight: coefficient stays at zero
      double sj = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        sj += weights[i] * design(i, j) * (response[i] - link.inverse(eta[i]));
      sj /= sw;
      double old = gamma[j];
      double cand = old + sj / col_l[j];
      double next;
      if (pf <= 0.0) {
        next = cand;
      } else {
        double thr = lambda * pf / col_l[j];
        next = std::abs(cand) <= thr ? 0.0 : (cand > 0 ? cand - thr : cand + thr);
      }
      double delta = next - old;
      if (delta != 0.0) {
        gamma[j] = next;
        eta += delta * design.col(j);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < kCoefTol) {
      // KKT check on the exact subgradient.
      double kkt = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        double pf = penalty_factor[j];
        if (std::isinf(pf)) continue;
        double sj = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
          sj += weights[i] * design(i, j) * (response[i] - link.inverse(eta[i]));
        sj /= sw;
        double viol;
        if (pf <= 0.0) {
          viol = std::abs(sj);
        } else if (gamma[j] == 0.0) {
          viol = std::max(0.0, std::abs(sj) - lambda * pf);
        } else {
          viol = std::abs(sj - lambda * pf * (gamma[j] > 0 ? 1.0 : -1.0));
        }
        kkt = std::max(kkt, viol);
      }
      if (kkt <= kKktTol) {
        converged = true;
        break;
      }
    }
  }
  return CdPath{std::move(gamma), converged};
}

}  // namespace

GlmFit fit_adaptive_lasso(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                          const LinkSpec& link, const PenaltyGrid& grid,
                          const std::vector<int>& unpenalized, const Eigen::VectorXd& weights,
                          const AdaptiveLassoOptions& options) {
  check_inputs(design, response);
  if (design.rows() < 2) throw InputError("adaptive lasso: need at least 2 rows");
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  Eigen::VectorXd w = resolve_weights(weights, n);
  const double sw = w.sum();
  Eigen::VectorXd mask = penalty_mask(p, unpenalized);

  // Pilot ridge fit for the adaptive weights.
  double pilot_lambda = options.pilot_lambda;
  if (!std::isfinite(pilot_lambda)) {
    PenaltyGrid pilot_grid =
        make_default_grid(design, response, link, w, unpenalized, PenaltySelection::cv_deviance);
    pilot_lambda = cross_validate_ridge(design, response, link, pilot_grid, options.cv_folds,
                                        unpenalized, w);
  }
  GlmFit pilot = fit_ridge_glm(design, response, link, pilot_lambda, unpenalized, w);
  bool pilot_ok = pilot.converged;

  Eigen::VectorXd penalty_factor(p);
  double max_pilot = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (mask[j] == 0.0) {
      penalty_factor[j] = 0.0;
    } else {
      double aw = std::abs(pilot.coefficients[j]);
      max_pilot = std::max(max_pilot, aw);
      penalty_factor[j] = aw > 0.0 ? 1.0 / aw : std::numeric_limits<double>::infinity();
    }
  }
  if (max_pilot == 0.0 && (mask.array() > 0.0).any())
    throw InputError("adaptive lasso: degenerate pilot (all adaptive weights zero)");

  PenaltyGrid path_grid = grid;
  if (path_grid.values.empty())
    path_grid = make_default_grid(design, response, link, w, unpenalized,
                                  PenaltySelection::modified_bic);
  path_grid.validate();

  std::vector<double> lambdas;
  if (std::isfinite(options.fixed_lambda)) {
    lambdas.push_back(options.fixed_lambda);
  } else {
    lambdas = path_grid.values;
  }

  // Coordinate-descent path with warm starts, scored by modified BIC.
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
  gamma[0] = start_intercept(response, w, link);
  double best_bic = std::numeric_limits<double>::infinity();
  double best_lambda = lambdas.front();
  Eigen::VectorXd best_gamma = gamma;
  bool path_ok = true;
  std::vector<double> bic_trace;
  const double logn = std::log(sw);

  for (double lam : lambdas) {
    CdPath cd = coordinate_descent(design, response, link, penalty_factor, lam, w, sw, gamma);
    gamma = cd.coefficients;
    path_ok = path_ok && cd.converged;
    double dev = deviance(design, response, link, gamma, w);
    int df = 0;
    for (Eigen::Index j = 0; j < p; ++j)
      if (gamma[j] != 0.0 || j == 0) ++df;
    double bic = dev + df * logn;
    bic_trace.push_back(bic);
    if (bic < best_bic) {  // strict: ties keep the larger penalty
      best_bic = bic;
      best_lambda = lam;
      best_gamma = gamma;
    }
  }

  // Unpenalized refit on the selected support; dropped coefficients stay
  // exact zeros.
  std::vector<int> support;
  for (Eigen::Index j = 0; j < p; ++j)
    if (best_gamma[j] != 0.0 || j == 0) support.push_back(static_cast<int>(j));

  Eigen::MatrixXd sub(n, support.size());
  for (std::size_t k = 0; k < support.size(); ++k) sub.col(k) = design.col(support[k]);
  GlmFit refit = fit_ridge_glm(sub, response, link, 0.0, {0}, w);

  GlmFit out;
  out.lambda = best_lambda;
  out.pilot_lambda = pilot_lambda;
  out.coefficients = Eigen::VectorXd::Zero(p);
  for (std::size_t k = 0; k < support.size(); ++k)
    out.coefficients[support[k]] = refit.coefficients[k];
  out.support = support;
  out.converged = pilot_ok && path_ok && refit.converged;
  out.objective_trace = bic_trace;
  return out;
}

}  // namespace ssate
