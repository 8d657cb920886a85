#include "ssate/dips.hpp"

#include <cmath>

#include "ssate/stats.hpp"

namespace ssate {

namespace {

Eigen::VectorXd ones_if_empty(const Eigen::VectorXd& w, Eigen::Index n) {
  if (w.size() == 0) return Eigen::VectorXd::Ones(n);
  if (w.size() != n) throw InputError("dips: weight length mismatch");
  return w;
}

// Standardize then map through the normal CDF; a zero-variance direction
// collapses to 0.5 everywhere.
Eigen::VectorXd pit_transform(const Eigen::VectorXd& s, const Eigen::VectorXd& w,
                              bool* degenerate) {
  double sd = weighted_sd(s, w);
  *degenerate = !(sd > 0.0) || !std::isfinite(sd);
  Eigen::VectorXd out(s.size());
  if (*degenerate) {
    out.setConstant(0.5);
    return out;
  }
  double m = weighted_mean(s, w);
  for (Eigen::Index i = 0; i < s.size(); ++i) out[i] = normal_cdf((s[i] - m) / sd);
  return out;
}

}  // namespace

ScoreSet bivariate_scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& alpha1,
                          const Eigen::VectorXd& beta1, const Eigen::VectorXd& weights) {
  if (x.cols() != alpha1.size() || x.cols() != beta1.size())
    throw InputError("bivariate_scores: dimension mismatch");
  Eigen::VectorXd w = ones_if_empty(weights, x.rows());
  ScoreSet s;
  s.raw_alpha = x * alpha1;
  s.raw_beta = x * beta1;
  s.transformed_alpha = pit_transform(s.raw_alpha, w, &s.alpha_degenerate);
  s.transformed_beta = pit_transform(s.raw_beta, w, &s.beta_degenerate);
  return s;
}

SmoothResult smooth_ps(const Eigen::VectorXd& ua, const Eigen::VectorXd& ub,
                       const Eigen::VectorXd& treatment, const KernelSpec& kernel,
                       double truncation_eps, const Eigen::VectorXd& weights) {
  const Eigen::Index n = ua.size();
  if (ub.size() != n || treatment.size() != n)
    throw InputError("smooth_ps: length mismatch");
  if (!(truncation_eps > 0.0 && truncation_eps < 0.5))
    throw InputError("smooth_ps: truncation must lie in (0, 0.5)");
  kernel.validate();
  Eigen::VectorXd w = ones_if_empty(weights, n);

  SmoothResult res;
  res.pi_hat.resize(n);

  const double treated_w = (w.array() * treatment.array()).sum();
  const double control_w = (w.array() * (1.0 - treatment.array())).sum();
  const double total_w = treated_w + control_w;
  if (treated_w <= 0.0 || control_w <= 0.0) {
    res.degenerate_arm = true;
    double v = treated_w <= 0.0 ? truncation_eps : 1.0 - truncation_eps;
    res.pi_hat.setConstant(v);
    (treated_w <= 0.0 ? res.truncated_low : res.truncated_high) = static_cast<int>(n);
    return res;
  }
  const double global_frac = treated_w / total_w;

  Eigen::VectorXd num = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(n);

  // Symmetric half-pass: K(S_j - S_i) = K(S_i - S_j), so each pair feeds
  // both rows; the diagonal self term is added first.
  const double k0 = kernel.bivariate_scaled(0.0, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    num[i] = k0 * w[i] * treatment[i];
    den[i] = k0 * w[i];
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double uai = ua[i], ubi = ub[i];
    const double wi = w[i], ti = treatment[i];
    double num_i = 0.0, den_i = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double k = kernel.bivariate_scaled(ua[j] - uai, ub[j] - ubi);
      if (k != 0.0) {
        num_i += k * w[j] * treatment[j];
        den_i += k * w[j];
        num[j] += k * wi * ti;
        den[j] += k * wi;
      }
    }
    num[i] += num_i;
    den[i] += den_i;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    double raw;
    if (!(den[i] > 0.0) || !std::isfinite(den[i])) {
      raw = global_frac;
      ++res.denominator_fallbacks;
    } else {
      raw = num[i] / den[i];
    }
    if (raw < truncation_eps) {
      ++res.truncated_low;
      raw = truncation_eps;
    } else if (raw > 1.0 - truncation_eps) {
      ++res.truncated_high;
      raw = 1.0 - truncation_eps;
    }
    res.pi_hat[i] = raw;
  }
  return res;
}

DipsFit fit_dips_weighted(const Dataset& data, const ModelConfig& config,
                          const Eigen::VectorXd& weights,
                          const Eigen::VectorXd* alpha1_override) {
  data.validate();
  config.validate();
  if (data.n_labeled() == 0)
    throw EstimationError("fit_dips: labeled subset is empty (outcome model needs labeled rows)");

  const int n = data.rows();
  const int px = data.p_x();
  Eigen::VectorXd w = ones_if_empty(weights, n);

  AdaptiveLassoOptions opts;
  opts.cv_folds = config.cv_folds;
  opts.pilot_lambda = config.fixed_pilot_lambda;

  DipsFit fit;
  Eigen::VectorXd alpha1;
  if (alpha1_override != nullptr) {
    if (alpha1_override->size() != px) throw InputError("fit_dips: alpha direction size mismatch");
    alpha1 = *alpha1_override;
  } else {
    // PS working model on all rows.
    Eigen::MatrixXd za(n, px + 1);
    za.col(0).setOnes();
    za.rightCols(px) = data.x;
    opts.fixed_lambda = config.fixed_alasso_lambda_alpha;
    fit.alpha = fit_adaptive_lasso(za, data.t, make_link(LinkKind::logistic), PenaltyGrid{},
                                   {0}, w, opts);
    alpha1 = fit.alpha.coefficients.segment(1, px);
  }

  // Baseline outcome working model on labeled rows.
  const int nl = data.n_labeled();
  Eigen::MatrixXd zb(nl, px + 2);
  Eigen::VectorXd yl(nl), wl(nl);
  for (int k = 0; k < nl; ++k) {
    int i = data.labeled[k];
    zb(k, 0) = 1.0;
    zb.block(k, 1, 1, px) = data.x.row(i);
    zb(k, px + 1) = data.t[i];
    yl[k] = data.y[i];
    wl[k] = w[i];
  }
  opts.fixed_lambda = config.fixed_alasso_lambda_beta;
  fit.beta = fit_adaptive_lasso(zb, yl, make_link(config.link_outcome), PenaltyGrid{}, {0}, wl,
                                opts);
  Eigen::VectorXd beta1 = fit.beta.coefficients.segment(1, px);

  fit.scores = bivariate_scores(data.x, alpha1, beta1, w);
  fit.kernel.order = config.kernel_order;
  fit.kernel.bandwidth = plugin_bandwidth(n, config.bandwidth_alpha, config.bandwidth_scale);
  SmoothResult sm = smooth_ps(fit.scores.transformed_alpha, fit.scores.transformed_beta, data.t,
                              fit.kernel, config.ps_truncation, w);
  fit.pi_hat = std::move(sm.pi_hat);
  fit.diagnostics["dips_truncated_low"] = sm.truncated_low;
  fit.diagnostics["dips_truncated_high"] = sm.truncated_high;
  fit.diagnostics["dips_denominator_fallbacks"] = sm.denominator_fallbacks;
  fit.diagnostics["dips_degenerate_arm"] = sm.degenerate_arm ? 1.0 : 0.0;
  fit.diagnostics["dips_score_alpha_degenerate"] = fit.scores.alpha_degenerate ? 1.0 : 0.0;
  fit.diagnostics["dips_score_beta_degenerate"] = fit.scores.beta_degenerate ? 1.0 : 0.0;
  return fit;
}

DipsFit fit_dips(const Dataset& data, const ModelConfig& config) {
  return fit_dips_weighted(data, config, Eigen::VectorXd(), nullptr);
}

}  // namespace ssate
