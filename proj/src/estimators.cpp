#include "ssate/estimators.hpp"

#include <cmath>
#include <optional>

#include "ssate/stats.hpp"

namespace ssate {

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::ss_dr: return "ss_dr";
    case EstimatorKind::cc_ipw: return "cc_ipw";
    case EstimatorKind::cc_reg: return "cc_reg";
    case EstimatorKind::cc_dr: return "cc_dr";
    case EstimatorKind::ss_naive: return "ss_naive";
    case EstimatorKind::ss_prepost: return "ss_prepost";
    case EstimatorKind::cc_naive: return "cc_naive";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  for (EstimatorKind k : all_estimators())
    if (estimator_name(k) == name) return k;
  throw InputError("unknown estimator '" + name + "'");
}

const std::vector<EstimatorKind>& all_estimators() {
  static const std::vector<EstimatorKind> kinds = {
      EstimatorKind::ss_dr,    EstimatorKind::cc_ipw,     EstimatorKind::cc_reg,
      EstimatorKind::cc_dr,    EstimatorKind::ss_naive,   EstimatorKind::ss_prepost,
      EstimatorKind::cc_naive};
  return kinds;
}

Eigen::VectorXd efficient_influence(const Eigen::VectorXd& y, const Eigen::VectorXd& t,
                                    const Eigen::VectorXd& pi, const Eigen::VectorXd& xi) {
  const Eigen::Index n = y.size();
  if (t.size() != n || pi.size() != n || xi.size() != n)
    throw InputError("efficient_influence: length mismatch");
  Eigen::VectorXd phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double u = t[i] == 1.0 ? 1.0 / pi[i] : -1.0 / (1.0 - pi[i]);
    phi[i] = u * (y[i] - xi[i]);
  }
  return phi;
}

namespace {

Eigen::VectorXd unit_weights_if_empty(const Eigen::VectorXd& w, Eigen::Index n) {
  if (w.size() == 0) return Eigen::VectorXd::Ones(n);
  if (w.size() != n) throw InputError("estimators: weight length mismatch");
  return w;
}

double effective_sample_size(const std::vector<double>& weights) {
  double s = 0.0, s2 = 0.0;
  for (double v : weights) {
    s += v;
    s2 += v * v;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

}  // namespace

ArmMeans hajek_means(const Eigen::VectorXd& t, const Eigen::VectorXd& ps,
                     const Eigen::VectorXd& outcome, const Eigen::VectorXd& weights) {
  const Eigen::Index n = t.size();
  if (ps.size() != n || outcome.size() != n) throw InputError("hajek: length mismatch");
  Eigen::VectorXd w = unit_weights_if_empty(weights, n);
  double num1 = 0.0, den1 = 0.0, num0 = 0.0, den0 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t[i] == 1.0) {
      double a = w[i] / ps[i];
      num1 += a * outcome[i];
      den1 += a;
    } else {
      double a = w[i] / (1.0 - ps[i]);
      num0 += a * outcome[i];
      den0 += a;
    }
  }
  if (!(den1 > 0.0) || !(den0 > 0.0))
    throw EstimationError("hajek: a treatment arm carries no weight");
  return ArmMeans{num1 / den1, num0 / den0};
}

ArmMeans aipw_means(const Eigen::VectorXd& y, const Eigen::VectorXd& t, const Eigen::VectorXd& ps,
                    const Eigen::VectorXd& mu1_hat, const Eigen::VectorXd& mu0_hat,
                    const Eigen::VectorXd& weights) {
  const Eigen::Index n = y.size();
  if (t.size() != n || ps.size() != n || mu1_hat.size() != n || mu0_hat.size() != n)
    throw InputError("aipw: length mismatch");
  Eigen::VectorXd w = unit_weights_if_empty(weights, n);
  double sw = w.sum();
  if (!(sw > 0.0)) throw EstimationError("aipw: zero total weight");
  double s1 = 0.0, s0 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double a1 = t[i] == 1.0 ? (y[i] - mu1_hat[i]) / ps[i] : 0.0;
    double a0 = t[i] == 0.0 ? (y[i] - mu0_hat[i]) / (1.0 - ps[i]) : 0.0;
    s1 += w[i] * (a1 + mu1_hat[i]);
    s0 += w[i] * (a0 + mu0_hat[i]);
  }
  return ArmMeans{s1 / sw, s0 / sw};
}

ArmMeans prepost_means(const Eigen::VectorXd& y, const std::vector<bool>& labeled,
                       const Eigen::VectorXd& t, const Eigen::VectorXd& ps, double rho,
                       const Eigen::VectorXd& e1, const Eigen::VectorXd& e0,
                       const Eigen::VectorXd& m1, const Eigen::VectorXd& m0,
                       const Eigen::VectorXd& weights) {
  const Eigen::Index n = t.size();
  if (y.size() != n || static_cast<Eigen::Index>(labeled.size()) != n || ps.size() != n ||
      e1.size() != n || e0.size() != n || m1.size() != n || m0.size() != n)
    throw InputError("prepost: length mismatch");
  if (!(rho > 0.0)) throw EstimationError("prepost: labeled fraction is zero");
  Eigen::VectorXd w = unit_weights_if_empty(weights, n);
  double sw = w.sum();
  double s1 = 0.0, s0 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double r_over_rho = labeled[i] ? 1.0 / rho : 0.0;
    double yi = labeled[i] ? y[i] : 0.0;
    double w1 = t[i] == 1.0 ? 1.0 / ps[i] : 0.0;
    double w0 = t[i] == 0.0 ? 1.0 / (1.0 - ps[i]) : 0.0;
    s1 += w[i] * (w1 * (r_over_rho * yi - (r_over_rho - 1.0) * e1[i]) - (w1 - 1.0) * m1[i]);
    s0 += w[i] * (w0 * (r_over_rho * yi - (r_over_rho - 1.0) * e0[i]) - (w0 - 1.0) * m0[i]);
  }
  return ArmMeans{s1 / sw, s0 / sw};
}

double ipw_functional(const Eigen::VectorXd& y, const Eigen::VectorXd& t,
                      const Eigen::VectorXd& ps, const Eigen::VectorXd& weights) {
  const Eigen::Index n = y.size();
  if (t.size() != n || ps.size() != n) throw InputError("ipw: length mismatch");
  Eigen::VectorXd w = unit_weights_if_empty(weights, n);
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double u = t[i] == 1.0 ? y[i] / ps[i] : -y[i] / (1.0 - ps[i]);
    s += w[i] * u;
  }
  return s / w.sum();
}

namespace {

// One weighted pass over the data with lazily shared fits.
class Pipeline {
 public:
  Pipeline(const Dataset& data, const ModelConfig& cfg, const Eigen::VectorXd& weights,
           const TuningSelections* tuning)
      : data_(data), cfg_(cfg), tuning_(tuning) {
    data_.validate();
    cfg_.validate();
    w_ = unit_weights_if_empty(weights, data_.rows());
    if (!w_.allFinite() || (w_.array() < 0.0).any())
      throw InputError("estimators: weights must be nonnegative and finite");
    if (!(w_.sum() > 0.0)) throw InputError("estimators: weights sum to zero");
    const int nl = data_.n_labeled();
    wl_.resize(nl);
    yl_.resize(nl);
    for (int k = 0; k < nl; ++k) {
      wl_[k] = w_[data_.labeled[k]];
      yl_[k] = data_.y[data_.labeled[k]];
    }
  }

  EstimateReport evaluate(EstimatorKind kind) {
    switch (kind) {
      case EstimatorKind::ss_dr: return eval_ss_dr();
      case EstimatorKind::cc_ipw: return eval_cc_ipw();
      case EstimatorKind::cc_reg: return eval_cc_reg();
      case EstimatorKind::cc_dr: return eval_cc_dr();
      case EstimatorKind::ss_naive: return eval_ss_naive();
      case EstimatorKind::ss_prepost: return eval_ss_prepost();
      case EstimatorKind::cc_naive: return eval_cc_naive();
    }
    throw InputError("unknown estimator kind");
  }

  TuningSelections selections() const { return selected_; }

 private:
  bool selecting() const { return tuning_ == nullptr; }

  AdaptiveLassoOptions alasso_options(double frozen_pilot, double fixed_lambda) const {
    AdaptiveLassoOptions opts;
    opts.cv_folds = cfg_.cv_folds;
    opts.pilot_lambda =
        selecting() ? cfg_.fixed_pilot_lambda : frozen_pilot;
    opts.fixed_lambda = fixed_lambda;
    return opts;
  }

  const GlmFit& alpha_fit() {
    if (!alpha_) {
      const int n = data_.rows();
      const int px = data_.p_x();
      Eigen::MatrixXd za(n, px + 1);
      za.col(0).setOnes();
      za.rightCols(px) = data_.x;
      LinkSpec link = make_link(LinkKind::logistic);
      PenaltyGrid grid;
      if (selecting()) {
        grid = make_default_grid(za, data_.t, link, w_, {0}, PenaltySelection::modified_bic);
        selected_.alpha_grid = grid;
      } else {
        grid = tuning_->alpha_grid;
      }
      alpha_ = fit_adaptive_lasso(
          za, data_.t, link, grid, {0}, w_,
          alasso_options(selecting() ? 0.0 : tuning_->alpha_pilot_lambda,
                         cfg_.fixed_alasso_lambda_alpha));
      if (selecting()) {
        selected_.alpha_pilot_lambda = alpha_->pilot_lambda;
        selected_.alpha1_point = alpha_->coefficients.segment(1, px);
      }
    }
    return *alpha_;
  }

  const GlmFit& beta_fit() {
    if (!beta_) {
      const int nl = data_.n_labeled();
      const int px = data_.p_x();
      if (nl == 0) throw EstimationError("estimator needs a nonempty labeled subset");
      Eigen::MatrixXd zb(nl, px + 2);
      for (int k = 0; k < nl; ++k) {
        int i = data_.labeled[k];
        zb(k, 0) = 1.0;
        zb.block(k, 1, 1, px) = data_.x.row(i);
        zb(k, px + 1) = data_.t[i];
      }
      LinkSpec link = make_link(cfg_.link_outcome);
      PenaltyGrid grid;
      if (selecting()) {
        grid = make_default_grid(zb, yl_, link, wl_, {0}, PenaltySelection::modified_bic);
        selected_.beta_grid = grid;
      } else {
        grid = tuning_->beta_grid;
      }
      beta_ = fit_adaptive_lasso(
          zb, yl_, link, grid, {0}, wl_,
          alasso_options(selecting() ? 0.0 : tuning_->beta_pilot_lambda,
                         cfg_.fixed_alasso_lambda_beta));
      if (selecting()) selected_.beta_pilot_lambda = beta_->pilot_lambda;
    }
    return *beta_;
  }

  // Parametric PS pi(x; alpha-hat), truncated.
  const Eigen::VectorXd& parametric_ps() {
    if (!ps_param_) {
      const GlmFit& a = alpha_fit();
      LinkSpec link = make_link(LinkKind::logistic);
      Eigen::VectorXd ps(data_.rows());
      int truncated = 0;
      const double eps = cfg_.ps_truncation;
      for (int i = 0; i < data_.rows(); ++i) {
        double eta = a.coefficients[0] + data_.x.row(i).dot(a.coefficients.tail(data_.p_x()));
        double p = link.inverse(eta);
        if (p < eps || p > 1.0 - eps) ++truncated;
        ps[i] = std::clamp(p, eps, 1.0 - eps);
      }
      ps_param_ = std::move(ps);
      shared_diag_["ps_param_truncated"] = truncated;
    }
    return *ps_param_;
  }

  // Smoothed double-index PS.  The alpha direction comes from the point
  // estimate unless we are selecting or running fully starred.
  const DipsFit& dips() {
    if (!dips_) {
      Eigen::VectorXd alpha1;
      if (selecting() || cfg_.perturb_fully_starred) {
        alpha1 = alpha_fit().coefficients.segment(1, data_.p_x());
      } else {
        alpha1 = tuning_->alpha1_point;
      }
      DipsFit fit = fit_dips_weighted_with_beta(alpha1);
      dips_ = std::move(fit);
    }
    return *dips_;
  }

  DipsFit fit_dips_weighted_with_beta(const Eigen::VectorXd& alpha1) {
    DipsFit fit;
    fit.beta = beta_fit();
    Eigen::VectorXd beta1 = fit.beta.coefficients.segment(1, data_.p_x());
    fit.scores = bivariate_scores(data_.x, alpha1, beta1, w_);
    fit.kernel.order = cfg_.kernel_order;
    fit.kernel.bandwidth =
        plugin_bandwidth(data_.rows(), cfg_.bandwidth_alpha, cfg_.bandwidth_scale);
    SmoothResult sm = smooth_ps(fit.scores.transformed_alpha, fit.scores.transformed_beta,
                                data_.t, fit.kernel, cfg_.ps_truncation, w_);
    fit.pi_hat = std::move(sm.pi_hat);
    fit.diagnostics["dips_truncated_low"] = sm.truncated_low;
    fit.diagnostics["dips_truncated_high"] = sm.truncated_high;
    fit.diagnostics["dips_denominator_fallbacks"] = sm.denominator_fallbacks;
    fit.diagnostics["dips_degenerate_arm"] = sm.degenerate_arm ? 1.0 : 0.0;
    fit.diagnostics["dips_score_alpha_degenerate"] = fit.scores.alpha_degenerate ? 1.0 : 0.0;
    fit.diagnostics["dips_score_beta_degenerate"] = fit.scores.beta_degenerate ? 1.0 : 0.0;
    return fit;
  }

  // V with the count transform applied to the surrogate block when enabled.
  const Eigen::MatrixXd& v_matrix() {
    if (!v_) {
      Eigen::MatrixXd v = data_.v();
      if (cfg_.count_log_transform && data_.p_w() > 0) {
        for (int j = 0; j < data_.p_w(); ++j)
          for (int i = 0; i < data_.rows(); ++i) v(i, j) = std::log1p(std::max(0.0, v(i, j)));
      }
      v_ = std::move(v);
    }
    return *v_;
  }

  struct ImputationPieces {
    ImputationFit fit;
    Eigen::VectorXd y_imp;  // all N rows
    Eigen::VectorXd xi_labeled;
  };

  const ImputationPieces& imputation() {
    if (!imp_) {
      const DipsFit& d = dips();
      Eigen::VectorXd u = utility_covariates(data_.t, d.pi_hat);
      SplineBasis basis =
          make_spline_basis(v_matrix(), u, cfg_.spline_knots, cfg_.interaction_vt, w_);
      Eigen::MatrixXd design = build_imputation_design(v_matrix(), data_.t, u, basis);

      const int nl = data_.n_labeled();
      if (nl < 2) throw EstimationError("imputation model needs at least 2 labeled rows");
      Eigen::MatrixXd design_l(nl, design.cols());
      for (int k = 0; k < nl; ++k) design_l.row(k) = design.row(data_.labeled[k]);

      LinkSpec link = make_link(cfg_.link_imputation);
      double lambda;
      if (selecting()) {
        if (std::isfinite(cfg_.fixed_gamma_lambda)) {
          lambda = cfg_.fixed_gamma_lambda;
        } else {
          PenaltyGrid grid =
              make_default_grid(design_l, yl_, link, wl_, {0}, PenaltySelection::cv_deviance);
          lambda = cross_validate_ridge(design_l, yl_, link, grid, cfg_.cv_folds, {0}, wl_);
        }
        selected_.gamma_lambda = lambda;
      } else {
        lambda = tuning_->gamma_lambda;
      }

      ImputationPieces pieces;
      pieces.fit = fit_imputation(design_l, yl_, basis, link, lambda, wl_);
      pieces.y_imp = impute(pieces.fit, design);
      pieces.xi_labeled.resize(nl);
      for (int k = 0; k < nl; ++k) pieces.xi_labeled[k] = pieces.y_imp[data_.labeled[k]];
      imp_ = std::move(pieces);
    }
    return *imp_;
  }

  void require_labeled_arms() {
    double t1 = 0.0, t0 = 0.0;
    for (int k = 0; k < data_.n_labeled(); ++k) {
      int i = data_.labeled[k];
      (data_.t[i] == 1.0 ? t1 : t0) += wl_[k];
    }
    if (!(t1 > 0.0) || !(t0 > 0.0))
      throw EstimationError("labeled subset must contain both treatment arms");
  }

  void require_pooled_arms() {
    double t1 = (w_.array() * data_.t.array()).sum();
    double t0 = (w_.array() * (1.0 - data_.t.array())).sum();
    if (!(t1 > 0.0) || !(t0 > 0.0))
      throw EstimationError("both treatment arms must be present among all rows");
  }

  Eigen::VectorXd outcome_regression(int arm, const Eigen::MatrixXd& rows_x) {
    const GlmFit& b = beta_fit();
    LinkSpec link = make_link(cfg_.link_outcome);
    const int px = data_.p_x();
    Eigen::VectorXd out(rows_x.rows());
    for (Eigen::Index i = 0; i < rows_x.rows(); ++i) {
      double eta = b.coefficients[0] + rows_x.row(i).dot(b.coefficients.segment(1, px)) +
                   b.coefficients[px + 1] * arm;
      out[i] = link.inverse(eta);
    }
    return out;
  }

  // Plain (unpenalized) weighted GLM used by the reference estimators.
  GlmFit plain_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                   const LinkSpec& link, const Eigen::VectorXd& weights) {
    return fit_ridge_glm(design, response, link, 0.0, {0}, weights);
  }

  void attach_shared(EstimateReport& rep) {
    for (const auto& [k, v] : shared_diag_) rep.diagnostics[k] = v;
    rep.diagnostics["n_labeled"] = data_.n_labeled();
    rep.diagnostics["n_rows"] = data_.rows();
  }

  EstimateReport eval_ss_dr() {
    require_pooled_arms();
    const DipsFit& d = dips();
    const ImputationPieces& ip = imputation();
    ArmMeans m = hajek_means(data_.t, d.pi_hat, ip.y_imp, w_);

    EstimateReport rep;
    rep.kind = EstimatorKind::ss_dr;
    rep.mu1 = m.mu1;
    rep.mu0 = m.mu0;
    rep.delta = m.mu1 - m.mu0;
    rep.diagnostics = d.diagnostics;
    rep.diagnostics["gamma_converged"] = ip.fit.gamma.converged ? 1.0 : 0.0;
    rep.diagnostics["gamma_lambda"] =
        selecting() ? selected_.gamma_lambda : tuning_->gamma_lambda;
    rep.diagnostics["imputation_design_width"] = ip.fit.design_width;

    std::vector<double> wt1, wt0;
    for (int i = 0; i < data_.rows(); ++i) {
      if (data_.t[i] == 1.0)
        wt1.push_back(w_[i] / d.pi_hat[i]);
      else
        wt0.push_back(w_[i] / (1.0 - d.pi_hat[i]));
    }
    rep.diagnostics["ess_treated"] = effective_sample_size(wt1);
    rep.diagnostics["ess_control"] = effective_sample_size(wt0);

    // Efficient-influence second moment over labeled rows (diagnostic).
    const int nl = data_.n_labeled();
    Eigen::VectorXd tl(nl), pil(nl);
    for (int k = 0; k < nl; ++k) {
      tl[k] = data_.t[data_.labeled[k]];
      pil[k] = d.pi_hat[data_.labeled[k]];
    }
    Eigen::VectorXd phi = efficient_influence(yl_, tl, pil, ip.xi_labeled);
    rep.diagnostics["eif_second_moment"] =
        nl > 0 ? phi.squaredNorm() / static_cast<double>(nl) : 0.0;
    attach_shared(rep);
    return rep;
  }

  EstimateReport eval_cc_ipw() {
    require_labeled_arms();
    const Eigen::VectorXd& ps = parametric_ps();
    const int nl = data_.n_labeled();
    Eigen::VectorXd tl(nl), psl(nl);
    for (int k = 0; k < nl; ++k) {
      tl[k] = data_.t[data_.labeled[k]];
      psl[k] = ps[data_.labeled[k]];
    }
    ArmMeans m = hajek_means(tl, psl, yl_, wl_);
    EstimateReport rep;
    rep.kind = EstimatorKind::cc_ipw;
    rep.mu1 = m.mu1;
    rep.mu0 = m.mu0;
    rep.delta = m.mu1 - m.mu0;
    attach_shared(rep);
    return rep;
  }

  EstimateReport eval_cc_reg() {
    require_labeled_arms();
    Eigen::MatrixXd rows_x;
    Eigen::VectorXd rows_w;
    if (cfg_.cc_reg_all_rows) {
      rows_x = data_.x;
      rows_w = w_;
    } else {
      const int nl = data_.n_labeled();
      rows_x.resize(nl, data_.p_x());
      rows_w.resize(nl);
      for (int k = 0; k < nl; ++k) {
        rows_x.row(k) = data_.x.row(data_.labeled[k]);
        rows_w[k] = wl_[k];
      }
    }
    Eigen::VectorXd mu1 = outcome_regression(1, rows_x);
    Eigen::VectorXd mu0 = outcome_regression(0, rows_x);
    double sw = rows_w.sum();
    EstimateReport rep;
    rep.kind = EstimatorKind::cc_reg;
    rep.mu1 = mu1.dot(rows_w) / sw;
    rep.mu0 = mu0.dot(rows_w) / sw;
    rep.delta = rep.mu1 - rep.mu0;
    attach_shared(rep);
    return rep;
  }

  EstimateReport eval_cc_dr() {
    require_labeled_arms();
    const Eigen::VectorXd& ps = parametric_ps();
    const int nl = data_.n_labeled();
    Eigen::VectorXd tl(nl), psl(nl);
    Eigen::MatrixXd xl(nl, data_.p_x());
    for (int k = 0; k < nl; ++k) {
      int i = data_.labeled[k];
      tl[k] = data_.t[i];
      psl[k] = ps[i];
      xl.row(k) = data_.x.row(i);
    }
    Eigen::VectorXd mu1 = outcome_regression(1, xl);
    Eigen::VectorXd mu0 = outcome_regression(0, xl);
    ArmMeans m = aipw_means(yl_, tl, psl, mu1, mu0, wl_);
    EstimateReport rep;
    rep.kind = EstimatorKind::cc_dr;
    rep.mu1 = m.mu1;
    rep.mu0 = m.mu0;
    rep.delta = m.mu1 - m.mu0;
    attach_shared(rep);
    return rep;
  }

  EstimateReport eval_cc_naive() {
    require_labeled_arms();
    double s1 = 0.0, w1 = 0.0, s0 = 0.0, w0 = 0.0;
    for (int k = 0; k < data_.n_labeled(); ++k) {
      int i = data_.labeled[k];
      if (data_.t[i] == 1.0) {
        s1 += wl_[k] * yl_[k];
        w1 += wl_[k];
      } else {
        s0 += wl_[k] * yl_[k];
        w0 += wl_[k];
      }
    }
    EstimateReport rep;
    rep.kind = EstimatorKind::cc_naive;
    rep.mu1 = s1 / w1;
    rep.mu0 = s0 / w0;
    rep.delta = rep.mu1 - rep.mu0;
    attach_shared(rep);
    return rep;
  }

  EstimateReport eval_ss_naive() {
    require_pooled_arms();
    const int nl = data_.n_labeled();
    if (nl < 2) throw EstimationError("ss_naive needs at least 2 labeled rows");
    const Eigen::MatrixXd& v = v_matrix();
    const int pv = static_cast<int>(v.cols());

    Eigen::MatrixXd design_l(nl, pv + 2);
    for (int k = 0; k < nl; ++k) {
      int i = data_.labeled[k];
      design_l(k, 0) = 1.0;
      design_l.block(k, 1, 1, pv) = v.row(i);
      design_l(k, pv + 1) = data_.t[i];
    }
    LinkSpec link = make_link(cfg_.link_imputation);
    GlmFit fit = plain_glm(design_l, yl_, link, wl_);

    Eigen::VectorXd imputed(data_.rows());
    for (int i = 0; i < data_.rows(); ++i) {
      double eta = fit.coefficients[0] + v.row(i).dot(fit.coefficients.segment(1, pv)) +
                   fit.coefficients[pv + 1] * data_.t[i];
      imputed[i] = link.inverse(eta);
    }
    ArmMeans m = hajek_means(data_.t, parametric_ps(), imputed, w_);
    EstimateReport rep;
    rep.kind = EstimatorKind::ss_naive;
    rep.mu1 = m.mu1;
    rep.mu0 = m.mu0;
    rep.delta = m.mu1 - m.mu0;
    rep.diagnostics["imputation_converged"] = fit.converged ? 1.0 : 0.0;
    attach_shared(rep);
    return rep;
  }

  EstimateReport eval_ss_prepost() {
    require_pooled_arms();
    require_labeled_arms();
    const Eigen::MatrixXd& v = v_matrix();
    const int pv = static_cast<int>(v.cols());
    const int px = data_.p_x();
    const int n = data_.rows();
    const int nl = data_.n_labeled();
    LinkSpec link = make_link(cfg_.link_outcome);

    // Within-arm regressions of Y on V and on X over labeled rows.
    Eigen::VectorXd e1(n), e0(n), m1(n), m0(n);
    bool fits_converged = true;
    for (int arm = 0; arm <= 1; ++arm) {
      std::vector<int> rows;
      for (int k = 0; k < nl; ++k)
        if (data_.t[data_.labeled[k]] == static_cast<double>(arm)) rows.push_back(k);
      Eigen::MatrixXd dv(rows.size(), pv + 1), dx(rows.size(), px + 1);
      Eigen::VectorXd ya(rows.size()), wa(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        int i = data_.labeled[rows[r]];
        dv(r, 0) = 1.0;
        dv.block(r, 1, 1, pv) = v.row(i);
        dx(r, 0) = 1.0;
        dx.block(r, 1, 1, px) = data_.x.row(i);
        ya[r] = yl_[rows[r]];
        wa[r] = wl_[rows[r]];
      }
      GlmFit fe = plain_glm(dv, ya, link, wa);
      GlmFit fm = plain_glm(dx, ya, link, wa);
      fits_converged = fits_converged && fe.converged && fm.converged;
      for (int i = 0; i < n; ++i) {
        double eta_e = fe.coefficients[0] + v.row(i).dot(fe.coefficients.tail(pv));
        double eta_m = fm.coefficients[0] + data_.x.row(i).dot(fm.coefficients.tail(px));
        (arm == 1 ? e1 : e0)[i] = link.inverse(eta_e);
        (arm == 1 ? m1 : m0)[i] = link.inverse(eta_m);
      }
    }

    std::vector<bool> lab(n, false);
    for (int i : data_.labeled) lab[i] = true;
    double rho = wl_.sum() / w_.sum();
    ArmMeans m = prepost_means(data_.y, lab, data_.t, parametric_ps(), rho, e1, e0, m1, m0, w_);
    EstimateReport rep;
    rep.kind = EstimatorKind::ss_prepost;
    rep.mu1 = m.mu1;
    rep.mu0 = m.mu0;
    rep.delta = m.mu1 - m.mu0;
    rep.diagnostics["nuisance_converged"] = fits_converged ? 1.0 : 0.0;
    attach_shared(rep);
    return rep;
  }

  const Dataset& data_;
  const ModelConfig& cfg_;
  const TuningSelections* tuning_;
  TuningSelections selected_;
  Eigen::VectorXd w_, wl_, yl_;

  std::optional<GlmFit> alpha_, beta_;
  std::optional<Eigen::VectorXd> ps_param_;
  std::optional<DipsFit> dips_;
  std::optional<Eigen::MatrixXd> v_;
  std::optional<ImputationPieces> imp_;
  Diagnostics shared_diag_;
};

}  // namespace

std::map<EstimatorKind, EstimateReport> run_estimators(
    const std::vector<EstimatorKind>& kinds, const Dataset& data, const ModelConfig& config,
    const Eigen::VectorXd& weights, const TuningSelections* tuning,
    TuningSelections* tuning_out) {
  Pipeline pipeline(data, config, weights, tuning);
  std::map<EstimatorKind, EstimateReport> out;
  for (EstimatorKind k : kinds) out[k] = pipeline.evaluate(k);
  if (tuning_out != nullptr) *tuning_out = pipeline.selections();
  return out;
}

std::map<EstimatorKind, EstimateReport> run_estimators_tolerant(
    const std::vector<EstimatorKind>& kinds, const Dataset& data, const ModelConfig& config,
    const Eigen::VectorXd& weights, const TuningSelections* tuning,
    TuningSelections* tuning_out, std::map<EstimatorKind, std::string>* errors) {
  Pipeline pipeline(data, config, weights, tuning);
  std::map<EstimatorKind, EstimateReport> out;
  for (EstimatorKind k : kinds) {
    try {
      out[k] = pipeline.evaluate(k);
    } catch (const EstimationError& e) {
      if (errors != nullptr) (*errors)[k] = e.what();
    }
  }
  if (tuning_out != nullptr) *tuning_out = pipeline.selections();
  return out;
}

EstimateReport ss_dr(const Dataset& data, const ModelConfig& config) {
  return run_estimators({EstimatorKind::ss_dr}, data, config).at(EstimatorKind::ss_dr);
}

EstimateReport cc_estimate(EstimatorKind kind, const Dataset& data, const ModelConfig& config) {
  if (kind != EstimatorKind::cc_ipw && kind != EstimatorKind::cc_reg &&
      kind != EstimatorKind::cc_dr && kind != EstimatorKind::cc_naive)
    throw InputError("cc_estimate: not a complete-case estimator");
  return run_estimators({kind}, data, config).at(kind);
}

EstimateReport ss_naive(const Dataset& data, const ModelConfig& config) {
  return run_estimators({EstimatorKind::ss_naive}, data, config).at(EstimatorKind::ss_naive);
}

EstimateReport ss_prepost(const Dataset& data, const ModelConfig& config) {
  return run_estimators({EstimatorKind::ss_prepost}, data, config).at(EstimatorKind::ss_prepost);
}

OracleSsDrResult ss_dr_oracle_ps(const Dataset& data, const ModelConfig& config,
                                 const Eigen::VectorXd& oracle_ps, bool omit_w) {
  data.validate();
  config.validate();
  if (oracle_ps.size() != data.rows()) throw InputError("oracle ps: length mismatch");
  const int n = data.rows();
  const int nl = data.n_labeled();
  if (nl < 2) throw EstimationError("imputation model needs at least 2 labeled rows");

  Eigen::MatrixXd v = omit_w ? Eigen::MatrixXd(data.x) : data.v();
  if (config.count_log_transform && !omit_w && data.p_w() > 0) {
    for (int j = 0; j < data.p_w(); ++j)
      for (int i = 0; i < n; ++i) v(i, j) = std::log1p(std::max(0.0, v(i, j)));
  }
  Eigen::VectorXd u = utility_covariates(data.t, oracle_ps);
  SplineBasis basis = make_spline_basis(v, u, config.spline_knots, config.interaction_vt);
  Eigen::MatrixXd design = build_imputation_design(v, data.t, u, basis);

  Eigen::MatrixXd design_l(nl, design.cols());
  Eigen::VectorXd yl(nl);
  for (int k = 0; k < nl; ++k) {
    design_l.row(k) = design.row(data.labeled[k]);
    yl[k] = data.y[data.labeled[k]];
  }
  LinkSpec link = make_link(config.link_imputation);
  double lambda = config.fixed_gamma_lambda;
  if (!std::isfinite(lambda)) {
    PenaltyGrid grid =
        make_default_grid(design_l, yl, link, Eigen::VectorXd::Ones(nl), {0},
                          PenaltySelection::cv_deviance);
    lambda = cross_validate_ridge(design_l, yl, link, grid, config.cv_folds);
  }

  OracleSsDrResult res;
  res.imputation = fit_imputation(design_l, yl, basis, link, lambda);
  res.y_imputed = impute(res.imputation, design);
  ArmMeans m = hajek_means(data.t, oracle_ps, res.y_imputed);
  res.report.kind = EstimatorKind::ss_dr;
  res.report.mu1 = m.mu1;
  res.report.mu0 = m.mu0;
  res.report.delta = m.mu1 - m.mu0;
  res.report.diagnostics["gamma_lambda"] = lambda;
  res.report.diagnostics["oracle_ps"] = 1.0;
  return res;
}

}  // namespace ssate
