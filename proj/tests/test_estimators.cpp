#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>

#include "oracle_helpers.hpp"
#include "ssate/estimators.hpp"
#include "ssate/simulation.hpp"

using namespace ssate;

TEST_CASE("hajek fixture: six rows against hand-computed sums") {
  Eigen::VectorXd t(6), ps(6), y(6);
  t << 1, 0, 1, 0, 1, 0;
  ps << 0.4, 0.3, 0.6, 0.5, 0.25, 0.7;
  y << 0.9, 0.2, 0.7, 0.4, 1.0, 0.1;

  ArmMeans m = hajek_means(t, ps, y);
  // Treated: weights 1/.4, 1/.6, 1/.25; control: 1/.7, 1/.5, 1/.3.
  double num1 = 0.9 / 0.4 + 0.7 / 0.6 + 1.0 / 0.25;
  double den1 = 1.0 / 0.4 + 1.0 / 0.6 + 1.0 / 0.25;
  double num0 = 0.2 / 0.7 + 0.4 / 0.5 + 0.1 / 0.3;
  double den0 = 1.0 / 0.7 + 1.0 / 0.5 + 1.0 / 0.3;
  CHECK(std::abs(m.mu1 - num1 / den1) <= 1e-12);
  CHECK(std::abs(m.mu0 - num0 / den0) <= 1e-12);
}

TEST_CASE("hajek with constant imputations collapses to zero difference") {
  Eigen::VectorXd t(5), ps(5);
  t << 1, 0, 1, 1, 0;
  ps << 0.3, 0.4, 0.7, 0.2, 0.6;
  Eigen::VectorXd constant = Eigen::VectorXd::Constant(5, 0.5);
  ArmMeans m = hajek_means(t, ps, constant);
  CHECK(m.mu1 == 0.5);
  CHECK(m.mu0 == 0.5);
  CHECK(m.mu1 - m.mu0 == 0.0);
}

TEST_CASE("hajek arm means stay inside the outcome hull per arm") {
  Rng rng(81);
  int n = 200;
  Eigen::VectorXd t(n), ps(n), y(n);
  for (int i = 0; i < n; ++i) {
    t[i] = rng.uniform01() < 0.5 ? 1.0 : 0.0;
    ps[i] = 0.05 + 0.9 * rng.uniform01();
    y[i] = rng.normal();
  }
  ArmMeans m = hajek_means(t, ps, y);
  double lo1 = 1e300, hi1 = -1e300, lo0 = 1e300, hi0 = -1e300;
  for (int i = 0; i < n; ++i) {
    if (t[i] == 1.0) {
      lo1 = std::min(lo1, y[i]);
      hi1 = std::max(hi1, y[i]);
    } else {
      lo0 = std::min(lo0, y[i]);
      hi0 = std::max(hi0, y[i]);
    }
  }
  CHECK(m.mu1 >= lo1);
  CHECK(m.mu1 <= hi1);
  CHECK(m.mu0 >= lo0);
  CHECK(m.mu0 <= hi0);
}

TEST_CASE("aipw fixture: six rows against the standard formula") {
  Eigen::VectorXd y(6), t(6), ps(6), mu1(6), mu0(6);
  y << 1, 0, 1, 0, 1, 1;
  t << 1, 0, 1, 0, 0, 1;
  ps << 0.5, 0.4, 0.3, 0.6, 0.2, 0.7;
  mu1 << 0.8, 0.6, 0.5, 0.4, 0.3, 0.9;
  mu0 << 0.4, 0.3, 0.2, 0.5, 0.1, 0.6;

  ArmMeans m = aipw_means(y, t, ps, mu1, mu0);
  double s1 = 0.0, s0 = 0.0;
  for (int i = 0; i < 6; ++i) {
    s1 += (t[i] == 1.0 ? (y[i] - mu1[i]) / ps[i] : 0.0) + mu1[i];
    s0 += (t[i] == 0.0 ? (y[i] - mu0[i]) / (1.0 - ps[i]) : 0.0) + mu0[i];
  }
  CHECK(std::abs(m.mu1 - s1 / 6.0) <= 1e-12);
  CHECK(std::abs(m.mu0 - s0 / 6.0) <= 1e-12);
}

TEST_CASE("prepost fixture: eight rows against a direct evaluation") {
  int n = 8;
  Eigen::VectorXd y(n), t(n), ps(n), e1(n), e0(n), m1(n), m0(n);
  y << 1, 0, 1, 1, 0, 0, 1, 0;  // last four are masked by R = 0
  t << 1, 0, 1, 0, 1, 0, 1, 0;
  ps << 0.4, 0.3, 0.6, 0.5, 0.7, 0.2, 0.55, 0.45;
  e1 << .5, .4, .6, .3, .2, .7, .5, .4;
  e0 << .3, .2, .4, .5, .6, .1, .3, .2;
  m1 << .45, .35, .55, .25, .3, .6, .4, .5;
  m0 << .25, .15, .35, .45, .5, .2, .25, .3;
  std::vector<bool> lab = {true, true, true, true, false, false, false, false};
  double rho = 0.5;

  ArmMeans m = prepost_means(y, lab, t, ps, rho, e1, e0, m1, m0);

  double s1 = 0.0, s0 = 0.0;
  for (int i = 0; i < n; ++i) {
    double r_rho = lab[i] ? 1.0 / rho : 0.0;
    double yi = lab[i] ? y[i] : 0.0;
    double w1 = t[i] == 1.0 ? 1.0 / ps[i] : 0.0;
    double w0 = t[i] == 0.0 ? 1.0 / (1.0 - ps[i]) : 0.0;
    s1 += w1 * (r_rho * yi - (r_rho - 1.0) * e1[i]) - (w1 - 1.0) * m1[i];
    s0 += w0 * (r_rho * yi - (r_rho - 1.0) * e0[i]) - (w0 - 1.0) * m0[i];
  }
  CHECK(std::abs(m.mu1 - s1 / n) <= 1e-12);
  CHECK(std::abs(m.mu0 - s0 / n) <= 1e-12);
}

TEST_CASE("prepost with full labeling and zero nuisances is unnormalized IPW") {
  int n = 6;
  Eigen::VectorXd y(n), t(n), ps(n);
  y << 1, 0, 1, 1, 0, 1;
  t << 1, 0, 1, 0, 1, 0;
  ps << 0.4, 0.3, 0.6, 0.5, 0.7, 0.2;
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  std::vector<bool> lab(n, true);

  ArmMeans m = prepost_means(y, lab, t, ps, 1.0, zero, zero, zero, zero);
  double s1 = 0.0, s0 = 0.0;
  for (int i = 0; i < n; ++i) {
    if (t[i] == 1.0) s1 += y[i] / ps[i];
    if (t[i] == 0.0) s0 += y[i] / (1.0 - ps[i]);
  }
  CHECK(std::abs(m.mu1 - s1 / n) <= 1e-14);
  CHECK(std::abs(m.mu0 - s0 / n) <= 1e-14);
}

TEST_CASE("efficient influence function values") {
  Eigen::VectorXd y(3), t(3), pi(3), xi(3);
  y << 1, 0, 1;
  t << 1, 0, 1;
  pi << 0.5, 0.4, 0.25;
  xi << 1, 0, 1;
  Eigen::VectorXd phi = efficient_influence(y, t, pi, xi);
  for (int i = 0; i < 3; ++i) CHECK(phi[i] == 0.0);  // perfect imputation

  xi << 0.5, 0.5, 0.5;
  phi = efficient_influence(y, t, pi, xi);
  CHECK(phi[0] == doctest::Approx(1.0).epsilon(1e-15));          // 2 * 0.5
  CHECK(phi[1] == doctest::Approx(0.5 / 0.6).epsilon(1e-12));    // -(1/.6) * (-0.5)
  CHECK(phi[2] == doctest::Approx(2.0).epsilon(1e-15));          // 4 * 0.5

  Eigen::VectorXd short_xi(2);
  CHECK_THROWS_AS(efficient_influence(y, t, pi, short_xi), InputError);
}

TEST_CASE("cc_reg with noiseless linear outcome recovers the treatment coefficient") {
  Rng rng(82);
  int n = 120;
  Dataset d;
  d.x = oracle::random_matrix(rng, n, 4);
  d.w.resize(n, 0);
  d.t.resize(n);
  d.y.resize(n);
  const double beta_t = 1.37;
  for (int i = 0; i < n; ++i) {
    d.t[i] = rng.uniform01() < 0.5 ? 1.0 : 0.0;
    d.y[i] = 0.4 + 0.8 * d.x(i, 0) - 0.5 * d.x(i, 2) + beta_t * d.t[i];
  }
  d.labeled.resize(n);
  for (int i = 0; i < n; ++i) d.labeled[i] = i;

  ModelConfig cfg;
  cfg.seed = 9;
  cfg.link_outcome = LinkKind::identity;
  cfg.link_imputation = LinkKind::identity;
  EstimateReport rep = cc_estimate(EstimatorKind::cc_reg, d, cfg);
  CHECK(rep.delta == doctest::Approx(beta_t).epsilon(1e-6));
}

TEST_CASE("all estimators run on simulated data and are deterministic") {
  SimulationScenario sc = make_scenario(ScenarioKind::both_correct);
  Dataset d = generate_dataset(sc, 80, 500, 314);
  ModelConfig cfg;
  cfg.seed = 10;

  auto reports = run_estimators(all_estimators(), d, cfg);
  REQUIRE(reports.size() == all_estimators().size());
  for (const auto& [kind, rep] : reports) {
    CHECK(std::isfinite(rep.delta));
    CHECK(rep.delta == rep.mu1 - rep.mu0);  // identity holds exactly
    if (kind == EstimatorKind::ss_dr) {
      CHECK(rep.diagnostics.count("ess_treated") == 1);
      CHECK(rep.diagnostics.count("eif_second_moment") == 1);
    }
  }

  auto again = run_estimators(all_estimators(), d, cfg);
  for (const auto& [kind, rep] : reports) {
    CHECK(rep.delta == again.at(kind).delta);  // bit-identical rerun
    CHECK(rep.mu1 == again.at(kind).mu1);
  }
}

TEST_CASE("estimator errors: empty arms and missing labels") {
  SimulationScenario sc = make_scenario(ScenarioKind::both_correct);
  Dataset d = generate_dataset(sc, 40, 200, 11);
  ModelConfig cfg;
  cfg.seed = 12;

  Dataset all_treated = d;
  all_treated.t.setOnes();
  CHECK_THROWS_AS(ss_dr(all_treated, cfg), EstimationError);

  Dataset labeled_one_arm = d;
  for (int i : labeled_one_arm.labeled) labeled_one_arm.t[i] = 1.0;
  CHECK_THROWS_AS(cc_estimate(EstimatorKind::cc_ipw, labeled_one_arm, cfg), EstimationError);
  CHECK_THROWS_AS(cc_estimate(EstimatorKind::cc_naive, labeled_one_arm, cfg), EstimationError);
  CHECK_THROWS_AS(ss_prepost(labeled_one_arm, cfg), EstimationError);

  Dataset no_labels = d;
  no_labels.labeled.clear();
  CHECK_THROWS_AS(ss_dr(no_labels, cfg), EstimationError);
}

TEST_CASE("identity-link pipeline is location-scale equivariant at fixed penalties") {
  SimulationScenario sc = make_scenario(ScenarioKind::both_correct);
  Dataset d = generate_dataset(sc, 90, 400, 2718);
  // Continuous outcome variant of the generating process.
  Rng rng(83);
  for (int i : d.labeled) d.y[i] = d.x(i, 0) - 0.7 * d.x(i, 3) + 1.1 * d.t[i] + rng.normal();

  ModelConfig cfg;
  cfg.seed = 13;
  cfg.link_outcome = LinkKind::identity;
  cfg.link_imputation = LinkKind::identity;
  cfg.fixed_pilot_lambda = 0.05;
  cfg.fixed_alasso_lambda_alpha = 0.02;
  cfg.fixed_alasso_lambda_beta = 0.02;
  cfg.fixed_gamma_lambda = 0.03;

  // Outcome-model penalties scale with the squared outcome scale; the
  // propensity model never sees Y and keeps its penalty.
  const double a = 2.0, b = 0.25;
  Dataset scaled = d;
  for (int i : scaled.labeled) scaled.y[i] = a * scaled.y[i] + b;
  ModelConfig cfg_scaled = cfg;
  cfg_scaled.fixed_alasso_lambda_beta = a * a * cfg.fixed_alasso_lambda_beta;

  for (EstimatorKind k :
       {EstimatorKind::ss_dr, EstimatorKind::cc_reg, EstimatorKind::cc_dr,
        EstimatorKind::ss_naive, EstimatorKind::ss_prepost, EstimatorKind::cc_naive,
        EstimatorKind::cc_ipw}) {
    double d1 = run_estimators({k}, d, cfg).at(k).delta;
    double d2 = run_estimators({k}, scaled, cfg_scaled).at(k).delta;
    CHECK(d2 == doctest::Approx(a * d1).epsilon(1e-9));
  }
}

TEST_CASE("row permutation leaves estimates unchanged") {
  SimulationScenario sc = make_scenario(ScenarioKind::both_correct);
  Dataset d = generate_dataset(sc, 60, 300, 999);
  ModelConfig cfg;
  cfg.seed = 14;

  // A fixed permutation applied to rows and labeled indices alike.
  int n = d.rows();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = (i * 13 + 5) % n;
  Dataset p;
  p.x.resize(n, d.p_x());
  p.w.resize(n, d.p_w());
  p.t.resize(n);
  p.y.resize(n);
  std::vector<int> inv(n);
  for (int i = 0; i < n; ++i) inv[perm[i]] = i;
  for (int i = 0; i < n; ++i) {
    p.x.row(i) = d.x.row(perm[i]);
    p.w.row(i) = d.w.row(perm[i]);
    p.t[i] = d.t[perm[i]];
    p.y[i] = d.y[perm[i]];
  }
  for (int i : d.labeled) p.labeled.push_back(inv[i]);
  std::sort(p.labeled.begin(), p.labeled.end());

  for (EstimatorKind k : {EstimatorKind::ss_dr, EstimatorKind::cc_dr, EstimatorKind::ss_naive}) {
    double d1 = run_estimators({k}, d, cfg).at(k).delta;
    double d2 = run_estimators({k}, p, cfg).at(k).delta;
    CHECK(d2 == doctest::Approx(d1).epsilon(1e-9));
  }
}

TEST_CASE("oracle-PS variant returns valid reports and honors omit_w") {
  SimulationScenario sc = make_scenario(ScenarioKind::both_correct);
  Dataset d = generate_dataset(sc, 100, 400, 515);
  ModelConfig cfg;
  cfg.seed = 15;
  Eigen::VectorXd ps(d.rows());
  for (int i = 0; i < d.rows(); ++i) ps[i] = std::clamp(sc.true_ps(d.x.row(i)), 0.01, 0.99);

  OracleSsDrResult full = ss_dr_oracle_ps(d, cfg, ps, false);
  OracleSsDrResult no_w = ss_dr_oracle_ps(d, cfg, ps, true);
  CHECK(std::isfinite(full.report.delta));
  CHECK(std::isfinite(no_w.report.delta));
  CHECK(no_w.imputation.design_width < full.imputation.design_width);
  for (int i = 0; i < d.rows(); ++i) {
    CHECK(full.y_imputed[i] > 0.0);
    CHECK(full.y_imputed[i] < 1.0);
  }
}
