#include <doctest.h>

#include <Eigen/Dense>

#include "oracle_helpers.hpp"
#include "ssate/glm.hpp"
#include "ssate/rng.hpp"

using namespace ssate;

namespace {

Eigen::VectorXd penalized_score_check(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                      const LinkSpec& link, double lambda,
                                      const Eigen::VectorXd& gamma) {
  Eigen::VectorXd eta = z * gamma;
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = y[i] - link.inverse(eta[i]);
  Eigen::VectorXd score = z.transpose() * r / static_cast<double>(z.rows());
  for (Eigen::Index j = 1; j < gamma.size(); ++j) score[j] -= lambda * gamma[j];
  return score;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

}  // namespace

TEST_CASE("ridge identity with zero penalty reproduces least squares") {
  Rng rng(101);
  Eigen::MatrixXd z = with_intercept(oracle::random_matrix(rng, 40, 3));
  Eigen::VectorXd truth(4);
  truth << 0.5, -1.0, 2.0, 0.3;
  Eigen::VectorXd y = z * truth;
  for (int i = 0; i < 40; ++i) y[i] += 0.3 * rng.normal();

  GlmFit fit = fit_ridge_glm(z, y, make_link(LinkKind::identity), 0.0);
  Eigen::VectorXd ls = (z.transpose() * z).ldlt().solve(z.transpose() * y);
  CHECK(fit.converged);
  CHECK((fit.coefficients - ls).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("logistic intercept-only fit at response mean one half is zero") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(8, 1);
  Eigen::VectorXd y(8);
  y << 1, 0, 1, 0, 1, 0, 1, 0;
  GlmFit fit = fit_ridge_glm(z, y, make_link(LinkKind::logistic), 0.0);
  CHECK(fit.converged);
  CHECK(fit.coefficients[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ridge logistic matches the derivative-free optimizer oracle") {
  Rng rng(202);
  Eigen::MatrixXd z = with_intercept(oracle::random_matrix(rng, 8, 2));
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) y[i] = rng.uniform01() < 0.5 ? 0.0 : 1.0;
  LinkSpec link = make_link(LinkKind::logistic);

  GlmFit fit = fit_ridge_glm(z, y, link, 0.1);
  Eigen::VectorXd brute = oracle::brute_force_ridge(z, y, link, 0.1);
  CHECK(fit.converged);
  CHECK((fit.coefficients - brute).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("converged ridge fits satisfy stationarity to 1e-8") {
  Rng rng(303);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd z = with_intercept(oracle::random_matrix(rng, 30, 4));
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) y[i] = rng.uniform01() < 0.4 ? 0.0 : 1.0;
    LinkSpec link = make_link(LinkKind::logistic);
    GlmFit fit = fit_ridge_glm(z, y, link, 0.05);
    REQUIRE(fit.converged);
    CHECK(penalized_score_check(z, y, link, 0.05, fit.coefficients).lpNorm<Eigen::Infinity>() <=
          1e-8);
  }
}

TEST_CASE("penalized coordinate norm shrinks monotonically in lambda") {
  Rng rng(404);
  Eigen::MatrixXd z = with_intercept(oracle::random_matrix(rng, 60, 5));
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i)
    y[i] = rng.uniform01() < make_link(LinkKind::logistic).inverse(z(i, 1) - z(i, 2)) ? 1.0 : 0.0;
  LinkSpec link = make_link(LinkKind::logistic);

  PenaltyGrid grid = make_default_grid(z, y, link, Eigen::VectorXd::Ones(60), {0},
                                       PenaltySelection::cv_deviance);
  double prev_norm = -1.0;
  for (double lam : grid.values) {  // decreasing lambda: norms non-decreasing
    GlmFit fit = fit_ridge_glm(z, y, link, lam);
    double norm = fit.coefficients.tail(5).norm();
    CHECK(norm >= prev_norm - 1e-10);
    prev_norm = norm;
  }
}

TEST_CASE("identical inputs give bit-identical ridge fits") {
  Rng rng(505);
  Eigen::MatrixXd z = with_intercept(oracle::random_matrix(rng, 25, 3));
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) y[i] = rng.uniform01() < 0.5 ? 0.0 : 1.0;
  GlmFit a = fit_ridge_glm(z, y, make_link(LinkKind::logistic), 0.02);
  GlmFit b = fit_ridge_glm(z, y, make_link(LinkKind::logistic), 0.02);
  REQUIRE(a.coefficients.size() == b.coefficients.size());
  for (Eigen::Index j = 0; j < a.coefficients.size(); ++j)
    CHECK(a.coefficients[j] == b.coefficients[j]);
}

TEST_CASE("logistic separation stays finite and honest") {
  // Perfectly separated data with no penalty: the cap must yield a finite
  // fit with probabilities inside [g(-30), g(30)].
  Eigen::MatrixXd z(6, 2);
  z << 1, -2, 1, -1, 1, -0.5, 1, 0.5, 1, 1, 1, 2;
  Eigen::VectorXd y(6);
  y << 0, 0, 0, 1, 1, 1;
  LinkSpec link = make_link(LinkKind::logistic);
  GlmFit fit = fit_ridge_glm(z, y, link, 0.0);
  CHECK(fit.coefficients.allFinite());
  for (int i = 0; i < 6; ++i) {
    double mu = link.inverse(z.row(i).dot(fit.coefficients));
    CHECK(mu >= link.inverse(-kLinearPredictorClamp));
    CHECK(mu <= link.inverse(kLinearPredictorClamp));
  }
}

TEST_CASE("glm input errors") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(3, 1);
  Eigen::VectorXd y(3);
  y << 1, 0, 1;
  CHECK_THROWS_AS(fit_ridge_glm(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0),
                                make_link(LinkKind::identity), 0.0),
                  InputError);
  Eigen::VectorXd bad = y;
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_ridge_glm(z, bad, make_link(LinkKind::identity), 0.0), InputError);
  PenaltyGrid empty;
  CHECK_THROWS_AS(cross_validate_ridge(z, y, make_link(LinkKind::identity), empty, 2), InputError);
  PenaltyGrid ok{{1.0, 0.1}, PenaltySelection::cv_deviance};
  CHECK_THROWS_AS(cross_validate_ridge(z, y, make_link(LinkKind::identity), ok, 1), InputError);
}

TEST_CASE("cross-validation: singleton grid returns its only value") {
  Rng rng(606);
  Eigen::MatrixXd z = with_intercept(oracle::random_matrix(rng, 20, 2));
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) y[i] = rng.normal();
  PenaltyGrid grid{{0.0}, PenaltySelection::cv_deviance};
  CHECK(cross_validate_ridge(z, y, make_link(LinkKind::identity), grid, 5) == 0.0);
}

namespace {

// Exhaustive fold-by-fold deviance evaluation, written independently of
// cross_validate_ridge.
double cv_oracle(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const LinkSpec& link,
                 const std::vector<double>& lambdas, int folds) {
  std::vector<double> total(lambdas.size(), 0.0);
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    for (int f = 0; f < folds; ++f) {
      std::vector<int> tr, te;
      for (int i = 0; i < z.rows(); ++i) (i % folds == f ? te : tr).push_back(i);
      Eigen::MatrixXd zt(tr.size(), z.cols());
      Eigen::VectorXd yt(tr.size());
      for (std::size_t k = 0; k < tr.size(); ++k) {
        zt.row(k) = z.row(tr[k]);
        yt[k] = y[tr[k]];
      }
      GlmFit fit = fit_ridge_glm(zt, yt, link, lambdas[l]);
      for (int i : te) total[l] += link.unit_deviance(y[i], z.row(i).dot(fit.coefficients));
    }
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < lambdas.size(); ++l)
    if (total[l] < total[best]) best = l;
  return lambdas[best];
}

}  // namespace

TEST_CASE("cross-validation picks heavy shrinkage on noise, light on signal") {
  Rng rng(707);
  Eigen::MatrixXd z = with_intercept(oracle::random_matrix(rng, 50, 3));
  LinkSpec link = make_link(LinkKind::identity);
  PenaltyGrid grid{{1e2, 1e-4}, PenaltySelection::cv_deviance};

  Eigen::VectorXd noise(50);
  for (int i = 0; i < 50; ++i) noise[i] = rng.normal();
  double chosen_noise = cross_validate_ridge(z, noise, link, grid, 5);
  CHECK(chosen_noise == 1e2);
  CHECK(chosen_noise == cv_oracle(z, noise, link, grid.values, 5));

  Eigen::VectorXd signal = 3.0 * z.col(1);
  for (int i = 0; i < 50; ++i) signal[i] += 0.1 * rng.normal();
  double chosen_signal = cross_validate_ridge(z, signal, link, grid, 5);
  CHECK(chosen_signal == 1e-4);
  CHECK(chosen_signal == cv_oracle(z, signal, link, grid.values, 5));
}

TEST_CASE("adaptive lasso recovers a single active covariate") {
  // Monte-Carlo support-recovery oracle: one active column out of 10 at a
  // signal strength where recovery should be nearly certain.
  int hits = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(900 + rep);
    Eigen::MatrixXd z = with_intercept(oracle::random_matrix(rng, 500, 10));
    Eigen::VectorXd y(500);
    for (int i = 0; i < 500; ++i) y[i] = 0.3 + 0.9 * z(i, 4) + rng.normal();
    GlmFit fit = fit_adaptive_lasso(z, y, make_link(LinkKind::identity));
    if (fit.support == std::vector<int>{0, 4}) ++hits;
  }
  CHECK(hits >= 90);
}

TEST_CASE("adaptive lasso full-shrinkage limit") {
  Rng rng(808);
  Eigen::MatrixXd z = with_intercept(oracle::random_matrix(rng, 40, 4));
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) y[i] = rng.uniform01() < 0.7 ? 1.0 : 0.0;
  LinkSpec link = make_link(LinkKind::logistic);

  AdaptiveLassoOptions opts;
  opts.fixed_lambda = 1e6;
  GlmFit fit = fit_adaptive_lasso(z, y, link, PenaltyGrid{}, {0}, Eigen::VectorXd(), opts);
  CHECK(fit.support == std::vector<int>{0});
  for (int j = 1; j <= 4; ++j) CHECK(fit.coefficients[j] == 0.0);  // exact zeros
  double mean = y.mean();
  CHECK(fit.coefficients[0] == doctest::Approx(link.link(mean)).epsilon(1e-7));
}

TEST_CASE("adaptive lasso duplicate columns: lowest index enters first") {
  Rng rng(909);
  Eigen::MatrixXd x = oracle::random_matrix(rng, 200, 3);
  Eigen::MatrixXd z(200, 5);
  z.col(0).setOnes();
  z.col(1) = x.col(0);
  z.col(2) = x.col(0);  // exact duplicate of column 1
  z.col(3) = x.col(1);
  z.col(4) = x.col(2);
  Eigen::VectorXd y = 1.5 * x.col(0);
  for (int i = 0; i < 200; ++i) y[i] += 0.2 * rng.normal();

  GlmFit fit = fit_adaptive_lasso(z, y, make_link(LinkKind::identity));
  bool dup1 = fit.coefficients[1] != 0.0;
  bool dup2 = fit.coefficients[2] != 0.0;
  CHECK((dup1 || dup2));
  CHECK_FALSE((dup1 && dup2));  // at most one duplicate in support
  CHECK(dup1);                  // and it is the lower index
}

TEST_CASE("adaptive lasso degenerate pilot is an input error") {
  // Response uncorrelated with a constant-zero covariate block: pilot
  // weights vanish only in the contrived all-zero design.
  Eigen::MatrixXd z(6, 3);
  z.setZero();
  z.col(0).setOnes();
  Eigen::VectorXd y(6);
  y << 1, 2, 3, 1, 2, 3;
  CHECK_THROWS_AS(fit_adaptive_lasso(z, y, make_link(LinkKind::identity)), InputError);
}
