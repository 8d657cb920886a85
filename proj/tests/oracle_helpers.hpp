// Test-only oracles, deliberately independent of the library's solver paths:
// a derivative-free coordinate-search optimizer for penalized GLM objectives,
// a literal double-loop kernel smoother, and Simpson quadrature.
#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ssate/link.hpp"
#include "ssate/rng.hpp"

namespace oracle {

// Penalized objective (1/sw) sum_i w_i nll(y_i, eta_i) + (lambda/2) |gamma_pen|^2,
// whose gradient is the negated ridge estimating equation.
inline double ridge_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                              const ssate::LinkSpec& link, double lambda,
                              const std::vector<int>& unpenalized, const Eigen::VectorXd& gamma,
                              const Eigen::VectorXd& weights) {
  Eigen::VectorXd w = weights.size() ? weights : Eigen::VectorXd::Ones(z.rows());
  double sw = w.sum();
  Eigen::VectorXd eta = z * gamma;
  double obj = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) obj += w[i] * link.nll(y[i], eta[i]);
  obj /= sw;
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    bool pen = true;
    for (int u : unpenalized)
      if (u == j) pen = false;
    if (pen) obj += 0.5 * lambda * gamma[j] * gamma[j];
  }
  return obj;
}

// Cyclic golden-section coordinate search; no gradients, no Newton steps.
inline Eigen::VectorXd brute_force_ridge(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                         const ssate::LinkSpec& link, double lambda,
                                         const std::vector<int>& unpenalized = {0},
                                         const Eigen::VectorXd& weights = Eigen::VectorXd()) {
  const Eigen::Index p = z.cols();
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
  auto f = [&](const Eigen::VectorXd& g) {
    return ridge_objective(z, y, link, lambda, unpenalized, g, weights);
  };

  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int sweep = 0; sweep < 600; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      double center = gamma[j];
      double span = 4.0;
      // Expand the bracket until the minimum is interior.
      for (int expand = 0; expand < 12; ++expand) {
        double a = center - span, b = center + span;
        double x1 = b - golden * (b - a);
        double x2 = a + golden * (b - a);
        Eigen::VectorXd g = gamma;
        g[j] = x1;
        double f1 = f(g);
        g[j] = x2;
        double f2 = f(g);
        for (int it = 0; it < 90; ++it) {
          if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            g[j] = x1;
            f1 = f(g);
          } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            g[j] = x2;
            f2 = f(g);
          }
        }
        double best = 0.5 * (a + b);
        if (std::abs(best - center) < span - 1e-9) {
          max_change = std::max(max_change, std::abs(best - gamma[j]));
          gamma[j] = best;
          break;
        }
        span *= 4.0;
      }
    }
    if (max_change < 1e-12) break;
  }
  return gamma;
}

// Literal evaluation of the smoother definition with K_h(v) = h^-2 K(v/h).
inline Eigen::VectorXd naive_smooth(const Eigen::VectorXd& ua, const Eigen::VectorXd& ub,
                                    const Eigen::VectorXd& t, int order, double h, double eps,
                                    const Eigen::VectorXd& weights = Eigen::VectorXd()) {
  const Eigen::Index n = ua.size();
  Eigen::VectorXd w = weights.size() ? weights : Eigen::VectorXd::Ones(n);
  auto k1 = [&](double u) {
    double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
    if (order == 4) return 0.5 * (3.0 - u * u) * phi;
    return 0.125 * (15.0 - 10.0 * u * u + u * u * u * u) * phi;
  };
  double tw = (w.array() * t.array()).sum();
  double cw = (w.array() * (1.0 - t.array())).sum();
  double frac = tw / (tw + cw);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double k = k1((ua[j] - ua[i]) / h) * k1((ub[j] - ub[i]) / h) / (h * h);
      num += k * w[j] * t[j];
      den += k * w[j];
    }
    double raw = den > 0.0 ? num / den : frac;
    out[i] = std::min(std::max(raw, eps), 1.0 - eps);
  }
  return out;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2 == 1) ++intervals;
  double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline Eigen::MatrixXd random_matrix(ssate::Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace oracle
