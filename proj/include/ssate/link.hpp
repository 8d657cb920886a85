#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "ssate/common.hpp"

namespace ssate {

enum class LinkKind { identity, logistic };

// Inverse link g, its derivative, and the unit deviance for the two GLM
// families used by the working models.  Linear predictors are clamped to
// +-30 before any inverse link so logistic fits stay finite under
// separation; fitted probabilities therefore lie in [g(-30), g(30)].
struct LinkSpec {
  LinkKind kind = LinkKind::logistic;

  static double clamp_eta(double eta) {
    return std::clamp(eta, -kLinearPredictorClamp, kLinearPredictorClamp);
  }

  double inverse(double eta) const {
    eta = clamp_eta(eta);
    if (kind == LinkKind::identity) return eta;
    return 1.0 / (1.0 + std::exp(-eta));
  }

  // d/d eta of the inverse link.
  double derivative(double eta) const {
    if (kind == LinkKind::identity) return 1.0;
    double mu = inverse(eta);
    return mu * (1.0 - mu);
  }

  double link(double mu) const {
    if (kind == LinkKind::identity) return mu;
    mu = std::clamp(mu, 1e-12, 1.0 - 1e-12);
    return std::log(mu / (1.0 - mu));
  }

  // Unit deviance contribution at linear predictor eta.  Gaussian: squared
  // error; binomial: -2 log-likelihood with the clamped predictor.
  double unit_deviance(double y, double eta) const {
    eta = clamp_eta(eta);
    if (kind == LinkKind::identity) {
      double r = y - eta;
      return r * r;
    }
    // -2 {y*eta - log(1 + e^eta)}, computed stably.
    double log1pe = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    return -2.0 * (y * eta - log1pe);
  }

  // Negative log-likelihood contribution (deviance/2 for the binomial,
  // squared error/2 for the gaussian); used by penalized objectives.
  double nll(double y, double eta) const {
    if (kind == LinkKind::identity) {
      double r = y - LinkSpec::clamp_eta(eta);
      return 0.5 * r * r;
    }
    return 0.5 * unit_deviance(y, eta);
  }

  // Upper bound on the curvature of nll in eta (majorization constant).
  double curvature_bound() const { return kind == LinkKind::identity ? 1.0 : 0.25; }

  std::string name() const { return kind == LinkKind::identity ? "identity" : "logistic"; }
};

inline LinkSpec make_link(LinkKind kind) { return LinkSpec{kind}; }

inline LinkKind parse_link(const std::string& s) {
  if (s == "identity") return LinkKind::identity;
  if (s == "logistic") return LinkKind::logistic;
  throw InputError("unknown link '" + s + "' (expected identity or logistic)");
}

}  // namespace ssate
