#pragma once

#include <cmath>

#include "ssate/common.hpp"

namespace ssate {

// Higher-order Gaussian-based kernels.  Order 4: k(u) = (3 - u^2)/2 phi(u);
// order 6: k(u) = (15 - 10u^2 + u^4)/8 phi(u).  Moments 1..q-1 vanish.
// The bivariate kernel is the product k(u) k(v).
struct KernelSpec {
  int order = 4;        // q, even, >= 4
  double bandwidth = 0.1;

  void validate() const {
    if (order != 4 && order != 6) throw InputError("kernel: order must be 4 or 6");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
      throw InputError("kernel: bandwidth must be positive");
  }

  double univariate(double u) const {
    // exp underflows to exactly zero past |u| ~ 38.6; the polynomial factor
    // then multiplies 0, so skipping keeps sums bit-identical.
    double u2 = u * u;
    if (u2 >= 1500.0) return 0.0;
    double phi = std::exp(-0.5 * u2) * 0.3989422804014326779;
    if (order == 4) return 0.5 * (3.0 - u2) * phi;
    return 0.125 * (15.0 - (10.0 - u2) * u2) * phi;
  }

  // Product kernel on standardized offsets (du/h, dv/h), without the 1/h^2
  // normalization (it cancels in every ratio this project forms).
  double bivariate_scaled(double du, double dv) const {
    return univariate(du / bandwidth) * univariate(dv / bandwidth);
  }
};

// Plug-in bandwidth h = scale * N^{-alpha} on the probability-integral-
// transformed score scale.  The exponent must lie strictly inside (0, 1/4).
inline double plugin_bandwidth(long n_rows, double alpha_exponent, double scale = 0.25) {
  if (n_rows < 2) throw InputError("bandwidth: need at least 2 rows");
  if (!(alpha_exponent > 0.0 && alpha_exponent < 0.25))
    throw InputError("bandwidth: exponent must lie in (0, 0.25)");
  if (!(scale > 0.0)) throw InputError("bandwidth: scale must be positive");
  return scale * std::pow(static_cast<double>(n_rows), -alpha_exponent);
}

}  // namespace ssate
