#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ssate/common.hpp"

namespace ssate {

// Natural cubic spline basis for one coordinate.  With K distinct knots the
// coordinate contributes K-1 columns: the identity column plus K-2 curvature
// terms that are linear beyond the outermost knots.  Heavy ties collapse the
// block to a single linear column, and a constant coordinate is dropped.
struct CoordinateBasis {
  std::vector<double> knots;  // distinct, ascending
  double min_value = 0.0;     // observed range (boundary metadata)
  double max_value = 0.0;
  bool dropped = false;       // constant coordinate: no columns

  int cols() const {
    if (dropped) return 0;
    if (knots.size() < 3) return 1;  // linear fallback
    return static_cast<int>(knots.size()) - 1;
  }

  // Writes the basis values at x into out[0..cols()).
  void evaluate(double x, double* out) const;
};

// Knots at the uniform quantiles {1,..,k}/(k+1) of the (weighted) pooled
// values, deduplicated.
CoordinateBasis make_coordinate_basis(const Eigen::VectorXd& values, int n_knots,
                                      const Eigen::VectorXd& weights = Eigen::VectorXd());

// Basis metadata for the full imputation design
// [1 | spline(V_1) ... spline(V_p) | T | spline(U) | (T x spline(V) blocks)].
struct SplineBasis {
  std::vector<CoordinateBasis> v_coords;
  CoordinateBasis u_coord;
  bool interaction_vt = false;
  int design_width = 0;

  int v_block_cols() const;
  void update_width();
};

SplineBasis make_spline_basis(const Eigen::MatrixXd& v, const Eigen::VectorXd& u, int n_knots,
                              bool interaction_vt,
                              const Eigen::VectorXd& weights = Eigen::VectorXd());

// Evaluates the design matrix for rows (V, T, U).
Eigen::MatrixXd build_imputation_design(const Eigen::MatrixXd& v, const Eigen::VectorXd& t,
                                        const Eigen::VectorXd& u, const SplineBasis& basis);

}  // namespace ssate
