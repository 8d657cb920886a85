#include "ssate/spline.hpp"

#include <algorithm>
#include <cmath>

#include "ssate/stats.hpp"

namespace ssate {

void CoordinateBasis::evaluate(double x, double* out) const {
  if (dropped) return;
  out[0] = x;
  const int k = static_cast<int>(knots.size());
  if (k < 3) return;
  // d_j(x) = [(x - xi_j)_+^3 - (x - xi_K)_+^3] / (xi_K - xi_j); columns are
  // d_j - d_{K-1}, which kills the quadratic and cubic growth on both sides.
  auto cube_pos = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  const double last = knots[k - 1];
  const double tail = cube_pos(x - last);
  const double d_last =
      (cube_pos(x - knots[k - 2]) - tail) / (last - knots[k - 2]);
  for (int j = 0; j < k - 2; ++j) {
    double dj = (cube_pos(x - knots[j]) - tail) / (last - knots[j]);
    out[1 + j] = dj - d_last;
  }
}

CoordinateBasis make_coordinate_basis(const Eigen::VectorXd& values, int n_knots,
                                      const Eigen::VectorXd& weights) {
  if (values.size() == 0) throw InputError("spline: empty coordinate");
  Eigen::VectorXd w =
      weights.size() == 0 ? Eigen::VectorXd::Ones(values.size()) : weights;
  if (w.size() != values.size()) throw InputError("spline: weight length mismatch");

  CoordinateBasis cb;
  cb.min_value = values.minCoeff();
  cb.max_value = values.maxCoeff();
  if (!(cb.max_value > cb.min_value)) {
    cb.dropped = true;
    return cb;
  }
  cb.knots.reserve(n_knots);
  for (int i = 1; i <= n_knots; ++i) {
    double q = weighted_quantile(values, w, static_cast<double>(i) / (n_knots + 1));
    if (cb.knots.empty() || q > cb.knots.back()) cb.knots.push_back(q);
  }
  return cb;
}

int SplineBasis::v_block_cols() const {
  int c = 0;
  for (const auto& cb : v_coords) c += cb.cols();
  return c;
}

void SplineBasis::update_width() {
  design_width = 1 + v_block_cols() + 1 + u_coord.cols();
  if (interaction_vt) design_width += v_block_cols();
}

SplineBasis make_spline_basis(const Eigen::MatrixXd& v, const Eigen::VectorXd& u, int n_knots,
                              bool interaction_vt, const Eigen::VectorXd& weights) {
  SplineBasis basis;
  basis.interaction_vt = interaction_vt;
  basis.v_coords.reserve(v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    basis.v_coords.push_back(make_coordinate_basis(v.col(j), n_knots, weights));
  basis.u_coord = make_coordinate_basis(u, n_knots, weights);
  basis.update_width();
  return basis;
}

Eigen::MatrixXd build_imputation_design(const Eigen::MatrixXd& v, const Eigen::VectorXd& t,
                                        const Eigen::VectorXd& u, const SplineBasis& basis) {
  const Eigen::Index n = v.rows();
  if (t.size() != n || u.size() != n) throw InputError("imputation design: length mismatch");
  if (static_cast<std::size_t>(v.cols()) != basis.v_coords.size())
    throw InputError("imputation design: V column count mismatch");

  Eigen::MatrixXd design(n, basis.design_width);
  std::vector<double> buf(16);
  for (Eigen::Index i = 0; i < n; ++i) {
    int c = 0;
    design(i, c++) = 1.0;
    const int v_begin = c;
    for (std::size_t j = 0; j < basis.v_coords.size(); ++j) {
      const auto& cb = basis.v_coords[j];
      int k = cb.cols();
      if (k == 0) continue;
      if (static_cast<int>(buf.size()) < k) buf.resize(k);
      cb.evaluate(v(i, static_cast<Eigen::Index>(j)), buf.data());
      for (int m = 0; m < k; ++m) design(i, c++) = buf[m];
    }
    design(i, c++) = t[i];
    {
      const auto& cb = basis.u_coord;
      int k = cb.cols();
      if (k > 0) {
        if (static_cast<int>(buf.size()) < k) buf.resize(k);
        cb.evaluate(u[i], buf.data());
        for (int m = 0; m < k; ++m) design(i, c++) = buf[m];
      }
    }
    if (basis.interaction_vt) {
      int vb = basis.v_block_cols();
      for (int m = 0; m < vb; ++m) design(i, c + m) = t[i] * design(i, v_begin + m);
      c += vb;
    }
    if (c != basis.design_width) throw InputError("imputation design: width bookkeeping error");
  }
  return design;
}

}  // namespace ssate
