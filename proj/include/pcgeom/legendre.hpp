#pragma once

#include <Eigen/Dense>

namespace pcgeom {

/**
 * Tensor-product Legendre basis on the rescaled patch square:
 * phi_{ij}(u, v) = l_i(u) l_j(v), flat index k = i (degree+1) + j,
 * (degree+1)^2 functions. l_0 = 1, l_1 = x, l_2 = (3x^2-1)/2,
 * l_3 = (5x^3-3x)/2, ... by the three-term recurrence.
 */
struct LegendreBasis {
  int degree = 3;

  explicit LegendreBasis(int d = 3) : degree(d) {}
  int size() const { return (degree + 1) * (degree + 1); }

  // Values of all basis functions at (u, v).
  Eigen::VectorXd values(double u, double v) const;

  // out is size() x 6 with columns [value, d/du, d/dv, d2/du2, d2/dudv, d2/dv2].
  void eval(double u, double v, Eigen::MatrixXd& out) const;
};

// Values/derivatives of l_0..l_degree at x; columns of the output are
// [value, first, second], (degree+1) rows.
void legendre_1d(int degree, double x, Eigen::MatrixXd& out);

}  // namespace pcgeom
