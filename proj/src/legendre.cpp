#include "pcgeom/legendre.hpp"

namespace pcgeom {

void legendre_1d(int degree, double x, Eigen::MatrixXd& out) {
  out.resize(degree + 1, 3);
  out(0, 0) = 1.0;
  out(0, 1) = 0.0;
  out(0, 2) = 0.0;
  if (degree == 0) return;
  out(1, 0) = x;
  out(1, 1) = 1.0;
  out(1, 2) = 0.0;
  for (int n = 1; n < degree; ++n) {
    // (n+1) l_{n+1} = (2n+1) x l_n - n l_{n-1}, differentiated twice:
    // l'_{n+1} = l'_{n-1} + (2n+1) l_n,  l''_{n+1} = l''_{n-1} + (2n+1) l'_n.
    const double a = 2.0 * n + 1.0;
    out(n + 1, 0) = (a * x * out(n, 0) - n * out(n - 1, 0)) / (n + 1.0);
    out(n + 1, 1) = out(n - 1, 1) + a * out(n, 0);
    out(n + 1, 2) = out(n - 1, 2) + a * out(n, 1);
  }
}

Eigen::VectorXd LegendreBasis::values(double u, double v) const {
  Eigen::MatrixXd lu, lv;
  legendre_1d(degree, u, lu);
  legendre_1d(degree, v, lv);
  Eigen::VectorXd out(size());
  for (int i = 0; i <= degree; ++i)
    for (int j = 0; j <= degree; ++j)
      out(i * (degree + 1) + j) = lu(i, 0) * lv(j, 0);
  return out;
}

void LegendreBasis::eval(double u, double v, Eigen::MatrixXd& out) const {
  Eigen::MatrixXd lu, lv;
  legendre_1d(degree, u, lu);
  legendre_1d(degree, v, lv);
  out.resize(size(), 6);
  for (int i = 0; i <= degree; ++i) {
    for (int j = 0; j <= degree; ++j) {
      const int k = i * (degree + 1) + j;
      out(k, 0) = lu(i, 0) * lv(j, 0);
      out(k, 1) = lu(i, 1) * lv(j, 0);
      out(k, 2) = lu(i, 0) * lv(j, 1);
      out(k, 3) = lu(i, 2) * lv(j, 0);
      out(k, 4) = lu(i, 1) * lv(j, 1);
      out(k, 5) = lu(i, 0) * lv(j, 2);
    }
  }
}

}  // namespace pcgeom
