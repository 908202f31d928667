#include "pcgeom/gmls.hpp"

#include <cmath>

#include "pcgeom/numeric.hpp"

namespace pcgeom {

namespace {

double window_weight(double u, double v, double input_radius_factor) {
  const double rho = std::sqrt(u * u + v * v) / input_radius_factor;
  if (rho >= 1.0) return 0.0;
  const double t = 1.0 - rho;
  const double t2 = t * t;
  return t2 * t2;
}

}  // namespace

MongePatch gmls_fit_heights(const NeighborhoodPatch& patch, const Eigen::VectorXd& heights,
                            int degree) {
  const int m = patch.input_count();
  if (heights.size() != m)
    throw NumericalError("gmls_fit: height count does not match input count");
  MongePatch fit;
  fit.basis = LegendreBasis(degree);
  fit.epsilon = patch.frame.epsilon;
  fit.delta = patch.frame.delta;
  const int nb = fit.basis.size();
  if (m < nb) throw NumericalError("gmls_fit: fewer input points than basis functions");

  Eigen::MatrixXd A(m, nb);
  Eigen::VectorXd b(m);
  for (int j = 0; j < m; ++j) {
    const Eigen::Vector3d& c = patch.coords[static_cast<size_t>(j)];
    const double w = window_weight(c.x(), c.y(), patch.input_radius_factor);
    const double sw = std::sqrt(w);
    A.row(j) = sw * fit.basis.values(c.x(), c.y()).transpose();
    b(j) = sw * heights(j);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
  const double rmax = rdiag.maxCoeff();
  const double rmin = rdiag.minCoeff();
  if (rmin > 0.0 && rmax / rmin < 1e12 && qr.rank() == nb) {
    fit.coeff = qr.solve(b);
    return fit;
  }

  // Ill-conditioned window (clustered or collapsed inputs): damp the
  // normal equations instead of failing outright.
  const Eigen::MatrixXd ata = A.transpose() * A;
  const double mu = 1e-10 * ata.trace() / static_cast<double>(m);
  if (!(mu > 0.0)) throw NumericalError("gmls_fit: degenerate weight matrix");
  Eigen::MatrixXd damped = ata;
  damped.diagonal().array() += mu;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("gmls_fit: regularized system is not solvable");
  fit.coeff = ldlt.solve(A.transpose() * b);
  if (!fit.coeff.allFinite()) throw NumericalError("gmls_fit: non-finite fit coefficients");
  return fit;
}

MongePatch gmls_fit(const NeighborhoodPatch& patch, int degree) {
  const int m = patch.input_count();
  Eigen::VectorXd heights(m);
  for (int j = 0; j < m; ++j) heights(j) = patch.coords[static_cast<size_t>(j)].z();
  return gmls_fit_heights(patch, heights, degree);
}

}  // namespace pcgeom
