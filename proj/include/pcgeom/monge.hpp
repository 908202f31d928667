#pragma once

#include <Eigen/Dense>

#include "pcgeom/legendre.hpp"

namespace pcgeom {

/**
 * Height-function description of a patch surface in its local frame:
 * the graph w = s(u, v) with s expanded in the tensor Legendre basis.
 * epsilon and delta are the frame scales that turn the dimensionless
 * fit back into physical geometry.
 */
struct MongePatch {
  LegendreBasis basis{3};
  Eigen::VectorXd coeff;  // basis.size() entries
  double epsilon = 0.0;
  double delta = 0.0;

  double height(double u, double v) const { return basis.values(u, v).dot(coeff); }
};

/**
 * Pointwise differential geometry decoded from a height fit, expressed
 * in the patch frame. first/first_inv/second act on tangent coordinates
 * (xi^1, xi^2); gauss and mean are the scalar curvatures; normal is the
 * unit graph normal (positive w component).
 */
struct GeometryEstimate {
  double height = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  Eigen::Matrix2d first = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d first_inv = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
  double gauss = 0.0;
  double mean = 0.0;
};

/**
 * Evaluate the fitted height and its scaled derivatives at rescaled
 * coordinates (u, v) and assemble the graph geometry. With
 * h_a = (delta/epsilon) ds/da and h_ab = (delta/epsilon^2) d2s/dadb:
 *   I = [[1+h1^2, h1 h2], [h1 h2, 1+h2^2]],  W = sqrt(1+h1^2+h2^2),
 *   II = [[h11, h12], [h12, h22]] / W,  eta = (-h1, -h2, 1)/W,
 *   K = det(II-ish) = (L N - M^2)/(E G - F^2),
 *   H = (L G - 2 M F + N E)/(2 (E G - F^2)).
 */
GeometryEstimate extract_geometry(const MongePatch& patch, double u, double v);

// Same, but reusing precomputed basis derivative rows (size x 6) at (u, v).
GeometryEstimate extract_geometry(const MongePatch& patch, const Eigen::MatrixXd& basis_rows);

}  // namespace pcgeom
