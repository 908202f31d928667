#include "pcgeom/patch.hpp"

#include <cmath>

#include "pcgeom/numeric.hpp"

namespace pcgeom {

void NeighborhoodConfig::validate() const {
  if (k < 8) throw ConfigError("NeighborhoodConfig: k must be >= 8");
  if (tau < 1.0) throw ConfigError("NeighborhoodConfig: tau must be >= 1");
  if (input_radius_factor < 1.0)
    throw ConfigError("NeighborhoodConfig: input_radius_factor must be >= 1");
  if (delta0 <= 0.0) throw ConfigError("NeighborhoodConfig: delta0 must be > 0");
}

NeighborhoodPatch make_patch(const std::vector<Eigen::Vector3d>& points, const KdTree& tree,
                             int center, const NeighborhoodConfig& config,
                             const Eigen::Vector3d& reference_normal) {
  config.validate();
  if (center < 0 || static_cast<std::size_t>(center) >= points.size())
    throw ConfigError("make_patch: center index out of range");
  if (reference_normal.norm() == 0.0)
    throw ConfigError("make_patch: reference normal must be nonzero");

  auto nn = tree.knn_of_point(center, config.k);
  if (static_cast<int>(nn.size()) < config.k)
    throw ConfigError("make_patch: cloud has fewer than k+1 points");
  double eps = config.tau * nn.back().first;
  if (eps <= 0.0) throw NumericalError("make_patch: k-th neighbor distance is zero");

  const Eigen::Vector3d& xc = points[static_cast<std::size_t>(center)];
  auto ball = tree.radius(xc, eps);

  Eigen::Vector3d xbar = Eigen::Vector3d::Zero();
  for (const auto& [d, idx] : ball) xbar += points[static_cast<std::size_t>(idx)];
  xbar /= static_cast<double>(ball.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& [d, idx] : ball) {
    Eigen::Vector3d c = points[static_cast<std::size_t>(idx)] - xbar;
    cov += c * c.transpose();
  }
  cov /= static_cast<double>(ball.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);  // ascending eigenvalues
  Eigen::Vector3d psi3 = eig.eigenvectors().col(0);
  Eigen::Vector3d psi1 = eig.eigenvectors().col(2);
  if (eig.eigenvalues()(2) == eig.eigenvalues()(1)) {
    // Exact top-eigenvalue tie: prefer lexicographically larger |components|.
    Eigen::Vector3d alt = eig.eigenvectors().col(1);
    Eigen::Vector3d a = psi1.cwiseAbs(), b = alt.cwiseAbs();
    for (int c = 0; c < 3; ++c) {
      if (a[c] != b[c]) {
        if (b[c] > a[c]) psi1 = alt;
        break;
      }
    }
  }

  if (psi3.dot(reference_normal) < 0.0) psi3 = -psi3;

  // Equivariant in-plane sign: third moment of psi1-projections.
  double moment = 0.0;
  for (const auto& [d, idx] : ball) {
    double t = psi1.dot(points[static_cast<std::size_t>(idx)] - xbar);
    moment += t * t * t;
  }
  if (moment < 0.0) psi1 = -psi1;
  psi1 -= psi1.dot(psi3) * psi3;  // exact orthogonality against the aligned axis
  psi1.normalize();
  Eigen::Vector3d psi2 = psi3.cross(psi1);

  double var = 0.0;
  for (const auto& [d, idx] : ball) var += sqr(psi3.dot(points[static_cast<std::size_t>(idx)] - xbar));
  var /= static_cast<double>(ball.size());

  NeighborhoodPatch patch;
  patch.center_index = center;
  patch.input_radius_factor = config.input_radius_factor;
  patch.frame.origin = xbar;
  patch.frame.psi1 = psi1;
  patch.frame.psi2 = psi2;
  patch.frame.psi3 = psi3;
  patch.frame.epsilon = eps;
  patch.frame.lambda = std::sqrt(var);
  patch.frame.delta = std::max(2.0 * patch.frame.lambda, config.delta0);

  // Final membership measured from the mean: the target set is the sorted
  // prefix of the input set.
  auto input = tree.radius(xbar, config.input_radius_factor * eps);
  patch.input_indices.reserve(input.size());
  patch.coords.reserve(input.size());
  int targets = 0;
  for (const auto& [d, idx] : input) {
    if (d <= eps) ++targets;
    patch.input_indices.push_back(idx);
    patch.coords.push_back(patch.frame.local_coords(points[static_cast<std::size_t>(idx)]));
  }
  patch.target_count = targets;
  return patch;
}

GeometricTruth truth_in_frame(const GeometricTruth& chart_truth, const ChartJet& jet,
                              const LocalFrame& frame) {
  if (chart_truth.frame_coords)
    throw ConfigError("truth_in_frame: input truth is already frame-local");

  Eigen::Matrix2d J;
  J << frame.psi1.dot(jet.du), frame.psi1.dot(jet.dv),
       frame.psi2.dot(jet.du), frame.psi2.dot(jet.dv);
  double det = J.determinant();
  if (std::abs(det) < 1e-12)
    throw NumericalError("truth_in_frame: singular tangential Jacobian (frame nearly orthogonal to chart)");

  Eigen::Matrix2d Jinv;
  Jinv << J(1, 1) / det, -J(0, 1) / det,
          -J(1, 0) / det, J(0, 0) / det;

  double side = (chart_truth.normal.dot(frame.psi3) >= 0.0) ? 1.0 : -1.0;

  GeometricTruth out;
  out.first = Jinv.transpose() * chart_truth.first * Jinv;
  out.first_inv = J * chart_truth.first_inv * J.transpose();
  out.second = side * (Jinv.transpose() * chart_truth.second * Jinv);
  out.gauss = chart_truth.gauss;
  out.mean = side * chart_truth.mean;
  out.normal = side * Eigen::Vector3d(frame.psi1.dot(chart_truth.normal),
                                      frame.psi2.dot(chart_truth.normal),
                                      frame.psi3.dot(chart_truth.normal));
  out.frame_coords = true;
  return out;
}

}  // namespace pcgeom
