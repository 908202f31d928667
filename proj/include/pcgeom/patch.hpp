#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pcgeom/kdtree.hpp"
#include "pcgeom/point_cloud.hpp"
#include "pcgeom/shapes.hpp"

namespace pcgeom {

struct NeighborhoodConfig {
  int k = 30;                       // neighbors defining the patch scale, >= 8
  double tau = 1.1;                 // epsilon = tau * r_k
  double input_radius_factor = 1.5; // input set radius, in units of epsilon
  double delta0 = 0.005;            // normal-scale floor

  void validate() const;
};

// Orthonormal right-handed frame (psi1 x psi2 = psi3) centered at the
// neighborhood mean. psi3 is the PCA minor axis aligned with the reference
// outward normal; epsilon/delta are the tangential/normal rescaling lengths.
struct LocalFrame {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d psi1 = Eigen::Vector3d::UnitX();
  Eigen::Vector3d psi2 = Eigen::Vector3d::UnitY();
  Eigen::Vector3d psi3 = Eigen::Vector3d::UnitZ();
  double epsilon = 0.0;
  double delta = 0.0;
  double lambda = 0.0;

  // (u, v, w) = (xi1/epsilon, xi2/epsilon, xi3/delta), xi_j = psi_j . (x - origin).
  Eigen::Vector3d local_coords(const Eigen::Vector3d& x) const {
    Eigen::Vector3d d = x - origin;
    return {psi1.dot(d) / epsilon, psi2.dot(d) / epsilon, psi3.dot(d) / delta};
  }
  // Inverse map for rescaled local coordinates.
  Eigen::Vector3d world_point(const Eigen::Vector3d& uvw) const {
    return origin + epsilon * uvw.x() * psi1 + epsilon * uvw.y() * psi2 + delta * uvw.z() * psi3;
  }
};

/**
 * A rescaled Monge-gauge neighborhood. input_indices lists the cloud points
 * with |x - origin| <= input_radius_factor * epsilon sorted by (distance,
 * index); the target set (|x - origin| <= epsilon) is its prefix of length
 * target_count. coords holds the rescaled (u, v, w) of every input point, so
 * target points satisfy u^2 + v^2 <= 1 structurally.
 */
struct NeighborhoodPatch {
  LocalFrame frame;
  int center_index = -1;
  std::vector<int> input_indices;
  int target_count = 0;
  std::vector<Eigen::Vector3d> coords;
  double input_radius_factor = 1.5;

  int input_count() const { return static_cast<int>(input_indices.size()); }
  int target_cloud_index(int t) const { return input_indices[static_cast<std::size_t>(t)]; }
};

/**
 * Builds the neighborhood of points[center]: epsilon = tau * (distance to the
 * k-th nearest neighbor of the center); the epsilon-ball around the center
 * provides the mean, the PCA frame, and lambda (std of psi3-projections);
 * delta = max(2 lambda, delta0); membership of the final target/input sets is
 * then measured from the mean. psi3 is flipped to the reference normal's side,
 * psi1's sign is fixed by the third moment of the psi1-projections (a
 * rotation-equivariant choice), and psi2 = psi3 x psi1. Exactly equal top two
 * eigenvalues break the tie toward the eigenvector with lexicographically
 * larger absolute components.
 */
NeighborhoodPatch make_patch(const std::vector<Eigen::Vector3d>& points, const KdTree& tree,
                             int center, const NeighborhoodConfig& config,
                             const Eigen::Vector3d& reference_normal);

/**
 * Re-expresses exact chart geometry in a patch frame: with J_{ac} = psi_a .
 * sigma_c (2x2 tangential Jacobian), I -> J^{-T} I J^{-1}, I^{-1} -> J I^{-1}
 * J^T, II -> s J^{-T} II J^{-1} where s = sign(eta . psi3); the normal is
 * expressed in frame components (and flipped by s, as are H and II, so the
 * result is the truth seen from the psi3 side; alignment makes s = +1 in
 * practice). K is invariant. Throws NumericalError when |det J| < 1e-12.
 */
GeometricTruth truth_in_frame(const GeometricTruth& chart_truth, const ChartJet& jet,
                              const LocalFrame& frame);

}  // namespace pcgeom
