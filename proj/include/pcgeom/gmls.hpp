#pragma once

#include "pcgeom/monge.hpp"
#include "pcgeom/patch.hpp"

namespace pcgeom {

/**
 * Weighted moving least-squares height fit over a patch. Every input
 * point contributes a row weighted by the compact quartic window
 *   w(rho) = (1 - rho)_+^4,  rho = |(u, v)|_2 / input_radius_factor,
 * so weights fade to zero at the input boundary. The normal equations
 * are solved through a column-pivoted QR of the sqrt(w)-scaled system;
 * if the scaled matrix is ill-conditioned (diagonal ratio of R above
 * 1e12) the solve falls back to Tikhonov regularization with
 * mu = 1e-10 trace(A^T A) / m.
 *
 * pre: patch.input_count() >= basis size. Throws NumericalError when
 * the system stays unsolvable after regularization.
 */
MongePatch gmls_fit(const NeighborhoodPatch& patch, int degree = 3);

// Same fit with the height column replaced by caller-supplied values,
// one per input point (used when heights come from another predictor).
MongePatch gmls_fit_heights(const NeighborhoodPatch& patch, const Eigen::VectorXd& heights,
                            int degree = 3);

}  // namespace pcgeom
