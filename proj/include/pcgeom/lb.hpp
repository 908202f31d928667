#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <vector>

#include "pcgeom/estimator.hpp"
#include "pcgeom/patch.hpp"
#include "pcgeom/point_cloud.hpp"
#include "pcgeom/shapes.hpp"

namespace pcgeom {

/**
 * Meshless collocation solver for the surface Poisson problem
 *   Laplacian_S u = -f on the sampled surface,  integral of u = 0,
 * where Laplacian_S is the Laplace-Beltrami operator. Every cloud point is
 * an evaluation (collocation) point; a seeded uniform subset of them carries
 * the unknowns u_k. Each collocation row expands
 *   Laplacian_S u(x_i) = g^{ab} d_a d_b u + c^b d_b u,
 *   c^b = d_a g^{ab} + g^{ab} d_a|g| / (2|g|),
 * in the local patch chart: metric terms come in closed form from the plugged
 * estimator's polynomial height fit, and the u-derivatives from a weighted
 * least-squares fit of the unknown over the in-patch degrees of freedom,
 * making every row linear in the unknowns.
 */
struct LbConfig {
  NeighborhoodConfig neighborhood;  // patch construction; k = 30 by default
  int degree = 3;                   // Legendre degree of the unknown's local fits
  double dof_fraction = 0.9;        // N = round(dof_fraction * n) unknowns
  double tol = 1e-8;                // relative normal-equations residual target
  int max_iter = 50000;             // normal-equation iterations scale roughly with n
  std::uint64_t seed = 0;           // degree-of-freedom subset selection

  void validate() const;
};

// A fully specified solve: cloud, right-hand side, unknown subset, estimator.
struct LbProblem {
  PointCloud cloud;       // all n evaluation points (already filtered upstream)
  std::vector<double> f;  // right-hand side samples, one per point, finite
  std::vector<int> dof;   // ascending cloud indices carrying unknowns
  PatchEstimator estimator;
  LbConfig config;
};

// Draws the seeded uniform DOF subset and validates sizes/finiteness.
LbProblem make_lb_problem(PointCloud cloud, std::vector<double> f, PatchEstimator estimator,
                          LbConfig config);

/**
 * The assembled least-squares system. matrix has one PDE row per surviving
 * evaluation point (row r encodes Laplacian_S u(x_i) = -f_i for
 * i = row_points[r]) plus a final mean-zero constraint row: uniform weights
 * 1/N over the unknowns scaled by constraint_scale so its 2-norm matches the
 * median PDE row norm (target 0). evaluation is the n x N readout operator
 * giving u at every cloud point: identity rows at DOF points, local
 * least-squares interpolation rows elsewhere.
 */
struct LbSystem {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Eigen::VectorXd rhs;              // -f at PDE rows, 0 at the constraint row
  std::vector<int> row_points;      // row -> cloud index (-1 for the constraint)
  std::vector<int> dof_points;      // column -> cloud index, ascending
  std::vector<int> dropped_points;  // points whose row failed (at most 1%)
  double constraint_scale = 0.0;    // multiplier applied to the uniform 1/N row
  Eigen::SparseMatrix<double, Eigen::RowMajor> evaluation;
};

// Builds all rows. Per-row numerical failures are tolerated up to 1% of the
// cloud (dropped rows are recorded; a failed non-DOF readout falls back to
// the nearest unknown); beyond that the assembly aborts with NumericalError.
LbSystem assemble_lb_system(const LbProblem& problem);

struct LbSolution {
  Eigen::VectorXd u;      // per evaluation point, mean subtracted
  Eigen::VectorXd u_dof;  // solved unknowns, shifted by the same constant
  std::vector<double> residual_history;  // preconditioned relative residual,
                                         // monotone nonincreasing, entry 0 = 1
  double final_residual = 0.0;  // plain relative normal-equations residual
  int iterations = 0;
};

/**
 * Jacobi-preconditioned conjugate-residual iteration on the normal equations
 * A^T A u = A^T b (any convergent Krylov variant is acceptable here; conjugate
 * residual makes the preconditioned residual history provably monotone).
 * Converged when ||A^T(Au - b)|| / ||A^T b|| < tol, verified against a
 * recomputed (non-recursive) residual. Throws NumericalError on
 * non-convergence with the tail of the residual history in the message.
 * After the solve the mean of the evaluated u is subtracted from both
 * vectors (exact projection onto the constraint).
 */
LbSolution solve_lb_system(const LbSystem& system, double tol, int max_iter);

// Same solve against an explicit right-hand side (the system's own rhs is
// ignored), letting one assembled system serve many right-hand sides.
LbSolution solve_lb_system(const LbSystem& system, const Eigen::VectorXd& rhs, double tol,
                           int max_iter);

// assemble + solve with the problem's own tolerance settings.
LbSolution solve_lb(const LbProblem& problem);

/**
 * Random right-hand side: the product of three univariate trigonometric
 * series (one per ambient axis, M = 10 modes each, period 2, coefficients
 * standard normal), restricted to the cloud points, affinely rescaled so the
 * sample range is exactly [-20, 20], then shifted to zero sample mean. A
 * degenerate (constant) draw yields the zero vector.
 */
std::vector<double> generate_rhs(std::uint64_t seed, const PointCloud& cloud);

// A smooth scalar field on ambient space with analytic derivatives, used to
// manufacture exact solutions.
struct AmbientField {
  std::function<double(const Eigen::Vector3d&)> value;
  std::function<Eigen::Vector3d(const Eigen::Vector3d&)> gradient;
  std::function<Eigen::Matrix3d(const Eigen::Vector3d&)> hessian;
};

// Sum of `modes` random plane-wave cosines with integer wave vectors scaled
// by pi (ambient period 2 per axis, components up to max_component) and
// standard-normal amplitudes. Larger max_component makes rougher fields;
// manufactured benchmark runs use it to match the frequency content of the
// random right-hand-side class (10 modes per axis).
AmbientField random_trig_field(std::uint64_t seed, int modes = 4, int max_component = 2);

/**
 * Homogeneous harmonic polynomial r^l Y_l^m matching the real orthonormal
 * spherical-harmonic convention of eval_real_sh; restricted to the unit
 * sphere it equals Y_l^m, so Laplacian_S (restriction) = -l(l+1) Y_l^m.
 * Supported for l in {1, 2}; other orders throw ConfigError.
 */
AmbientField solid_harmonic_field(int l, int m);

// Exact Laplace-Beltrami of the restriction of an ambient field, evaluated
// at chart coordinates through the shape's second-order chart jet.
double exact_surface_laplacian(const Shape& shape, int chart, double u, double v,
                               const AmbientField& field);

struct ManufacturedResult {
  double relative_error = 0.0;  // ||u - u_exact||_2 / ||u_exact||_2
  LbSolution solution;
  Eigen::VectorXd u_exact;  // mean-adjusted truth at the evaluation points
};

/**
 * Manufactured-solution verification: f = -Laplacian_S u_exact computed
 * exactly through the generating chart at each point's clean coordinates,
 * both f and the restricted truth shifted to zero sample mean, then solved
 * and compared over all evaluation points. The cloud must carry generating
 * chart coordinates.
 */
ManufacturedResult manufactured_test(const Shape& shape, const PointCloud& cloud,
                                     const AmbientField& u_exact, const PatchEstimator& estimator,
                                     const LbConfig& config);

// Manufactured verification against a prebuilt system (cloud must be the
// one the system was assembled from); benchmark runs assemble once and
// reuse the system across their right-hand-side samples.
ManufacturedResult manufactured_on_system(const Shape& shape, const PointCloud& cloud,
                                          const AmbientField& u_exact, const LbSystem& system,
                                          double tol, int max_iter);

struct FilterResult {
  PointCloud cloud;          // kept points with all per-point arrays preserved
  std::vector<int> removed;  // ascending original indices
};

/**
 * Outlier filter: reconstruct every point's neighborhood with the estimator
 * and drop point i when its own rescaled height deviates from the fit by
 * more than alpha, |w_i - s(u_i, v_i)| > alpha. Decisions are made on the
 * original cloud in a single pass (no cascade); points whose fit fails are
 * kept.
 */
FilterResult gnp_filter(const PointCloud& cloud, const PatchEstimator& estimator,
                        const NeighborhoodConfig& cfg, double alpha);

}  // namespace pcgeom
