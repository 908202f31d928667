#pragma once

#include <cstdint>
#include <vector>

#include "pcgeom/estimator.hpp"
#include "pcgeom/patch.hpp"
#include "pcgeom/point_cloud.hpp"

namespace pcgeom {

struct McfConfig {
  double dt = 1e-4;           // time step (0 allowed: recompute-only step)
  int steps = 500;
  double r0 = 0.00667;        // curvature smoothing length
  double r1 = 0.005;          // minimum point spacing, < r0
  int snapshot_every = 25;
  int stop_count = 50;        // stop when this many points crowd together
  double stop_distance = 0.0; // crowding distance; <= 0 means r1 / 2
  NeighborhoodConfig neighborhood;

  void validate() const;
  double effective_stop_distance() const {
    return stop_distance > 0.0 ? stop_distance : 0.5 * r1;
  }
};

/**
 * Point-cloud flow state. `normal` doubles as the orientation reference:
 * each step hands the previous estimate to the patch builder so the frame
 * never flips as the shape deforms. `crowded` counts alive points that had
 * another alive point within the stop distance after the position update
 * and before subsampling (the near-singularity signal).
 */
struct FlowState {
  int step = 0;
  double time = 0.0;
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normal;
  std::vector<double> curvature;  // raw H estimates
  std::vector<double> smoothed;   // Gaussian-smoothed H
  std::vector<uint8_t> alive;
  int crowded = 0;

  int size() const { return static_cast<int>(points.size()); }
  int alive_count() const;
};

FlowState init_flow(const PointCloud& cloud);

// Nearest alive-to-alive distance (infinity when fewer than two alive).
double min_alive_spacing(const FlowState& state);

/**
 * Replaces `smoothed` with the normalized Gaussian average of `curvature`
 * over alive points within 3 r0: weights w(r) = exp(-r^2 / (2 r0^2))
 * rescaled to sum to one (the point itself always contributes).
 */
void smooth_curvature(FlowState& state, const McfConfig& cfg);

/**
 * Greedy thinning in ascending point-index order: an alive point is
 * deactivated when a surviving lower-index point lies strictly within r1,
 * so the alive set ends with pairwise spacing >= r1. Idempotent.
 */
void maintain_density(FlowState& state, const McfConfig& cfg);

/**
 * One explicit step: estimate (H, eta) at every alive point with the
 * estimator (frame oriented by the previous normal), smooth H, move
 * x += dt * H_smooth * eta, record the crowding count, then thin.
 * Points whose estimate fails keep their previous values and stand
 * still for the step; more than 1% failures aborts with NumericalError.
 */
void mcf_step(FlowState& state, const McfConfig& cfg, const PatchEstimator& estimator);

/**
 * Runs cfg.steps steps from the oriented cloud, returning snapshots: the
 * initial state, every snapshot_every-th step, and the final state. Stops
 * early once cfg.stop_count alive points crowd within the stop distance.
 */
std::vector<FlowState> run_flow(const PointCloud& initial, const McfConfig& cfg,
                                const PatchEstimator& estimator);

}  // namespace pcgeom
