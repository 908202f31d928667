#include "pcgeom/mcf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pcgeom/kdtree.hpp"
#include "pcgeom/monge.hpp"
#include "pcgeom/numeric.hpp"

namespace pcgeom {

namespace {

// Alive points in ascending index order plus their compact positions.
struct AliveView {
  std::vector<int> to_original;
  std::vector<Eigen::Vector3d> points;
};

AliveView alive_view(const FlowState& state) {
  AliveView view;
  for (int i = 0; i < state.size(); ++i) {
    if (!state.alive[static_cast<std::size_t>(i)]) continue;
    view.to_original.push_back(i);
    view.points.push_back(state.points[static_cast<std::size_t>(i)]);
  }
  return view;
}

}  // namespace

void McfConfig::validate() const {
  if (!(dt >= 0.0)) throw ConfigError("McfConfig: dt must be >= 0");
  if (steps < 0) throw ConfigError("McfConfig: steps must be >= 0");
  if (!(r0 > 0.0)) throw ConfigError("McfConfig: r0 must be > 0");
  if (!(r1 > 0.0 && r1 < r0)) throw ConfigError("McfConfig: need 0 < r1 < r0");
  if (snapshot_every < 1) throw ConfigError("McfConfig: snapshot_every must be >= 1");
  if (stop_count < 1) throw ConfigError("McfConfig: stop_count must be >= 1");
  neighborhood.validate();
}

int FlowState::alive_count() const {
  int count = 0;
  for (uint8_t a : alive) count += a ? 1 : 0;
  return count;
}

FlowState init_flow(const PointCloud& cloud) {
  if (cloud.points.size() != cloud.normals.size())
    throw ConfigError("init_flow: cloud must carry one reference normal per point");
  FlowState state;
  state.points = cloud.points;
  state.normal = cloud.normals;
  state.curvature.assign(cloud.points.size(), 0.0);
  state.smoothed.assign(cloud.points.size(), 0.0);
  state.alive.assign(cloud.points.size(), 1);
  return state;
}

double min_alive_spacing(const FlowState& state) {
  const AliveView view = alive_view(state);
  if (view.points.size() < 2) return std::numeric_limits<double>::infinity();
  const KdTree tree(view.points);
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(view.points.size()); ++c) {
    const auto nn = tree.knn_of_point(c, 1);
    if (!nn.empty()) best = std::min(best, nn.front().first);
  }
  return best;
}

void smooth_curvature(FlowState& state, const McfConfig& cfg) {
  cfg.validate();
  const AliveView view = alive_view(state);
  if (view.points.empty()) return;
  const KdTree tree(view.points);
  const double radius = 3.0 * cfg.r0;
  const double inv_two_r0sq = 1.0 / (2.0 * cfg.r0 * cfg.r0);
  for (std::size_t c = 0; c < view.points.size(); ++c) {
    const auto ball = tree.radius(view.points[c], radius);
    double wsum = 0.0, hsum = 0.0;
    for (const auto& [dist, j] : ball) {
      const double w = std::exp(-dist * dist * inv_two_r0sq);
      wsum += w;
      hsum += w * state.curvature[static_cast<std::size_t>(view.to_original[static_cast<std::size_t>(j)])];
    }
    state.smoothed[static_cast<std::size_t>(view.to_original[c])] = hsum / wsum;
  }
}

void maintain_density(FlowState& state, const McfConfig& cfg) {
  cfg.validate();
  const AliveView view = alive_view(state);
  if (view.points.size() < 2) return;
  const KdTree tree(view.points);
  std::vector<uint8_t> survive(view.points.size(), 1);
  for (std::size_t c = 0; c < view.points.size(); ++c) {
    const auto ball = tree.radius(view.points[c], cfg.r1);
    for (const auto& [dist, j] : ball) {
      if (static_cast<std::size_t>(j) < c && survive[static_cast<std::size_t>(j)] &&
          dist < cfg.r1) {
        survive[c] = 0;
        state.alive[static_cast<std::size_t>(view.to_original[c])] = 0;
        break;
      }
    }
  }
}

void mcf_step(FlowState& state, const McfConfig& cfg, const PatchEstimator& estimator) {
  cfg.validate();
  const AliveView view = alive_view(state);
  const int n_alive = static_cast<int>(view.points.size());
  if (n_alive < cfg.neighborhood.k + 1)
    throw ConfigError("mcf_step: fewer alive points than the neighborhood size");

  const KdTree tree(view.points);
  int failures = 0;
  std::vector<double> new_h(static_cast<std::size_t>(n_alive));
  std::vector<Eigen::Vector3d> new_eta(static_cast<std::size_t>(n_alive));
  std::vector<uint8_t> ok(static_cast<std::size_t>(n_alive), 0);
  for (int c = 0; c < n_alive; ++c) {
    const int i = view.to_original[static_cast<std::size_t>(c)];
    try {
      const NeighborhoodPatch patch = make_patch(view.points, tree, c, cfg.neighborhood,
                                                 state.normal[static_cast<std::size_t>(i)]);
      int center_pos = -1;
      for (int t = 0; t < patch.input_count(); ++t)
        if (patch.input_indices[static_cast<std::size_t>(t)] == c) {
          center_pos = t;
          break;
        }
      if (center_pos < 0) throw NumericalError("mcf_step: center left its own neighborhood");
      const MongePatch fit = estimator(patch);
      const Eigen::Vector3d& uvw = patch.coords[static_cast<std::size_t>(center_pos)];
      const GeometryEstimate g = extract_geometry(fit, uvw.x(), uvw.y());
      const Eigen::Vector3d eta = g.normal.x() * patch.frame.psi1 +
                                  g.normal.y() * patch.frame.psi2 +
                                  g.normal.z() * patch.frame.psi3;
      if (!std::isfinite(g.mean) || !eta.allFinite())
        throw NumericalError("mcf_step: non-finite estimate");
      new_h[static_cast<std::size_t>(c)] = g.mean;
      new_eta[static_cast<std::size_t>(c)] = eta;
      ok[static_cast<std::size_t>(c)] = 1;
    } catch (const NumericalError&) {
      ++failures;
    }
  }
  if (100 * failures > n_alive)
    throw NumericalError("mcf_step: estimator failed at " + std::to_string(failures) + " of " +
                         std::to_string(n_alive) + " alive points (over 1%)");

  for (int c = 0; c < n_alive; ++c) {
    if (!ok[static_cast<std::size_t>(c)]) continue;  // failed points keep previous values
    const std::size_t i = static_cast<std::size_t>(view.to_original[static_cast<std::size_t>(c)]);
    state.curvature[i] = new_h[static_cast<std::size_t>(c)];
    state.normal[i] = new_eta[static_cast<std::size_t>(c)];
  }

  smooth_curvature(state, cfg);

  for (int c = 0; c < n_alive; ++c) {
    if (!ok[static_cast<std::size_t>(c)]) continue;
    const std::size_t i = static_cast<std::size_t>(view.to_original[static_cast<std::size_t>(c)]);
    state.points[i] += cfg.dt * state.smoothed[i] * state.normal[i];
  }

  // Crowding census on the fresh positions, before thinning: the
  // run-level near-singularity stop signal.
  {
    const AliveView moved = alive_view(state);
    const KdTree moved_tree(moved.points);
    const double d = cfg.effective_stop_distance();
    int crowded = 0;
    for (int c = 0; c < static_cast<int>(moved.points.size()); ++c) {
      const auto nn = moved_tree.knn_of_point(c, 1);
      if (!nn.empty() && nn.front().first < d) ++crowded;
    }
    state.crowded = crowded;
  }

  maintain_density(state, cfg);
  ++state.step;
  state.time += cfg.dt;
}

std::vector<FlowState> run_flow(const PointCloud& initial, const McfConfig& cfg,
                                const PatchEstimator& estimator) {
  cfg.validate();
  FlowState state = init_flow(initial);
  std::vector<FlowState> snapshots;
  snapshots.push_back(state);
  for (int s = 0; s < cfg.steps; ++s) {
    mcf_step(state, cfg, estimator);
    const bool stopping = state.crowded >= cfg.stop_count;
    if (state.step % cfg.snapshot_every == 0 || stopping || s == cfg.steps - 1)
      snapshots.push_back(state);
    if (stopping) break;
  }
  return snapshots;
}

}  // namespace pcgeom
