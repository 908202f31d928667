#include "pcgeom/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "pcgeom/kdtree.hpp"
#include "pcgeom/numeric.hpp"
#include "pcgeom/rng.hpp"

namespace pcgeom {
namespace {

double area_element(const ChartJet& jet) { return jet.du.cross(jet.dv).norm(); }

// Radial chart-0 proposals this close to a pole are rejected outright; the
// true acceptance probability there is O(sin theta) ~ 1e-6 anyway and the
// excluded area is O(1e-12) of the surface.
constexpr double kPoleCut = 1e-6;

bool near_radial_pole(const Shape& shape, double u) {
  if (shape.chart_count() < 2) return false;
  return std::sin(u) < kPoleCut;
}

}  // namespace

PointCloud sample_quasi_uniform(const Shape& shape, int n, std::uint64_t seed, int sweeps) {
  if (n < 100) throw ConfigError("sample_quasi_uniform: n must be >= 100");

  auto dom = shape.chart0_domain();
  Rng rng(seed);

  // Upper bound for the rejection envelope from a scan grid, padded; the area
  // element of these shape families is smooth and well resolved at this
  // resolution.
  const int gu = 192, gv = 192;
  double max_area = 0.0;
  for (int i = 0; i < gu; ++i) {
    double u = dom[0] + (i + 0.5) * (dom[1] - dom[0]) / gu;
    if (near_radial_pole(shape, u)) continue;
    for (int j = 0; j < gv; ++j) {
      double v = dom[2] + (j + 0.5) * (dom[3] - dom[2]) / gv;
      max_area = std::max(max_area, area_element(shape.jet(0, u, v)));
    }
  }
  double envelope = 1.1 * max_area;

  PointCloud cloud;
  cloud.sample_seed = seed;
  cloud.points.reserve(static_cast<std::size_t>(n));
  cloud.normals.reserve(static_cast<std::size_t>(n));
  cloud.chart_coords.reserve(static_cast<std::size_t>(n));
  cloud.chart_ids.reserve(static_cast<std::size_t>(n));

  while (static_cast<int>(cloud.points.size()) < n) {
    double u = rng.uniform(dom[0], dom[1]);
    double v = rng.uniform(dom[2], dom[3]);
    double t = rng.uniform();
    if (near_radial_pole(shape, u)) continue;
    ChartJet jet = shape.jet(0, u, v);
    if (t * envelope > area_element(jet)) continue;

    // Accepted: store coordinates in the canonical (pole-safe) chart.
    int chart = 0;
    shape.normalize_coords(chart, u, v, jet.p);
    if (chart != 0) jet = shape.jet(chart, u, v);
    Eigen::Vector3d normal = jet.du.cross(jet.dv).normalized();
    cloud.points.push_back(jet.p);
    cloud.normals.push_back(normal);
    cloud.chart_coords.push_back({u, v});
    cloud.chart_ids.push_back(chart);
  }

  // Tangent-plane repulsion. Jacobi-style: all displacements are computed
  // against the same snapshot, then applied, so the result is independent of
  // point order.
  const int kNeighbors = 6;
  const double kStep = 0.4;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    KdTree tree(cloud.points);
    std::vector<std::array<double, 2>> new_coords(cloud.points.size());
    std::vector<int> new_charts(cloud.points.size());

    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      auto nn = tree.knn_of_point(static_cast<int>(i), kNeighbors);
      double mean_d = 0.0;
      for (const auto& [d, idx] : nn) mean_d += d;
      mean_d /= static_cast<double>(nn.size());
      double rest = 1.15 * mean_d;

      Eigen::Vector3d push = Eigen::Vector3d::Zero();
      for (const auto& [d, idx] : nn) {
        if (d <= 0.0) continue;  // coincident: no defined direction
        double overlap = rest - d;
        if (overlap <= 0.0) continue;
        push += (cloud.points[i] - cloud.points[static_cast<std::size_t>(idx)]) * (overlap / d);
      }
      push *= kStep;

      int chart = cloud.chart_ids[i];
      double u = cloud.chart_coords[i][0];
      double v = cloud.chart_coords[i][1];
      ChartJet jet = shape.jet(chart, u, v);

      // Project onto the tangent plane, pull back through the chart.
      Eigen::Vector3d nrm = jet.du.cross(jet.dv).normalized();
      Eigen::Vector3d tangential = push - push.dot(nrm) * nrm;
      double E = jet.du.dot(jet.du), F = jet.du.dot(jet.dv), G = jet.dv.dot(jet.dv);
      double det = E * G - F * F;
      double bu = jet.du.dot(tangential), bv = jet.dv.dot(tangential);
      u += (G * bu - F * bv) / det;
      v += (E * bv - F * bu) / det;

      Eigen::Vector3d moved = shape.jet(chart, u, v).p;
      shape.normalize_coords(chart, u, v, moved);
      new_coords[i] = {u, v};
      new_charts[i] = chart;
    }

    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      ChartJet jet = shape.jet(new_charts[i], new_coords[i][0], new_coords[i][1]);
      cloud.points[i] = jet.p;
      cloud.normals[i] = jet.du.cross(jet.dv).normalized();
      cloud.chart_coords[i] = new_coords[i];
      cloud.chart_ids[i] = new_charts[i];
    }
  }
  return cloud;
}

PointCloud add_noise(const PointCloud& input, NoiseMode mode, double sigma,
                     double outlier_fraction, std::uint64_t seed) {
  if (sigma < 0.0) throw ConfigError("add_noise: sigma must be >= 0");
  if (outlier_fraction < 0.0 || outlier_fraction > 1.0)
    throw ConfigError("add_noise: outlier_fraction must be in [0, 1]");
  PointCloud cloud = input;
  Rng rng(seed);
  cloud.noise_seed = seed;
  cloud.noise_sigma = sigma;

  if (mode == NoiseMode::kUniform) {
    cloud.noise_mode = "uniform";
    cloud.outlier_fraction = 0.0;
    for (auto& p : cloud.points)
      p += sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    return cloud;
  }

  cloud.noise_mode = "outliers";
  cloud.outlier_fraction = outlier_fraction;
  std::size_t n = cloud.points.size();
  std::size_t count = static_cast<std::size_t>(std::llround(outlier_fraction * static_cast<double>(n)));
  std::vector<int> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = static_cast<int>(i);
  rng.shuffle(indices);
  indices.resize(count);
  std::sort(indices.begin(), indices.end());

  cloud.outlier_mask.assign(n, 0);
  for (int idx : indices) {
    cloud.outlier_mask[static_cast<std::size_t>(idx)] = 1;
    cloud.points[static_cast<std::size_t>(idx)] +=
        sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
  }
  return cloud;
}

}  // namespace pcgeom
