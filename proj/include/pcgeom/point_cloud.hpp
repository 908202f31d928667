#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pcgeom {

/**
 * Sampled surface points plus the provenance needed to recover exact truth:
 * reference outward normals and the generating chart coordinates of each
 * point. Noise displaces positions only; chart coordinates and normals keep
 * describing the clean pre-noise surface point, which is what evaluation
 * against analytic truth needs.
 */
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;
  std::vector<std::array<double, 2>> chart_coords;  // empty when unknown
  std::vector<int> chart_ids;                       // parallel to chart_coords
  std::vector<std::uint8_t> outlier_mask;           // empty until outlier noise is added

  std::string shape_ref;  // provenance: shape id/path
  std::uint64_t sample_seed = 0;
  std::string noise_mode = "none";  // none | uniform | outliers
  double noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  std::uint64_t noise_seed = 0;

  std::size_t size() const { return points.size(); }
  bool is_outlier(std::size_t i) const {
    return !outlier_mask.empty() && outlier_mask[i] != 0;
  }
};

}  // namespace pcgeom
