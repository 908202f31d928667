#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcgeom/monge.hpp"
#include "pcgeom/numeric.hpp"
#include "pcgeom/patch.hpp"
#include "pcgeom/point_cloud.hpp"
#include "pcgeom/shapes.hpp"

namespace pcgeom {

/**
 * Reference geometry for every target point of one patch, expressed in
 * the patch frame. Coordinates (u, v, w) describe the clean pre-noise
 * surface point in rescaled frame units, so noisy runs are scored
 * against the underlying surface. valid marks targets that count
 * toward losses and error tables (outliers are excluded).
 */
struct PatchTruthSet {
  std::vector<double> u, v, w;
  std::vector<Eigen::Vector3d> normal;
  std::vector<Eigen::Matrix2d> first_inv;
  std::vector<Eigen::Matrix2d> second;
  std::vector<double> gauss;
  std::vector<double> mean;
  std::vector<uint8_t> valid;

  int size() const { return static_cast<int>(u.size()); }
  int valid_count() const;
};

// Evaluate exact geometry at each target's stored chart coordinates and
// map it into the patch frame.
PatchTruthSet patch_truth(const Shape& shape, const PointCloud& cloud,
                          const NeighborhoodPatch& patch);

// Relative difference ‖pred − ref‖₂ / (‖ref‖₂ + 1e−30) over stacked entries.
double relative_l2(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref);

/**
 * One row of per-quantity errors. normal is the mean angular defect
 * 1 − η̂·η; the rest are stacked relative L2 differences over the valid
 * targets of a patch (or Kahan means of those, after aggregation).
 * shape scores the reconstructed height against the clean height.
 */
struct QuantityErrors {
  double normal = 0.0;
  double metric_inverse = 0.0;
  double shape = 0.0;
  double gaussian = 0.0;
  double mean = 0.0;
};

// Per-patch errors. estimates[t] must be evaluated at the truth's clean
// (u_t, v_t). Throws on length mismatch or zero valid targets.
QuantityErrors patch_errors(const std::vector<GeometryEstimate>& estimates,
                            const PatchTruthSet& truth);

// Order-stable running mean of QuantityErrors rows (compensated sums).
class ErrorAccumulator {
 public:
  void add(const QuantityErrors& e);
  QuantityErrors mean() const;
  long count() const { return n_; }

 private:
  KahanSum normal_, metric_inverse_, shape_, gaussian_, mean_;
  long n_ = 0;
};

struct ErrorTableRow {
  std::string model;   // "gmls" or "gnp"
  std::string noise;   // "none", "uniform", "outliers"
  int k = 0;
  std::string family;  // "radial" or "toroidal"
  QuantityErrors err;
};

struct ErrorTable {
  std::vector<ErrorTableRow> rows;
};

/**
 * Manufactured-solution solver benchmark: one row per estimator
 * configuration, one relative-error column per shape class. errors is
 * parallel to the owning table's classes.
 */
struct PdeErrorRow {
  std::string model;  // "gmls" or "gnp"
  std::string noise;  // "none", "uniform", "outliers"
  int k = 0;
  std::vector<double> errors;
};

struct PdeErrorTable {
  std::vector<std::string> classes;  // column names, e.g. "toroidal"
  std::vector<PdeErrorRow> rows;
};

}  // namespace pcgeom
