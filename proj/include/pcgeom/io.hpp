#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pcgeom/error_metrics.hpp"
#include "pcgeom/mcf.hpp"
#include "pcgeom/numeric.hpp"
#include "pcgeom/point_cloud.hpp"
#include "pcgeom/shapes.hpp"

namespace pcgeom {

/**
 * Malformed input file: carries the path and 1-based line number of the
 * first offending record. Derives from ConfigError so command-line
 * handling maps it to the configuration exit code.
 */
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& path, long line, const std::string& message);
  long line() const { return line_; }

 private:
  long line_ = 0;
};

/**
 * Point clouds travel in two formats. ASCII PLY (x y z nx ny nz
 * outlier_flag) is the interchange format; provenance fields ride along
 * as comment lines but per-point chart coordinates do not. CSV is the
 * full-fidelity format: every column of the cloud with 17 significant
 * digits, so write -> read -> write is byte-identical and doubles
 * round-trip exactly.
 */
void write_cloud_ply(const std::string& path, const PointCloud& cloud);
PointCloud read_cloud_ply(const std::string& path);

void write_cloud_csv(const std::string& path, const PointCloud& cloud);
PointCloud read_cloud_csv(const std::string& path);

// Shapes serialize as JSON: a type tag plus the generating parameters
// (radial: seed and complex coefficients; toroidal: radii, modulation
// amplitudes and integer frequencies). Loading a radial shape rebuilds
// its per-chart real coefficient tables.
void write_shape_json(const std::string& path, const Shape& shape);
std::unique_ptr<Shape> read_shape_json(const std::string& path);

// Error tables as CSV (header model,noise,k,family,normal,
// metric_inverse,shape,gaussian,mean) and as JSON with the same keys.
void write_error_table_csv(const std::string& path, const ErrorTable& table);
ErrorTable read_error_table_csv(const std::string& path);
void write_error_table_json(const std::string& path, const ErrorTable& table);

// Sparse systems exported as Matrix Market coordinate files (1-based
// indices, row-major entry order, general symmetry class).
void write_matrix_mtx(const std::string& path,
                      const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix);
Eigen::SparseMatrix<double, Eigen::RowMajor> read_matrix_mtx(const std::string& path);

// Single-column CSV with a named header; doubles at 17 significant digits.
void write_vector_csv(const std::string& path, const std::string& name,
                      const Eigen::VectorXd& values);
Eigen::VectorXd read_vector_csv(const std::string& path);

/**
 * Writes a flow trajectory under dir: one PLY per snapshot
 * (step_0000.ply, alive points with their current normals) plus
 * trajectory.json listing per-snapshot step, time, alive count, minimum
 * alive spacing, and mean |H| over alive points. Returns the files
 * written (relative names), manifest first.
 */
std::vector<std::string> write_trajectory(const std::string& dir,
                                          const std::vector<FlowState>& snapshots);

// manifest.json under dir: a sorted file -> kind index of run outputs.
void write_manifest(const std::string& dir,
                    const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace pcgeom
