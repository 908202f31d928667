#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pcgeom/error_metrics.hpp"
#include "pcgeom/estimator.hpp"
#include "pcgeom/gnp_train.hpp"
#include "pcgeom/lb.hpp"
#include "pcgeom/point_cloud.hpp"
#include "pcgeom/shapes.hpp"

namespace pcgeom {

// Progress callback for long runs; receives one line per completed unit.
using ProgressLog = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Shape rosters
// ---------------------------------------------------------------------------

enum class ShapeFamily { kRadial, kToroidal };

ShapeFamily parse_family(const std::string& name);  // "radial" | "toroidal"
std::string family_name(ShapeFamily family);

/**
 * A regenerable shape: the family plus its generator arguments. Radial
 * specs with max_degree 0 realize the exact unit sphere whatever the
 * seed. The name keys clouds (shape_ref), log lines, and output files.
 */
struct ShapeSpec {
  std::string name;
  ShapeFamily family = ShapeFamily::kRadial;
  int max_degree = 0;  // radial only: spherical-harmonic degree cap
  std::uint64_t seed = 0;

  ShapeSpec() = default;
  ShapeSpec(ShapeFamily family, int max_degree, std::uint64_t seed);  // derives the name
};

std::unique_ptr<Shape> realize_shape(const ShapeSpec& spec);

// Degree ladder shared by all rosters: {3, 6, 8, 10, 12, 15, 18, 22}.
const std::vector<int>& roster_degrees();

// Training shapes: shapes_per_degree radial shapes per ladder degree in
// degree-major order, seeds 1000, 1001, ... (default 32 shapes).
std::vector<ShapeSpec> training_roster(int shapes_per_degree = 4);

// Held-out benchmark shapes, disjoint from the training seeds: `count`
// shapes cycling through the ladder degrees (radial, seeds 2000+) or
// toroidal modulation seeds 3000+.
std::vector<ShapeSpec> evaluation_roster(ShapeFamily family, int count = 8);

// ---------------------------------------------------------------------------
// Clouds and benchmark conditions
// ---------------------------------------------------------------------------

/** Noise applied to a sampled cloud; mode is "none", "uniform" or "outliers". */
struct NoiseSpec {
  std::string mode = "none";
  double sigma = 0.0;
  double outlier_fraction = 0.0;

  void validate() const;
  bool noisy() const { return mode != "none"; }
};

/** How to realize one cloud from a shape. */
struct CloudSpec {
  int n_points = 20000;
  NoiseSpec noise;
};

// Deterministic per-shape stream key; every sampling/noise/center draw
// derives from it so distinct shapes never share random streams.
std::uint64_t shape_stream(const ShapeSpec& spec, std::uint64_t base_seed);

// Sample the clean cloud for one roster shape (chart coordinates and
// exact normals included; shape_ref = spec.name).
PointCloud sample_cloud(const Shape& shape, const ShapeSpec& spec, int n_points,
                        std::uint64_t base_seed);

// Apply a noise spec to a clean cloud ("none" returns it unchanged); the
// displacement stream is keyed by (shape, noise parameters).
PointCloud apply_noise(const PointCloud& clean, const NoiseSpec& noise, const ShapeSpec& spec,
                       std::uint64_t base_seed);

PointCloud build_cloud(const Shape& shape, const ShapeSpec& spec, const CloudSpec& cloud,
                       std::uint64_t base_seed);

/** One benchmark row condition: a noise setting plus the neighborhood size. */
struct BenchmarkCondition {
  NoiseSpec noise;
  int k = 30;
};

// The four canonical conditions: clean k=30, clean k=50, 10% outliers
// sigma 5e-3 k=50, uniform sigma 1e-3 k=70.
std::vector<BenchmarkCondition> benchmark_conditions();

// ---------------------------------------------------------------------------
// Estimator evaluation
// ---------------------------------------------------------------------------

struct EvalConfig {
  NeighborhoodConfig neighborhood;
  int patches = 256;       // evaluation patch centers per cloud
  std::uint64_t seed = 0;  // center draw and network neighbor subsets
};

/**
 * Mean per-quantity errors of the estimator against exact geometry over
 * seeded random patch centers: each patch is fitted once and scored at
 * every valid target (outliers are excluded from scoring but not from
 * fitting). Centers that fail to build, fit, or score are skipped; more
 * than 20% skips raises NumericalError.
 */
QuantityErrors evaluate_estimator(const Shape& shape, const PointCloud& cloud,
                                  const PatchEstimator& estimator, const EvalConfig& config);

/** Per-point geometry read out over a whole cloud. */
struct CloudEstimates {
  std::vector<Eigen::Vector3d> normal;
  std::vector<double> gauss;
  std::vector<double> mean;
  std::vector<std::uint8_t> ok;  // 0 where the local fit failed

  int size() const { return static_cast<int>(gauss.size()); }
};

// Fit a patch at every point (oriented by the cloud's reference normals)
// and evaluate the geometry at the point itself; normals come back in
// ambient components. Failed points keep zero entries with ok = 0.
CloudEstimates estimate_cloud(const PointCloud& cloud, const PatchEstimator& estimator,
                              const NeighborhoodConfig& config);

// ---------------------------------------------------------------------------
// Training runs
// ---------------------------------------------------------------------------

struct TrainingPlan {
  GnpConfig architecture;
  TrainConfig optimizer;            // epochs = passes over the full roster
  NeighborhoodConfig neighborhood;  // the k the model is trained for
  CloudSpec cloud;                  // points per shape + the artifacts to learn
  int shapes_per_degree = 4;        // 32 training shapes by default
  int patches_per_shape = 512;      // fresh centers every epoch
  std::uint64_t data_seed = 0;      // cloud sampling + center draws

  void validate() const;
};

struct TrainingRun {
  GnpModel model;
  std::vector<LossBreakdown> history;  // one entry per optimizer step
  long skipped_samples = 0;            // patches dropped by build failures
};

/**
 * Trains a fresh model on the training roster: every epoch visits each
 * shape once and takes one optimizer pass over patches_per_shape freshly
 * drawn centers (Adam, batches of optimizer.batch). Initialization is
 * seeded from optimizer.seed; the trainer checkpoints after every epoch,
 * so a non-finite loss restores the last epoch's state before rethrowing.
 */
TrainingRun train_geometry_model(const TrainingPlan& plan, const ProgressLog& log = {});

// ---------------------------------------------------------------------------
// Benchmark tables
// ---------------------------------------------------------------------------

// Default benchmark roster: 8 radial then 8 toroidal evaluation shapes.
std::vector<ShapeSpec> default_benchmark_roster(int shapes_per_family = 8);

/**
 * Estimator-accuracy benchmark. Rows cover every configured condition x
 * estimator x family, averaging per-patch errors over each family's
 * shapes. GNP rows (include_gnp) draw the model trained for the row's
 * noise mode from `models`; clean rows use the "none" model at both k.
 */
struct Table1Config {
  CloudSpec cloud;  // noise field ignored; conditions supply it
  std::vector<BenchmarkCondition> conditions = benchmark_conditions();
  std::vector<ShapeSpec> roster = default_benchmark_roster();
  int patches_per_shape = 256;
  NeighborhoodConfig neighborhood;  // k overridden per condition
  bool include_gnp = false;
  std::map<std::string, GnpModel> models;  // keyed by noise mode
  std::uint64_t seed = 0;
};

ErrorTable run_table1(const Table1Config& config, const ProgressLog& log = {});

/**
 * Solver-accuracy benchmark: manufactured-solution relative errors, one
 * row per condition x estimator, one column per shape class, each cell
 * the mean over rhs_samples manufactured fields solved on one assembled
 * system. Noisy conditions require the network-based outlier filter
 * (filter = true plus the matching model) for both estimators; without
 * it the plain collocation solve is not viable and the run refuses.
 */
struct Table2Config {
  int n_points = 20000;
  int rhs_samples = 10;
  LbConfig lb;  // neighborhood.k overridden per condition
  std::vector<BenchmarkCondition> conditions = benchmark_conditions();
  std::vector<std::string> classes = {"sphere", "radial", "toroidal"};
  bool include_gnp = false;
  std::map<std::string, GnpModel> models;  // row estimators + the noise filter
  bool filter = false;
  double filter_alpha = 0.1;
  std::uint64_t seed = 0;
};

PdeErrorTable run_table2(const Table2Config& config, const ProgressLog& log = {});

// The canonical shape behind a solver-benchmark class name
// ("sphere", "radial", "toroidal").
ShapeSpec table2_class_spec(const std::string& shape_class);

// Manufactured verification fields: seeded blends of the solid harmonics
// on the sphere control, calibrated random plane-wave fields elsewhere.
AmbientField manufactured_field(const std::string& shape_class, std::uint64_t sample);

}  // namespace pcgeom
