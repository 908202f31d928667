#include "pcgeom/pipeline.hpp"

#include <bit>
#include <cinttypes>
#include <cstdarg>
#include <cstdio>
#include <utility>

#include "pcgeom/kdtree.hpp"
#include "pcgeom/numeric.hpp"
#include "pcgeom/rng.hpp"
#include "pcgeom/sampling.hpp"

namespace pcgeom {

namespace {

// Stream salts; arbitrary distinct constants.
constexpr std::uint64_t kSampleSalt = 0x73616d70ULL;
constexpr std::uint64_t kNoiseSalt = 0x6e6f6973ULL;
constexpr std::uint64_t kCenterSalt = 0x63747273ULL;
constexpr std::uint64_t kEvalSalt = 0x6576616cULL;
constexpr std::uint64_t kInitSalt = 0x696e6974ULL;
constexpr std::uint64_t kNetworkSalt = 0x676e7073ULL;
constexpr std::uint64_t kFilterSalt = 0x66696c74ULL;
constexpr std::uint64_t kFieldSalt = 0x6669656cULL;
constexpr std::uint64_t kBlendSalt = 0x626c6e64ULL;

std::string format_name(const char* fmt, ...) {
  char buf[128];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

void emit(const ProgressLog& log, const std::string& line) {
  if (log) log(line);
}

}  // namespace

// ---------------------------------------------------------------------------
// Shape rosters
// ---------------------------------------------------------------------------

ShapeFamily parse_family(const std::string& name) {
  if (name == "radial") return ShapeFamily::kRadial;
  if (name == "toroidal") return ShapeFamily::kToroidal;
  throw ConfigError("unknown shape family '" + name + "' (expected radial or toroidal)");
}

std::string family_name(ShapeFamily family) {
  return family == ShapeFamily::kRadial ? "radial" : "toroidal";
}

ShapeSpec::ShapeSpec(ShapeFamily family_in, int max_degree_in, std::uint64_t seed_in)
    : family(family_in), max_degree(max_degree_in), seed(seed_in) {
  if (family == ShapeFamily::kRadial && max_degree == 0)
    name = "sphere";
  else if (family == ShapeFamily::kRadial)
    name = format_name("radial-d%02d-s%" PRIu64, max_degree, seed);
  else
    name = format_name("toroidal-s%" PRIu64, seed);
}

std::unique_ptr<Shape> realize_shape(const ShapeSpec& spec) {
  if (spec.family == ShapeFamily::kRadial)
    return std::make_unique<RadialShape>(generate_radial_shape(spec.max_degree, spec.seed));
  return std::make_unique<ToroidalShape>(generate_toroidal_shape(spec.seed));
}

const std::vector<int>& roster_degrees() {
  static const std::vector<int> degrees = {3, 6, 8, 10, 12, 15, 18, 22};
  return degrees;
}

std::vector<ShapeSpec> training_roster(int shapes_per_degree) {
  if (shapes_per_degree < 1)
    throw ConfigError("training roster: shapes_per_degree must be >= 1");
  std::vector<ShapeSpec> roster;
  std::uint64_t seed = 1000;
  for (int degree : roster_degrees())
    for (int i = 0; i < shapes_per_degree; ++i)
      roster.emplace_back(ShapeFamily::kRadial, degree, seed++);
  return roster;
}

std::vector<ShapeSpec> evaluation_roster(ShapeFamily family, int count) {
  if (count < 1) throw ConfigError("evaluation roster: count must be >= 1");
  const std::vector<int>& degrees = roster_degrees();
  std::vector<ShapeSpec> roster;
  for (int j = 0; j < count; ++j) {
    if (family == ShapeFamily::kRadial)
      roster.emplace_back(family, degrees[static_cast<std::size_t>(j) % degrees.size()],
                          2000 + static_cast<std::uint64_t>(j));
    else
      roster.emplace_back(family, 0, 3000 + static_cast<std::uint64_t>(j));
  }
  return roster;
}

// ---------------------------------------------------------------------------
// Clouds and benchmark conditions
// ---------------------------------------------------------------------------

void NoiseSpec::validate() const {
  if (mode != "none" && mode != "uniform" && mode != "outliers")
    throw ConfigError("noise mode must be none, uniform, or outliers (got '" + mode + "')");
  if (!std::isfinite(sigma) || sigma < 0.0) throw ConfigError("noise sigma must be finite and >= 0");
  if (!std::isfinite(outlier_fraction) || outlier_fraction < 0.0 || outlier_fraction > 1.0)
    throw ConfigError("outlier fraction must lie in [0, 1]");
  if (mode == "none" && (sigma != 0.0 || outlier_fraction != 0.0))
    throw ConfigError("noise mode none takes no sigma or outlier fraction");
  if (mode != "none" && sigma <= 0.0)
    throw ConfigError("noise mode " + mode + " needs sigma > 0");
  if (mode == "outliers" && outlier_fraction == 0.0)
    throw ConfigError("outlier mode needs a positive outlier fraction");
  if (mode == "uniform" && outlier_fraction != 0.0)
    throw ConfigError("uniform mode takes no outlier fraction");
}

std::uint64_t shape_stream(const ShapeSpec& spec, std::uint64_t base_seed) {
  const std::uint64_t family_tag =
      (static_cast<std::uint64_t>(spec.family) << 32) | static_cast<std::uint32_t>(spec.max_degree);
  return mix64(base_seed, mix64(family_tag, spec.seed));
}

PointCloud sample_cloud(const Shape& shape, const ShapeSpec& spec, int n_points,
                        std::uint64_t base_seed) {
  PointCloud cloud =
      sample_quasi_uniform(shape, n_points, mix64(shape_stream(spec, base_seed), kSampleSalt));
  cloud.shape_ref = spec.name;
  return cloud;
}

PointCloud apply_noise(const PointCloud& clean, const NoiseSpec& noise, const ShapeSpec& spec,
                       std::uint64_t base_seed) {
  noise.validate();
  if (!noise.noisy()) return clean;
  const std::uint64_t params =
      mix64(std::bit_cast<std::uint64_t>(noise.sigma), std::bit_cast<std::uint64_t>(noise.outlier_fraction));
  const std::uint64_t seed =
      mix64(mix64(shape_stream(spec, base_seed), kNoiseSalt), mix64(noise.mode == "uniform" ? 1 : 2, params));
  if (noise.mode == "uniform") return add_noise(clean, NoiseMode::kUniform, noise.sigma, 0.0, seed);
  return add_noise(clean, NoiseMode::kOutliers, noise.sigma, noise.outlier_fraction, seed);
}

PointCloud build_cloud(const Shape& shape, const ShapeSpec& spec, const CloudSpec& cloud,
                       std::uint64_t base_seed) {
  return apply_noise(sample_cloud(shape, spec, cloud.n_points, base_seed), cloud.noise, spec,
                     base_seed);
}

std::vector<BenchmarkCondition> benchmark_conditions() {
  std::vector<BenchmarkCondition> conditions(4);
  conditions[0].k = 30;
  conditions[1].k = 50;
  conditions[2].noise = {"outliers", 5e-3, 0.10};
  conditions[2].k = 50;
  conditions[3].noise = {"uniform", 1e-3, 0.0};
  conditions[3].k = 70;
  return conditions;
}

// ---------------------------------------------------------------------------
// Estimator evaluation
// ---------------------------------------------------------------------------

QuantityErrors evaluate_estimator(const Shape& shape, const PointCloud& cloud,
                                  const PatchEstimator& estimator, const EvalConfig& config) {
  config.neighborhood.validate();
  if (config.patches < 1) throw ConfigError("evaluation needs at least one patch");
  if (!estimator) throw ConfigError("evaluation needs an estimator");
  const int n = static_cast<int>(cloud.size());
  if (n <= config.neighborhood.k)
    throw ConfigError("evaluation cloud must have more points than the neighborhood");
  if (cloud.chart_coords.size() != cloud.points.size())
    throw ConfigError("evaluation cloud lacks generating chart coordinates");
  if (cloud.normals.size() != cloud.points.size())
    throw ConfigError("evaluation cloud lacks reference normals");

  const KdTree tree(cloud.points);
  Rng rng(mix64(config.seed, kEvalSalt));
  ErrorAccumulator acc;
  int skipped = 0;
  for (int p = 0; p < config.patches; ++p) {
    const int center = static_cast<int>(rng.uniform_int(0, n - 1));
    try {
      const NeighborhoodPatch patch =
          make_patch(cloud.points, tree, center, config.neighborhood,
                     cloud.normals[static_cast<std::size_t>(center)]);
      const PatchTruthSet truth = patch_truth(shape, cloud, patch);
      if (truth.valid_count() == 0) {
        ++skipped;
        continue;
      }
      const MongePatch fit = estimator(patch);
      std::vector<GeometryEstimate> estimates;
      estimates.reserve(static_cast<std::size_t>(truth.size()));
      for (int t = 0; t < truth.size(); ++t)
        estimates.push_back(extract_geometry(fit, truth.u[static_cast<std::size_t>(t)],
                                             truth.v[static_cast<std::size_t>(t)]));
      acc.add(patch_errors(estimates, truth));
    } catch (const NumericalError&) {
      ++skipped;
    }
  }
  if (acc.count() == 0 || skipped * 5 > config.patches)
    throw NumericalError("evaluation failed on " + std::to_string(skipped) + " of " +
                         std::to_string(config.patches) + " patches");
  return acc.mean();
}

CloudEstimates estimate_cloud(const PointCloud& cloud, const PatchEstimator& estimator,
                              const NeighborhoodConfig& config) {
  config.validate();
  if (!estimator) throw ConfigError("cloud estimation needs an estimator");
  const int n = static_cast<int>(cloud.size());
  if (n <= config.k)
    throw ConfigError("cloud estimation needs more points than the neighborhood");
  if (cloud.normals.size() != cloud.points.size())
    throw ConfigError("cloud estimation needs reference normals");

  const KdTree tree(cloud.points);
  CloudEstimates out;
  out.normal.assign(static_cast<std::size_t>(n), Eigen::Vector3d::Zero());
  out.gauss.assign(static_cast<std::size_t>(n), 0.0);
  out.mean.assign(static_cast<std::size_t>(n), 0.0);
  out.ok.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    try {
      const NeighborhoodPatch patch =
          make_patch(cloud.points, tree, i, config, cloud.normals[si]);
      const MongePatch fit = estimator(patch);
      int at = -1;
      for (int t = 0; t < patch.input_count(); ++t)
        if (patch.input_indices[static_cast<std::size_t>(t)] == i) at = t;
      if (at < 0) throw NumericalError("cloud estimation: patch lost its center");
      const Eigen::Vector3d cc = patch.coords[static_cast<std::size_t>(at)];
      const GeometryEstimate g = extract_geometry(fit, cc.x(), cc.y());
      out.normal[si] = g.normal.x() * patch.frame.psi1 + g.normal.y() * patch.frame.psi2 +
                       g.normal.z() * patch.frame.psi3;
      out.gauss[si] = g.gauss;
      out.mean[si] = g.mean;
      out.ok[si] = 1;
    } catch (const NumericalError&) {
      // entries stay zero with ok = 0
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training runs
// ---------------------------------------------------------------------------

void TrainingPlan::validate() const {
  architecture.validate();
  optimizer.validate();
  neighborhood.validate();
  cloud.noise.validate();
  if (cloud.n_points < 100) throw ConfigError("training clouds need at least 100 points");
  if (shapes_per_degree < 1) throw ConfigError("training needs at least one shape per degree");
  if (patches_per_shape < 1) throw ConfigError("training needs at least one patch per shape");
}

TrainingRun train_geometry_model(const TrainingPlan& plan, const ProgressLog& log) {
  plan.validate();
  const std::vector<ShapeSpec> roster = training_roster(plan.shapes_per_degree);

  struct TrainShape {
    ShapeSpec spec;
    std::unique_ptr<Shape> shape;
    PointCloud cloud;
    std::unique_ptr<KdTree> tree;
  };
  std::vector<TrainShape> shapes;
  shapes.reserve(roster.size());
  for (std::size_t s = 0; s < roster.size(); ++s) {
    TrainShape ts;
    ts.spec = roster[s];
    ts.shape = realize_shape(ts.spec);
    ts.cloud = build_cloud(*ts.shape, ts.spec, plan.cloud, plan.data_seed);
    ts.tree = std::make_unique<KdTree>(ts.cloud.points);
    emit(log, format_name("dataset: %s ready (%zu/%zu)", ts.spec.name.c_str(), s + 1,
                          roster.size()));
    shapes.push_back(std::move(ts));
  }

  GnpModel model = init_gnp(plan.architecture, mix64(plan.optimizer.seed, kInitSalt));
  GnpTrainer trainer(model, plan.optimizer);
  TrainingRun run;

  for (int epoch = 0; epoch < plan.optimizer.epochs; ++epoch) {
    for (std::size_t s = 0; s < shapes.size(); ++s) {
      const TrainShape& ts = shapes[s];
      const int n = static_cast<int>(ts.cloud.size());
      Rng centers(mix64(mix64(shape_stream(ts.spec, plan.data_seed), kCenterSalt),
                        static_cast<std::uint64_t>(epoch)));
      std::vector<TrainSample> samples;
      samples.reserve(static_cast<std::size_t>(plan.patches_per_shape));
      for (int j = 0; j < plan.patches_per_shape; ++j) {
        const int center = static_cast<int>(centers.uniform_int(0, n - 1));
        try {
          TrainSample sample;
          sample.patch = make_patch(ts.cloud.points, *ts.tree, center, plan.neighborhood,
                                    ts.cloud.normals[static_cast<std::size_t>(center)]);
          sample.truth = patch_truth(*ts.shape, ts.cloud, sample.patch);
          if (sample.truth.valid_count() == 0) {
            ++run.skipped_samples;
            continue;
          }
          samples.push_back(std::move(sample));
        } catch (const NumericalError&) {
          ++run.skipped_samples;
        }
      }
      if (samples.empty())
        throw NumericalError("training: no usable patches on " + ts.spec.name);

      const std::size_t before = trainer.history().size();
      trainer.run_epoch(samples);
      KahanSum loss;
      for (std::size_t h = before; h < trainer.history().size(); ++h)
        loss.add(trainer.history()[h].total);
      const double steps = static_cast<double>(trainer.history().size() - before);
      emit(log, format_name("train: epoch %d/%d %s loss %.6g", epoch + 1, plan.optimizer.epochs,
                            ts.spec.name.c_str(), steps > 0 ? loss.value() / steps : 0.0));
    }
    trainer.checkpoint();
    if (!plan.optimizer.checkpoint_dir.empty())
      save_weights_file(trainer.model(), plan.optimizer.checkpoint_dir +
                                             format_name("/epoch_%03d.gnpw", epoch + 1));
  }

  run.model = trainer.model();
  run.history = trainer.history();
  return run;
}

// ---------------------------------------------------------------------------
// Benchmark tables
// ---------------------------------------------------------------------------

std::vector<ShapeSpec> default_benchmark_roster(int shapes_per_family) {
  std::vector<ShapeSpec> roster = evaluation_roster(ShapeFamily::kRadial, shapes_per_family);
  std::vector<ShapeSpec> torus = evaluation_roster(ShapeFamily::kToroidal, shapes_per_family);
  roster.insert(roster.end(), torus.begin(), torus.end());
  return roster;
}

namespace {

// Shared guard: every condition a network row (or filter) will touch
// needs a trained model for its noise mode.
const GnpModel& model_for_mode(const std::map<std::string, GnpModel>& models,
                               const std::string& mode, const std::string& why) {
  auto it = models.find(mode);
  if (it == models.end())
    throw ConfigError("missing weights: " + why + " needs a model trained for noise mode '" +
                      mode + "'");
  return it->second;
}

}  // namespace

ErrorTable run_table1(const Table1Config& config, const ProgressLog& log) {
  if (config.roster.empty())
    throw ConfigError("estimator benchmark requires at least one test shape");
  if (config.conditions.empty())
    throw ConfigError("estimator benchmark requires at least one condition");
  if (config.cloud.n_points < 100)
    throw ConfigError("estimator benchmark clouds need at least 100 points");
  if (config.patches_per_shape < 1)
    throw ConfigError("estimator benchmark needs at least one patch per shape");
  for (const BenchmarkCondition& cond : config.conditions) {
    cond.noise.validate();
    NeighborhoodConfig probe = config.neighborhood;
    probe.k = cond.k;
    probe.validate();
    if (config.include_gnp)
      (void)model_for_mode(config.models, cond.noise.mode, "the network estimator");
  }

  const int model_count = config.include_gnp ? 2 : 1;
  const std::size_t cells = config.conditions.size() * static_cast<std::size_t>(model_count) * 2;
  std::vector<ErrorAccumulator> accs(cells);
  const auto cell_index = [&](std::size_t ci, int model, ShapeFamily family) {
    return (ci * static_cast<std::size_t>(model_count) + static_cast<std::size_t>(model)) * 2 +
           (family == ShapeFamily::kRadial ? 0 : 1);
  };

  for (const ShapeSpec& spec : config.roster) {
    const std::unique_ptr<Shape> shape = realize_shape(spec);
    const PointCloud clean = sample_cloud(*shape, spec, config.cloud.n_points, config.seed);
    for (std::size_t ci = 0; ci < config.conditions.size(); ++ci) {
      const BenchmarkCondition& cond = config.conditions[ci];
      const PointCloud cloud = apply_noise(clean, cond.noise, spec, config.seed);
      for (int model = 0; model < model_count; ++model) {
        const PatchEstimator estimator =
            model == 0 ? make_gmls_estimator()
                       : make_gnp_estimator(model_for_mode(config.models, cond.noise.mode,
                                                           "the network estimator"),
                                            mix64(config.seed, kNetworkSalt));
        EvalConfig eval;
        eval.neighborhood = config.neighborhood;
        eval.neighborhood.k = cond.k;
        eval.patches = config.patches_per_shape;
        eval.seed = mix64(shape_stream(spec, config.seed),
                          mix64(static_cast<std::uint64_t>(ci), kEvalSalt));
        const QuantityErrors errs = evaluate_estimator(*shape, cloud, estimator, eval);
        accs[cell_index(ci, model, spec.family)].add(errs);
        emit(log, format_name("table1: %s %s k=%d %s gaussian %.3e", spec.name.c_str(),
                              cond.noise.mode.c_str(), cond.k, model == 0 ? "gmls" : "gnp",
                              errs.gaussian));
      }
    }
  }

  ErrorTable table;
  for (std::size_t ci = 0; ci < config.conditions.size(); ++ci) {
    const BenchmarkCondition& cond = config.conditions[ci];
    for (int model = 0; model < model_count; ++model) {
      for (ShapeFamily family : {ShapeFamily::kRadial, ShapeFamily::kToroidal}) {
        const ErrorAccumulator& acc = accs[cell_index(ci, model, family)];
        if (acc.count() == 0) continue;  // the roster has no shapes of this family
        ErrorTableRow row;
        row.model = model == 0 ? "gmls" : "gnp";
        row.noise = cond.noise.mode;
        row.k = cond.k;
        row.family = family_name(family);
        row.err = acc.mean();
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

ShapeSpec table2_class_spec(const std::string& shape_class) {
  if (shape_class == "sphere") return ShapeSpec(ShapeFamily::kRadial, 0, 0);
  if (shape_class == "radial") return ShapeSpec(ShapeFamily::kRadial, 10, 21);
  if (shape_class == "toroidal") return ShapeSpec(ShapeFamily::kToroidal, 0, 1);
  throw ConfigError("unknown solver benchmark class '" + shape_class +
                    "' (expected sphere, radial, or toroidal)");
}

AmbientField manufactured_field(const std::string& shape_class, std::uint64_t sample) {
  if (shape_class == "sphere") {
    // A seeded blend of the eight degree-1/2 solid harmonics: still an
    // exact eigenfunction mixture, so the control solve has no field
    // roughness to fight.
    struct Blend {
      std::vector<std::pair<double, AmbientField>> parts;
    };
    auto blend = std::make_shared<Blend>();
    Rng rng(mix64(sample, kBlendSalt));
    for (int l = 1; l <= 2; ++l)
      for (int m = -l; m <= l; ++m)
        blend->parts.emplace_back(rng.normal(), solid_harmonic_field(l, m));
    AmbientField field;
    field.value = [blend](const Eigen::Vector3d& p) {
      double s = 0.0;
      for (const auto& [w, f] : blend->parts) s += w * f.value(p);
      return s;
    };
    field.gradient = [blend](const Eigen::Vector3d& p) {
      Eigen::Vector3d g = Eigen::Vector3d::Zero();
      for (const auto& [w, f] : blend->parts) g += w * f.gradient(p);
      return g;
    };
    field.hessian = [blend](const Eigen::Vector3d& p) {
      Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
      for (const auto& [w, f] : blend->parts) h += w * f.hessian(p);
      return h;
    };
    return field;
  }
  (void)table2_class_spec(shape_class);  // validates the class name
  const std::uint64_t tag = shape_class == "radial" ? 1 : 2;
  return random_trig_field(mix64(mix64(sample, kFieldSalt), tag), 8, 4);
}

PdeErrorTable run_table2(const Table2Config& config, const ProgressLog& log) {
  if (config.classes.empty())
    throw ConfigError("solver benchmark requires at least one shape class");
  if (config.conditions.empty())
    throw ConfigError("solver benchmark requires at least one condition");
  if (config.rhs_samples < 1)
    throw ConfigError("solver benchmark needs at least one manufactured field");
  if (config.n_points < 100)
    throw ConfigError("solver benchmark clouds need at least 100 points");
  if (!(config.filter_alpha > 0.0))
    throw ConfigError("solver benchmark filter threshold must be positive");
  for (const std::string& cls : config.classes) (void)table2_class_spec(cls);
  for (const BenchmarkCondition& cond : config.conditions) {
    cond.noise.validate();
    LbConfig probe = config.lb;
    probe.neighborhood.k = cond.k;
    probe.validate();
    if (cond.noise.noisy()) {
      if (!config.filter)
        throw ConfigError(
            "solver benchmark: condition '" + cond.noise.mode +
            "' is contaminated and plain collocation does not produce viable solutions there; "
            "enable the outlier filter (and provide weights trained for that mode)");
      (void)model_for_mode(config.models, cond.noise.mode, "the outlier filter");
    }
    if (config.include_gnp)
      (void)model_for_mode(config.models, cond.noise.mode, "the network estimator");
  }

  const int model_count = config.include_gnp ? 2 : 1;
  std::vector<std::vector<double>> cells(
      config.conditions.size() * static_cast<std::size_t>(model_count),
      std::vector<double>(config.classes.size(), 0.0));

  for (std::size_t cls_i = 0; cls_i < config.classes.size(); ++cls_i) {
    const std::string& cls = config.classes[cls_i];
    const ShapeSpec spec = table2_class_spec(cls);
    const std::unique_ptr<Shape> shape = realize_shape(spec);
    const PointCloud clean = sample_cloud(*shape, spec, config.n_points, config.seed);

    for (std::size_t ci = 0; ci < config.conditions.size(); ++ci) {
      const BenchmarkCondition& cond = config.conditions[ci];
      PointCloud cloud = apply_noise(clean, cond.noise, spec, config.seed);
      if (cond.noise.noisy()) {
        const PatchEstimator filter_estimator =
            make_gnp_estimator(model_for_mode(config.models, cond.noise.mode, "the outlier filter"),
                               mix64(config.seed, kFilterSalt));
        NeighborhoodConfig filter_cfg = config.lb.neighborhood;
        filter_cfg.k = cond.k;
        FilterResult filtered = gnp_filter(cloud, filter_estimator, filter_cfg, config.filter_alpha);
        emit(log, format_name("table2: %s %s k=%d filter removed %zu of %zu", cls.c_str(),
                              cond.noise.mode.c_str(), cond.k, filtered.removed.size(),
                              static_cast<std::size_t>(cloud.size())));
        cloud = std::move(filtered.cloud);
      }

      for (int model = 0; model < model_count; ++model) {
        LbConfig lb = config.lb;
        lb.neighborhood.k = cond.k;
        const PatchEstimator estimator =
            model == 0 ? make_gmls_estimator()
                       : make_gnp_estimator(model_for_mode(config.models, cond.noise.mode,
                                                           "the network estimator"),
                                            mix64(config.seed, kNetworkSalt));
        const LbSystem system = assemble_lb_system(
            make_lb_problem(cloud, std::vector<double>(cloud.size(), 0.0), estimator, lb));
        KahanSum errors;
        for (int s = 0; s < config.rhs_samples; ++s) {
          const AmbientField field =
              manufactured_field(cls, mix64(config.seed, 1000 + static_cast<std::uint64_t>(s)));
          const ManufacturedResult result =
              manufactured_on_system(*shape, cloud, field, system, lb.tol, lb.max_iter);
          errors.add(result.relative_error);
        }
        const double cell = errors.value() / static_cast<double>(config.rhs_samples);
        cells[ci * static_cast<std::size_t>(model_count) + static_cast<std::size_t>(model)]
             [cls_i] = cell;
        emit(log, format_name("table2: %s %s k=%d %s error %.3e", cls.c_str(),
                              cond.noise.mode.c_str(), cond.k, model == 0 ? "gmls" : "gnp", cell));
      }
    }
  }

  PdeErrorTable table;
  table.classes = config.classes;
  for (std::size_t ci = 0; ci < config.conditions.size(); ++ci) {
    for (int model = 0; model < model_count; ++model) {
      PdeErrorRow row;
      row.model = model == 0 ? "gmls" : "gnp";
      row.noise = config.conditions[ci].noise.mode;
      row.k = config.conditions[ci].k;
      row.errors =
          cells[ci * static_cast<std::size_t>(model_count) + static_cast<std::size_t>(model)];
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace pcgeom
