#include "pcgeom/gnp_train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "pcgeom/monge.hpp"
#include "pcgeom/numeric.hpp"
#include "pcgeom/rng.hpp"

namespace pcgeom {

namespace {

// Applies f(model entry, m entry, v entry, grad entry) over every
// parameter, walking the four models in lock step.
template <typename F>
void for_each_entry(GnpModel& model, GnpModel& m, GnpModel& v, const GnpModel& g, F&& f) {
  std::vector<std::pair<double*, std::size_t>> pm, mm, vm;
  std::vector<std::pair<const double*, std::size_t>> gm;
  auto collect = [](auto& views) {
    return [&views](const std::string&, auto* data, const std::vector<std::uint64_t>& dims) {
      std::uint64_t total = 1;
      for (std::uint64_t d : dims) total *= d;
      views.emplace_back(data, static_cast<std::size_t>(total));
    };
  };
  model.visit_tensors(collect(pm));
  m.visit_tensors(collect(mm));
  v.visit_tensors(collect(vm));
  g.visit_tensors(collect(gm));
  for (std::size_t t = 0; t < pm.size(); ++t)
    for (std::size_t i = 0; i < pm[t].second; ++i)
      f(pm[t].first[i], mm[t].first[i], vm[t].first[i], gm[t].first[i]);
}

double global_norm(const GnpModel& g) {
  double sum = 0.0;
  g.visit_tensors([&](const std::string&, const double* data, const std::vector<std::uint64_t>& dims) {
    std::uint64_t total = 1;
    for (std::uint64_t d : dims) total *= d;
    for (std::uint64_t i = 0; i < total; ++i) sum += data[i] * data[i];
  });
  return std::sqrt(sum);
}

void scale_model(GnpModel& g, double s) {
  g.visit_tensors([&](const std::string&, double* data, const std::vector<std::uint64_t>& dims) {
    std::uint64_t total = 1;
    for (std::uint64_t d : dims) total *= d;
    for (std::uint64_t i = 0; i < total; ++i) data[i] *= s;
  });
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("TrainConfig: lr must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("TrainConfig: betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("TrainConfig: adam_eps must be > 0");
  if (batch < 1) throw ConfigError("TrainConfig: batch must be >= 1");
  if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
  if (!(clip_norm > 0.0)) throw ConfigError("TrainConfig: clip_norm must be > 0");
  weights.validate();
}

GnpTrainer::GnpTrainer(const GnpModel& model, const TrainConfig& config)
    : config_(config),
      model_(model),
      checkpoint_(model),
      adam_m_(zeros_like(model)),
      adam_v_(zeros_like(model)) {
  config_.validate();
  model_.config.validate();
  forward_seed_ = mix64(config_.seed, 0xF00Du);
}

void GnpTrainer::checkpoint() { checkpoint_ = model_; }

void GnpTrainer::run_epoch(const std::vector<TrainSample>& samples) {
  if (samples.empty()) throw ConfigError("GnpTrainer: empty sample list");
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(mix64(config_.seed, epoch_counter_++));
  shuffle_rng.shuffle(order);

  const int n = static_cast<int>(samples.size());
  for (int start = 0; start < n; start += config_.batch) {
    const int count = std::min(config_.batch, n - start);
    GnpModel grads = zeros_like(model_);
    LossBreakdown mean;
    for (int b = 0; b < count; ++b) {
      const TrainSample& s = samples[static_cast<std::size_t>(order[static_cast<std::size_t>(start + b)])];
      const LossBreakdown l =
          gnp_loss_and_grad(model_, s.patch, s.truth, config_.weights, forward_seed_, grads);
      mean.total += l.total;
      mean.height += l.height;
      mean.normal += l.normal;
      mean.metric_inv += l.metric_inv;
      mean.second += l.second;
      mean.gauss += l.gauss;
    }
    const double inv = 1.0 / static_cast<double>(count);
    mean.total *= inv;
    mean.height *= inv;
    mean.normal *= inv;
    mean.metric_inv *= inv;
    mean.second *= inv;
    mean.gauss *= inv;

    if (!std::isfinite(mean.total)) {
      model_ = checkpoint_;
      throw NumericalError("GnpTrainer: non-finite loss at step " + std::to_string(step_ + 1) +
                           "; parameters restored to the last checkpoint");
    }

    scale_model(grads, inv);
    const double norm = global_norm(grads);
    if (norm > config_.clip_norm) scale_model(grads, config_.clip_norm / norm);

    ++step_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    const double lr = config_.lr;
    const double b1 = config_.beta1, b2 = config_.beta2, eps = config_.adam_eps;
    for_each_entry(model_, adam_m_, adam_v_, grads, [&](double& p, double& m, double& v, double g) {
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g * g;
      p -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
    });
    history_.push_back(mean);
  }
}

TrainSample self_consistent_sample(const NeighborhoodPatch& patch, const MongePatch& reference) {
  TrainSample s;
  s.patch = patch;
  for (Eigen::Vector3d& xyz : s.patch.coords) xyz.z() = reference.height(xyz.x(), xyz.y());
  const int nt = patch.target_count;
  PatchTruthSet& t = s.truth;
  t.u.resize(static_cast<std::size_t>(nt));
  t.v.resize(static_cast<std::size_t>(nt));
  t.w.resize(static_cast<std::size_t>(nt));
  t.normal.resize(static_cast<std::size_t>(nt));
  t.first_inv.resize(static_cast<std::size_t>(nt));
  t.second.resize(static_cast<std::size_t>(nt));
  t.gauss.resize(static_cast<std::size_t>(nt));
  t.mean.resize(static_cast<std::size_t>(nt));
  t.valid.assign(static_cast<std::size_t>(nt), 1);
  for (int i = 0; i < nt; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const double u = patch.coords[si].x();
    const double v = patch.coords[si].y();
    const GeometryEstimate g = extract_geometry(reference, u, v);
    t.u[si] = u;
    t.v[si] = v;
    t.w[si] = g.height;
    t.normal[si] = g.normal;
    t.first_inv[si] = g.first_inv;
    t.second[si] = g.second;
    t.gauss[si] = g.gauss;
    t.mean[si] = g.mean;
  }
  return s;
}

std::vector<LossBreakdown> train_gnp(GnpModel& model, const std::vector<TrainSample>& dataset,
                                     const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw ConfigError("train_gnp: empty dataset");
  GnpTrainer trainer(model, config);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    try {
      trainer.run_epoch(dataset);
    } catch (const NumericalError&) {
      model = trainer.model();  // the restored checkpoint
      throw;
    }
    trainer.checkpoint();
    if (!config.checkpoint_dir.empty()) {
      std::filesystem::create_directories(config.checkpoint_dir);
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%03d.gnpw", epoch + 1);
      save_weights_file(trainer.model(), config.checkpoint_dir + "/" + name);
    }
  }
  model = trainer.model();
  return trainer.history();
}

}  // namespace pcgeom
