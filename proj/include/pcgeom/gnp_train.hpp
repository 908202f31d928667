#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcgeom/gnp.hpp"

namespace pcgeom {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch = 8;
  int epochs = 1;
  std::uint64_t seed = 0;
  LossWeights weights;
  double clip_norm = 10.0;          // global gradient-norm clip
  std::string checkpoint_dir;       // when set, weights are written per epoch

  void validate() const;
};

// One training example: a rescaled neighborhood and its frame truth.
struct TrainSample {
  NeighborhoodPatch patch;
  PatchTruthSet truth;
};

/**
 * Adam trainer with per-step loss history. Each run_epoch call makes one
 * shuffled pass over the samples it is given (shuffle order is seeded and
 * advances per call), taking one optimizer step per batch of
 * config.batch samples (the final batch may be smaller). Gradients are
 * averaged over the batch and clipped to config.clip_norm in global
 * 2-norm before the Adam update. checkpoint() marks the current
 * parameters as the restore point; a non-finite batch loss restores that
 * point and raises NumericalError. Deterministic given the seed and the
 * sequence of calls.
 */
class GnpTrainer {
 public:
  GnpTrainer(const GnpModel& model, const TrainConfig& config);

  void run_epoch(const std::vector<TrainSample>& samples);
  void checkpoint();

  const GnpModel& model() const { return model_; }
  const std::vector<LossBreakdown>& history() const { return history_; }
  std::int64_t step_count() const { return step_; }

 private:
  TrainConfig config_;
  GnpModel model_;
  GnpModel checkpoint_;
  GnpModel adam_m_;
  GnpModel adam_v_;
  std::vector<LossBreakdown> history_;
  std::int64_t step_ = 0;
  std::uint64_t epoch_counter_ = 0;
  std::uint64_t forward_seed_ = 0;
};

/**
 * A self-consistent training sample for optimizer sanity checks: the
 * patch keeps its planar coordinates but its heights are replaced by the
 * reference polynomial's values, and the truth is the reference's own
 * graph geometry. The loss is therefore exactly minimizable (zero floor),
 * unlike a sampled-surface patch whose degree-limited fit leaves an
 * approximation floor.
 */
TrainSample self_consistent_sample(const NeighborhoodPatch& patch, const MongePatch& reference);

/**
 * Trains in place for config.epochs passes over the dataset,
 * checkpointing after every epoch (and writing epoch_###.gnpw files when
 * config.checkpoint_dir is set). On divergence the model is left at the
 * last completed epoch (or its initial state) and NumericalError
 * propagates. Returns one loss entry per optimizer step.
 */
std::vector<LossBreakdown> train_gnp(GnpModel& model, const std::vector<TrainSample>& dataset,
                                     const TrainConfig& config);

}  // namespace pcgeom
