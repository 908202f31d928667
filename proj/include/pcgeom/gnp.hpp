#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcgeom/error_metrics.hpp"
#include "pcgeom/monge.hpp"
#include "pcgeom/patch.hpp"

namespace pcgeom {

/**
 * Architecture of the neural height-fit operator: a pointwise lifting of
 * the rescaled coordinates into d_v features, T kernel-integral layers
 * whose kernels are small MLPs with block-factorized matrix outputs and
 * Nystrom-truncated neighbor sums, then target-average pooling and a
 * two-layer projection onto the tensor Legendre coefficients.
 */
struct GnpConfig {
  int d_v = 32;          // feature width
  int T = 3;             // kernel-integral layers
  int n = 64;            // kernel MLP hidden width
  int n_b = 4;           // kernel output blocks, divides d_v
  int nystrom_max = 32;  // per-point neighbor cap in the kernel sum
  int degree = 3;        // Legendre degree of the emitted fit
  std::string activation = "gelu";  // "gelu" or "relu"

  void validate() const;
  int block_size() const { return d_v / n_b; }
  int kernel_out() const { return n_b * block_size() * block_size(); }
  int coeff_count() const { return (degree + 1) * (degree + 1); }
};

struct GnpLayer {
  Eigen::MatrixXd kernel_w1;  // n x 6
  Eigen::VectorXd kernel_b1;  // n
  Eigen::MatrixXd kernel_w2;  // kernel_out x n
  Eigen::VectorXd kernel_b2;  // kernel_out
  Eigen::MatrixXd local;      // d_v x d_v
  Eigen::VectorXd bias;       // d_v
};

struct GnpModel {
  GnpConfig config;
  Eigen::MatrixXd lift_w;   // d_v x 3
  Eigen::VectorXd lift_b;   // d_v
  std::vector<GnpLayer> layers;
  Eigen::MatrixXd proj_w1;  // d_v x d_v
  Eigen::VectorXd proj_b1;  // d_v
  Eigen::MatrixXd proj_w2;  // coeff_count x d_v
  Eigen::VectorXd proj_b2;  // coeff_count

  // Visits every parameter tensor in serialization order as a raw buffer.
  // F: void(const std::string& name, double* data, const std::vector<std::uint64_t>& dims)
  template <typename F>
  void visit_tensors(F&& f);
  template <typename F>
  void visit_tensors(F&& f) const;
};

// Zero-initialized gradient (or momentum) container shaped like the model.
GnpModel zeros_like(const GnpModel& model);

// Seeded initialization: weights N(0, 1/sqrt(fan_in)), biases zero.
GnpModel init_gnp(const GnpConfig& config, std::uint64_t seed);

// Deterministic Nystrom subset for one point: min(cap, m) indices into the
// input set, sampled without replacement from a stream keyed by
// (seed, patch_id, point_index).
std::vector<int> nystrom_subset(int m, int cap, std::uint64_t seed, std::uint64_t patch_id,
                                int point_index);

/**
 * Recorded forward pass. Pair data (kernel inputs, hidden activations,
 * kernel outputs) is stored per layer so the backward pass can replay the
 * graph exactly; subsets are shared across layers.
 */
struct GnpTape {
  Eigen::MatrixXd X;                      // 3 x m rescaled coordinates
  std::vector<std::vector<int>> subsets;  // per point, indices into inputs
  Eigen::MatrixXd pair_x;                 // 6 x P concatenated (x_j, x_k)
  std::vector<int> pair_owner;            // P -> j
  std::vector<int> pair_source;           // P -> k
  struct LayerRec {
    Eigen::MatrixXd V;      // d_v x m features entering the layer
    Eigen::MatrixXd Z;      // d_v x m pre-activations
    Eigen::MatrixXd Hpre;   // n x P kernel hidden pre-activations
    Eigen::MatrixXd Hpost;  // n x P
    Eigen::MatrixXd M;      // kernel_out x P kernel outputs
  };
  std::vector<LayerRec> layers;
  Eigen::MatrixXd V_final;  // d_v x m
  Eigen::VectorXd pool;     // d_v target average
  Eigen::VectorXd proj_a;   // d_v projection pre-activation
  Eigen::VectorXd proj_h;   // d_v projection hidden
  Eigen::VectorXd coeff;    // coeff_count
  int n_targets = 0;
};

// Forward pass producing the network's height fit for the patch. The
// seed (with patch.center_index as patch id) fixes the Nystrom subsets.
MongePatch gnp_forward(const GnpModel& model, const NeighborhoodPatch& patch, std::uint64_t seed);
MongePatch gnp_forward(const GnpModel& model, const NeighborhoodPatch& patch, std::uint64_t seed,
                       GnpTape& tape);

struct LossWeights {
  double lambda1 = 0.5;  // normal term
  double lambda2 = 0.5;  // inverse metric term
  double lambda3 = 0.5;  // second fundamental form term
  double lambda4 = 0.5;  // Gaussian curvature term
  void validate() const;
};

/**
 * Loss terms. height/normal/metric_inv/second/gauss are the raw
 * (unweighted) term values; total applies the lambda weights:
 * total = height + l1 normal + l2 metric_inv + l3 second + l4 gauss.
 * The height term compares the predicted height at the observed target
 * coordinates with the observed heights; the geometry terms compare
 * predictions at the clean coordinates with the exact frame truth.
 * Outlier targets (truth.valid = 0) are excluded from every term.
 */
struct LossBreakdown {
  double total = 0.0;
  double height = 0.0;
  double normal = 0.0;
  double metric_inv = 0.0;
  double second = 0.0;
  double gauss = 0.0;
};

LossBreakdown gnp_loss(const GnpModel& model, const NeighborhoodPatch& patch,
                       const PatchTruthSet& truth, const LossWeights& weights,
                       std::uint64_t seed);

// Loss plus exact reverse-mode parameter gradients for one patch.
LossBreakdown gnp_loss_and_grad(const GnpModel& model, const NeighborhoodPatch& patch,
                                const PatchTruthSet& truth, const LossWeights& weights,
                                std::uint64_t seed, GnpModel& grads);

// Versioned weight container ("GNPW", version, config JSON, named f64
// tensors, trailing CRC32). Round-trips bit-exactly.
std::vector<std::uint8_t> save_weights(const GnpModel& model);
GnpModel load_weights(const std::vector<std::uint8_t>& bytes);
void save_weights_file(const GnpModel& model, const std::string& path);
GnpModel load_weights_file(const std::string& path);

// Exact gelu (erf form) and its derivative; relu uses subgradient 0 at 0.
double activation_value(const std::string& kind, double x);
double activation_derivative(const std::string& kind, double x);

template <typename F>
void GnpModel::visit_tensors(F&& f) {
  const_cast<const GnpModel*>(this)->visit_tensors(
      [&](const std::string& name, const double* data, const std::vector<std::uint64_t>& dims) {
        f(name, const_cast<double*>(data), dims);
      });
}

template <typename F>
void GnpModel::visit_tensors(F&& f) const {
  auto mat = [&](const std::string& name, const Eigen::MatrixXd& m) {
    f(name, m.data(), {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())});
  };
  auto vec = [&](const std::string& name, const Eigen::VectorXd& v) {
    f(name, v.data(), {static_cast<std::uint64_t>(v.size())});
  };
  mat("lift.weight", lift_w);
  vec("lift.bias", lift_b);
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const std::string p = "layer" + std::to_string(t) + ".";
    mat(p + "kernel.w1", layers[t].kernel_w1);
    vec(p + "kernel.b1", layers[t].kernel_b1);
    mat(p + "kernel.w2", layers[t].kernel_w2);
    vec(p + "kernel.b2", layers[t].kernel_b2);
    mat(p + "local", layers[t].local);
    vec(p + "bias", layers[t].bias);
  }
  mat("proj.w1", proj_w1);
  vec("proj.b1", proj_b1);
  mat("proj.w2", proj_w2);
  vec("proj.b2", proj_b2);
}

}  // namespace pcgeom
