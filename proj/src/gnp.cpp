#include "pcgeom/gnp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "pcgeom/graph_math.hpp"
#include "pcgeom/legendre.hpp"
#include "pcgeom/numeric.hpp"
#include "pcgeom/rng.hpp"

namespace pcgeom {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }
double gelu_prime(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// Elementwise activation over a matrix, and derivative at the stored
// pre-activations.
void apply_activation(const std::string& kind, const Eigen::MatrixXd& pre, Eigen::MatrixXd& post) {
  post.resize(pre.rows(), pre.cols());
  if (kind == "gelu") {
    for (Eigen::Index i = 0; i < pre.size(); ++i) post.data()[i] = gelu(pre.data()[i]);
  } else {
    for (Eigen::Index i = 0; i < pre.size(); ++i)
      post.data()[i] = pre.data()[i] > 0.0 ? pre.data()[i] : 0.0;
  }
}

void scale_by_derivative(const std::string& kind, const Eigen::MatrixXd& pre,
                         Eigen::MatrixXd& grad) {
  if (kind == "gelu") {
    for (Eigen::Index i = 0; i < pre.size(); ++i) grad.data()[i] *= gelu_prime(pre.data()[i]);
  } else {
    for (Eigen::Index i = 0; i < pre.size(); ++i)
      if (pre.data()[i] <= 0.0) grad.data()[i] = 0.0;
  }
}

std::uint32_t crc32_bytes(const std::uint8_t* data, std::size_t size) {
  static std::uint32_t table[256];
  static bool built = false;
  if (!built) {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
      table[i] = c;
    }
    built = true;
  }
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

}  // namespace

double activation_value(const std::string& kind, double x) {
  return kind == "gelu" ? gelu(x) : (x > 0.0 ? x : 0.0);
}
double activation_derivative(const std::string& kind, double x) {
  return kind == "gelu" ? gelu_prime(x) : (x > 0.0 ? 1.0 : 0.0);
}

void GnpConfig::validate() const {
  if (d_v < 1 || T < 1 || n < 1 || n_b < 1) throw ConfigError("GnpConfig: sizes must be positive");
  if (d_v % n_b != 0) throw ConfigError("GnpConfig: n_b must divide d_v");
  if (nystrom_max < 1) throw ConfigError("GnpConfig: nystrom_max must be >= 1");
  if (degree < 1) throw ConfigError("GnpConfig: degree must be >= 1");
  if (activation != "gelu" && activation != "relu")
    throw ConfigError("GnpConfig: activation must be gelu or relu");
}

void LossWeights::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0 || lambda4 < 0.0)
    throw ConfigError("LossWeights: weights must be nonnegative");
}

GnpModel zeros_like(const GnpModel& model) {
  GnpModel z;
  z.config = model.config;
  const GnpConfig& c = z.config;
  z.lift_w = Eigen::MatrixXd::Zero(c.d_v, 3);
  z.lift_b = Eigen::VectorXd::Zero(c.d_v);
  z.layers.resize(static_cast<std::size_t>(c.T));
  for (auto& l : z.layers) {
    l.kernel_w1 = Eigen::MatrixXd::Zero(c.n, 6);
    l.kernel_b1 = Eigen::VectorXd::Zero(c.n);
    l.kernel_w2 = Eigen::MatrixXd::Zero(c.kernel_out(), c.n);
    l.kernel_b2 = Eigen::VectorXd::Zero(c.kernel_out());
    l.local = Eigen::MatrixXd::Zero(c.d_v, c.d_v);
    l.bias = Eigen::VectorXd::Zero(c.d_v);
  }
  z.proj_w1 = Eigen::MatrixXd::Zero(c.d_v, c.d_v);
  z.proj_b1 = Eigen::VectorXd::Zero(c.d_v);
  z.proj_w2 = Eigen::MatrixXd::Zero(c.coeff_count(), c.d_v);
  z.proj_b2 = Eigen::VectorXd::Zero(c.coeff_count());
  return z;
}

GnpModel init_gnp(const GnpConfig& config, std::uint64_t seed) {
  config.validate();
  GnpModel model;
  model.config = config;
  model = zeros_like(model);
  std::uint64_t tensor_index = 0;
  model.visit_tensors([&](const std::string&, double* data, const std::vector<std::uint64_t>& dims) {
    const std::uint64_t idx = tensor_index++;
    if (dims.size() == 1) return;  // biases stay zero
    Rng rng(mix64(seed, idx));
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[1]));
    const std::uint64_t total = dims[0] * dims[1];
    for (std::uint64_t i = 0; i < total; ++i) data[i] = scale * rng.normal();
  });
  return model;
}

std::vector<int> nystrom_subset(int m, int cap, std::uint64_t seed, std::uint64_t patch_id,
                                int point_index) {
  Rng rng(mix64(mix64(seed, patch_id), static_cast<std::uint64_t>(point_index)));
  return rng.sample_without_replacement(m, std::min(cap, m));
}

MongePatch gnp_forward(const GnpModel& model, const NeighborhoodPatch& patch, std::uint64_t seed,
                       GnpTape& tape) {
  const GnpConfig& cfg = model.config;
  cfg.validate();
  const int m = patch.input_count();
  if (m < 1) throw ConfigError("gnp_forward: empty patch input set");
  const int B = cfg.block_size();

  tape.X.resize(3, m);
  for (int j = 0; j < m; ++j) tape.X.col(j) = patch.coords[static_cast<std::size_t>(j)];

  // Per-point Nystrom subsets, shared by every layer.
  const std::uint64_t patch_id = static_cast<std::uint64_t>(
      patch.center_index >= 0 ? patch.center_index : 0);
  tape.subsets.resize(static_cast<std::size_t>(m));
  int total_pairs = 0;
  for (int j = 0; j < m; ++j) {
    tape.subsets[static_cast<std::size_t>(j)] =
        nystrom_subset(m, cfg.nystrom_max, seed, patch_id, j);
    total_pairs += static_cast<int>(tape.subsets[static_cast<std::size_t>(j)].size());
  }
  tape.pair_x.resize(6, total_pairs);
  tape.pair_owner.resize(static_cast<std::size_t>(total_pairs));
  tape.pair_source.resize(static_cast<std::size_t>(total_pairs));
  {
    int p = 0;
    for (int j = 0; j < m; ++j) {
      for (int k : tape.subsets[static_cast<std::size_t>(j)]) {
        tape.pair_x.block<3, 1>(0, p) = tape.X.col(j);
        tape.pair_x.block<3, 1>(3, p) = tape.X.col(k);
        tape.pair_owner[static_cast<std::size_t>(p)] = j;
        tape.pair_source[static_cast<std::size_t>(p)] = k;
        ++p;
      }
    }
  }

  Eigen::MatrixXd V = (model.lift_w * tape.X).colwise() + model.lift_b;

  tape.layers.clear();
  tape.layers.resize(static_cast<std::size_t>(cfg.T));
  for (int t = 0; t < cfg.T; ++t) {
    GnpTape::LayerRec& rec = tape.layers[static_cast<std::size_t>(t)];
    const GnpLayer& layer = model.layers[static_cast<std::size_t>(t)];
    rec.V = V;

    rec.Hpre = (layer.kernel_w1 * tape.pair_x).colwise() + layer.kernel_b1;
    apply_activation(cfg.activation, rec.Hpre, rec.Hpost);
    rec.M = (layer.kernel_w2 * rec.Hpost).colwise() + layer.kernel_b2;

    rec.Z = (layer.local * V).colwise() + layer.bias;
    for (int p = 0; p < total_pairs; ++p) {
      const int j = tape.pair_owner[static_cast<std::size_t>(p)];
      const int k = tape.pair_source[static_cast<std::size_t>(p)];
      const double inv_n =
          1.0 / static_cast<double>(tape.subsets[static_cast<std::size_t>(j)].size());
      const double* mp = rec.M.col(p).data();
      const double* vk = V.col(k).data();
      double* zj = rec.Z.col(j).data();
      for (int b = 0; b < cfg.n_b; ++b) {
        const double* blk = mp + b * B * B;
        const double* vb = vk + b * B;
        double* zb = zj + b * B;
        for (int r = 0; r < B; ++r) {
          double acc = 0.0;
          const double* row = blk + r * B;
          for (int c = 0; c < B; ++c) acc += row[c] * vb[c];
          zb[r] += inv_n * acc;
        }
      }
    }

    if (t == cfg.T - 1) {
      V = rec.Z;  // identity activation on the final layer
    } else {
      apply_activation(cfg.activation, rec.Z, V);
    }
  }
  tape.V_final = V;

  tape.n_targets = patch.target_count;
  if (tape.n_targets < 1) throw ConfigError("gnp_forward: patch has no target points");
  tape.pool = tape.V_final.leftCols(tape.n_targets).rowwise().mean();

  tape.proj_a = model.proj_w1 * tape.pool + model.proj_b1;
  tape.proj_h.resize(cfg.d_v);
  for (int i = 0; i < cfg.d_v; ++i) tape.proj_h(i) = activation_value(cfg.activation, tape.proj_a(i));
  tape.coeff = model.proj_w2 * tape.proj_h + model.proj_b2;

  MongePatch fit;
  fit.basis = LegendreBasis(cfg.degree);
  fit.coeff = tape.coeff;
  fit.epsilon = patch.frame.epsilon;
  fit.delta = patch.frame.delta;
  return fit;
}

MongePatch gnp_forward(const GnpModel& model, const NeighborhoodPatch& patch, std::uint64_t seed) {
  GnpTape tape;
  return gnp_forward(model, patch, seed, tape);
}

namespace {

// Per-target record of the dual-valued graph geometry at the clean
// coordinates plus the (linear) observed-height evaluation.
struct TargetEval {
  Eigen::MatrixXd clean_rows;            // coeff_count x 6
  GraphOutputs<D6> out;
  Eigen::VectorXd obs_values;            // coeff_count
  double s_obs = 0.0;
};

struct CoeffLoss {
  LossBreakdown breakdown;
  Eigen::VectorXd dcoeff;
};

CoeffLoss coeff_loss(const Eigen::VectorXd& coeff, int degree, const NeighborhoodPatch& patch,
                     const PatchTruthSet& truth, const LossWeights& weights, bool with_grad) {
  weights.validate();
  if (truth.size() != patch.target_count)
    throw ConfigError("gnp_loss: truth size does not match the patch target count");
  const int nv = truth.valid_count();
  if (nv == 0) throw NumericalError("gnp_loss: no valid targets");

  const LegendreBasis basis(degree);
  const int nc = basis.size();
  if (coeff.size() != nc) throw ConfigError("gnp_loss: coefficient count mismatch");
  const double ratio = patch.frame.delta / patch.frame.epsilon;
  const double ratio2 = patch.frame.delta / (patch.frame.epsilon * patch.frame.epsilon);

  std::vector<TargetEval> evals;
  std::vector<int> eval_target;
  evals.reserve(static_cast<std::size_t>(nv));

  // Stacked squared differences (n*) and truth norms (d*) per term.
  double nh = 0.0, dh = 0.0;
  KahanSum eta_sum;
  double ni = 0.0, di = 0.0;
  double nii = 0.0, dii = 0.0;
  double nk = 0.0, dk = 0.0;

  for (int t = 0; t < truth.size(); ++t) {
    const std::size_t st = static_cast<std::size_t>(t);
    if (!truth.valid[st]) continue;
    TargetEval ev;
    basis.eval(truth.u[st], truth.v[st], ev.clean_rows);
    const Eigen::VectorXd dvals = ev.clean_rows.transpose() * coeff;
    D6 d[6];
    for (int i = 0; i < 6; ++i) d[i] = D6::seeded(dvals(i), i);
    ev.out = graph_outputs<D6>(d, ratio, ratio2);

    const Eigen::Vector3d& xo = patch.coords[st];
    ev.obs_values = basis.values(xo.x(), xo.y());
    ev.s_obs = ev.obs_values.dot(coeff);

    nh += sqr(ev.s_obs - xo.z());
    dh += sqr(xo.z());

    const Eigen::Vector3d& n_ref = truth.normal[st];
    eta_sum.add(1.0 - (ev.out.eta0.v * n_ref.x() + ev.out.eta1.v * n_ref.y() +
                       ev.out.eta2.v * n_ref.z()));

    const Eigen::Matrix2d& iinv_ref = truth.first_inv[st];
    ni += sqr(ev.out.iinv00.v - iinv_ref(0, 0)) + 2.0 * sqr(ev.out.iinv01.v - iinv_ref(0, 1)) +
          sqr(ev.out.iinv11.v - iinv_ref(1, 1));
    di += iinv_ref.squaredNorm();

    const Eigen::Matrix2d& ii_ref = truth.second[st];
    nii += sqr(ev.out.ii00.v - ii_ref(0, 0)) + 2.0 * sqr(ev.out.ii01.v - ii_ref(0, 1)) +
           sqr(ev.out.ii11.v - ii_ref(1, 1));
    dii += ii_ref.squaredNorm();

    nk += sqr(ev.out.gauss.v - truth.gauss[st]);
    dk += sqr(truth.gauss[st]);

    if (with_grad) {
      evals.push_back(std::move(ev));
      eval_target.push_back(t);
    }
  }

  CoeffLoss result;
  LossBreakdown& b = result.breakdown;
  b.height = std::sqrt(nh) / (std::sqrt(dh) + 1e-30);
  b.normal = eta_sum.value() / static_cast<double>(nv);
  b.metric_inv = std::sqrt(ni) / (std::sqrt(di) + 1e-30);
  b.second = std::sqrt(nii) / (std::sqrt(dii) + 1e-30);
  b.gauss = std::sqrt(nk) / (std::sqrt(dk) + 1e-30);
  b.total = b.height + weights.lambda1 * b.normal + weights.lambda2 * b.metric_inv +
            weights.lambda3 * b.second + weights.lambda4 * b.gauss;

  if (!with_grad) return result;

  result.dcoeff = Eigen::VectorXd::Zero(nc);
  const double ch = nh > 0.0 ? 1.0 / (std::sqrt(nh) * (std::sqrt(dh) + 1e-30)) : 0.0;
  const double ci = ni > 0.0 ? weights.lambda2 / (std::sqrt(ni) * (std::sqrt(di) + 1e-30)) : 0.0;
  const double cii = nii > 0.0 ? weights.lambda3 / (std::sqrt(nii) * (std::sqrt(dii) + 1e-30)) : 0.0;
  const double ck = nk > 0.0 ? weights.lambda4 / (std::sqrt(nk) * (std::sqrt(dk) + 1e-30)) : 0.0;
  const double cn = weights.lambda1 / static_cast<double>(nv);

  for (std::size_t e = 0; e < evals.size(); ++e) {
    const TargetEval& ev = evals[e];
    const std::size_t st = static_cast<std::size_t>(eval_target[e]);

    result.dcoeff += ch * (ev.s_obs - patch.coords[st].z()) * ev.obs_values;

    Eigen::Matrix<double, 6, 1> gd = Eigen::Matrix<double, 6, 1>::Zero();
    const Eigen::Vector3d& n_ref = truth.normal[st];
    gd -= cn * (n_ref.x() * ev.out.eta0.g + n_ref.y() * ev.out.eta1.g + n_ref.z() * ev.out.eta2.g);

    const Eigen::Matrix2d& iinv_ref = truth.first_inv[st];
    gd += ci * ((ev.out.iinv00.v - iinv_ref(0, 0)) * ev.out.iinv00.g +
                2.0 * (ev.out.iinv01.v - iinv_ref(0, 1)) * ev.out.iinv01.g +
                (ev.out.iinv11.v - iinv_ref(1, 1)) * ev.out.iinv11.g);

    const Eigen::Matrix2d& ii_ref = truth.second[st];
    gd += cii * ((ev.out.ii00.v - ii_ref(0, 0)) * ev.out.ii00.g +
                 2.0 * (ev.out.ii01.v - ii_ref(0, 1)) * ev.out.ii01.g +
                 (ev.out.ii11.v - ii_ref(1, 1)) * ev.out.ii11.g);

    gd += ck * (ev.out.gauss.v - truth.gauss[st]) * ev.out.gauss.g;

    result.dcoeff += ev.clean_rows * gd;
  }
  return result;
}

}  // namespace

LossBreakdown gnp_loss(const GnpModel& model, const NeighborhoodPatch& patch,
                       const PatchTruthSet& truth, const LossWeights& weights,
                       std::uint64_t seed) {
  GnpTape tape;
  (void)gnp_forward(model, patch, seed, tape);
  return coeff_loss(tape.coeff, model.config.degree, patch, truth, weights, false).breakdown;
}

LossBreakdown gnp_loss_and_grad(const GnpModel& model, const NeighborhoodPatch& patch,
                                const PatchTruthSet& truth, const LossWeights& weights,
                                std::uint64_t seed, GnpModel& grads) {
  const GnpConfig& cfg = model.config;
  GnpTape tape;
  (void)gnp_forward(model, patch, seed, tape);
  CoeffLoss cl = coeff_loss(tape.coeff, cfg.degree, patch, truth, weights, true);

  const int m = patch.input_count();
  const int B = cfg.block_size();
  const int P = static_cast<int>(tape.pair_owner.size());

  // Projection backward.
  grads.proj_w2 += cl.dcoeff * tape.proj_h.transpose();
  grads.proj_b2 += cl.dcoeff;
  Eigen::VectorXd da = model.proj_w2.transpose() * cl.dcoeff;
  for (int i = 0; i < cfg.d_v; ++i) da(i) *= activation_derivative(cfg.activation, tape.proj_a(i));
  grads.proj_w1 += da * tape.pool.transpose();
  grads.proj_b1 += da;
  const Eigen::VectorXd dpool = model.proj_w1.transpose() * da;

  Eigen::MatrixXd dV = Eigen::MatrixXd::Zero(cfg.d_v, m);
  const double inv_nt = 1.0 / static_cast<double>(tape.n_targets);
  for (int j = 0; j < tape.n_targets; ++j) dV.col(j) = dpool * inv_nt;

  Eigen::MatrixXd dM(cfg.kernel_out(), P);
  for (int t = cfg.T - 1; t >= 0; --t) {
    const GnpTape::LayerRec& rec = tape.layers[static_cast<std::size_t>(t)];
    const GnpLayer& layer = model.layers[static_cast<std::size_t>(t)];
    GnpLayer& glayer = grads.layers[static_cast<std::size_t>(t)];

    Eigen::MatrixXd dZ = dV;
    if (t != cfg.T - 1) scale_by_derivative(cfg.activation, rec.Z, dZ);

    glayer.bias += dZ.rowwise().sum();
    glayer.local += dZ * rec.V.transpose();
    Eigen::MatrixXd dVprev = layer.local.transpose() * dZ;

    for (int p = 0; p < P; ++p) {
      const int j = tape.pair_owner[static_cast<std::size_t>(p)];
      const int k = tape.pair_source[static_cast<std::size_t>(p)];
      const double inv_n =
          1.0 / static_cast<double>(tape.subsets[static_cast<std::size_t>(j)].size());
      const double* gj = dZ.col(j).data();
      const double* vk = rec.V.col(k).data();
      const double* mp = rec.M.col(p).data();
      double* dmp = dM.col(p).data();
      double* dvk = dVprev.col(k).data();
      for (int b = 0; b < cfg.n_b; ++b) {
        const double* gb = gj + b * B;
        const double* vb = vk + b * B;
        const double* mb = mp + b * B * B;
        double* dmb = dmp + b * B * B;
        double* dvb = dvk + b * B;
        for (int r = 0; r < B; ++r) {
          const double gr = inv_n * gb[r];
          const double* mrow = mb + r * B;
          double* dmrow = dmb + r * B;
          for (int c = 0; c < B; ++c) {
            dmrow[c] = gr * vb[c];
            dvb[c] += gr * mrow[c];
          }
        }
      }
    }

    glayer.kernel_w2 += dM * rec.Hpost.transpose();
    glayer.kernel_b2 += dM.rowwise().sum();
    Eigen::MatrixXd dH = layer.kernel_w2.transpose() * dM;
    scale_by_derivative(cfg.activation, rec.Hpre, dH);
    glayer.kernel_w1 += dH * tape.pair_x.transpose();
    glayer.kernel_b1 += dH.rowwise().sum();

    dV = std::move(dVprev);
  }

  grads.lift_w += dV * tape.X.transpose();
  grads.lift_b += dV.rowwise().sum();
  return cl.breakdown;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}

struct ByteReader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw ConfigError("load_weights: truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
    pos += n;
    return s;
  }
  void f64s(double* dst, std::size_t count) {
    need(count * 8);
    std::memcpy(dst, buf.data() + pos, count * 8);
    pos += count * 8;
  }
};

}  // namespace

std::vector<std::uint8_t> save_weights(const GnpModel& model) {
  model.config.validate();
  std::vector<std::uint8_t> out;
  out.push_back('G');
  out.push_back('N');
  out.push_back('P');
  out.push_back('W');
  put_u32(out, 1);

  nlohmann::json cfg;
  cfg["d_v"] = model.config.d_v;
  cfg["T"] = model.config.T;
  cfg["n"] = model.config.n;
  cfg["n_b"] = model.config.n_b;
  cfg["nystrom_max"] = model.config.nystrom_max;
  cfg["degree"] = model.config.degree;
  cfg["activation"] = model.config.activation;
  const std::string cfg_str = cfg.dump();
  put_u32(out, static_cast<std::uint32_t>(cfg_str.size()));
  out.insert(out.end(), cfg_str.begin(), cfg_str.end());

  model.visit_tensors(
      [&](const std::string& name, const double* data, const std::vector<std::uint64_t>& dims) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        put_u32(out, static_cast<std::uint32_t>(dims.size()));
        std::uint64_t total = 1;
        for (std::uint64_t d : dims) {
          put_u64(out, d);
          total *= d;
        }
        const std::size_t start = out.size();
        out.resize(start + total * 8);
        std::memcpy(out.data() + start, data, total * 8);
      });

  put_u32(out, crc32_bytes(out.data(), out.size()));
  return out;
}

GnpModel load_weights(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12) throw ConfigError("load_weights: truncated file");
  const std::uint32_t stored_crc =
      static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
  if (crc32_bytes(bytes.data(), bytes.size() - 4) != stored_crc)
    throw ConfigError("load_weights: checksum failure");

  ByteReader r{bytes};
  if (r.str(4) != "GNPW") throw ConfigError("load_weights: bad magic");
  const std::uint32_t version = r.u32();
  if (version != 1) throw ConfigError("load_weights: unsupported version");

  const std::uint32_t cfg_len = r.u32();
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(r.str(cfg_len));
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("load_weights: bad config block");
  }
  static const char* kKeys[] = {"d_v", "T", "n", "n_b", "nystrom_max", "degree", "activation"};
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    bool known = false;
    for (const char* k : kKeys) known = known || it.key() == k;
    if (!known) throw ConfigError("load_weights: unknown config key " + it.key());
  }
  GnpConfig config;
  try {
    config.d_v = cfg.at("d_v").get<int>();
    config.T = cfg.at("T").get<int>();
    config.n = cfg.at("n").get<int>();
    config.n_b = cfg.at("n_b").get<int>();
    config.nystrom_max = cfg.at("nystrom_max").get<int>();
    config.degree = cfg.at("degree").get<int>();
    config.activation = cfg.at("activation").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("load_weights: incomplete config block");
  }
  config.validate();

  GnpModel model;
  model.config = config;
  model = zeros_like(model);
  model.visit_tensors(
      [&](const std::string& name, double* data, const std::vector<std::uint64_t>& dims) {
        const std::uint32_t name_len = r.u32();
        if (r.str(name_len) != name) throw ConfigError("load_weights: unexpected tensor " + name);
        const std::uint32_t rank = r.u32();
        if (rank != dims.size()) throw ConfigError("load_weights: rank mismatch for " + name);
        std::uint64_t total = 1;
        for (std::uint64_t want : dims) {
          if (r.u64() != want) throw ConfigError("load_weights: shape mismatch for " + name);
          total *= want;
        }
        r.f64s(data, total);
      });
  if (r.pos != bytes.size() - 4) throw ConfigError("load_weights: trailing data");
  return model;
}

void save_weights_file(const GnpModel& model, const std::string& path) {
  const std::vector<std::uint8_t> bytes = save_weights(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("save_weights_file: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("save_weights_file: write failed for " + path);
}

GnpModel load_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_weights_file: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_weights(bytes);
}

}  // namespace pcgeom
