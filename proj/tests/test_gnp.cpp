#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "pcgeom/error_metrics.hpp"
#include "pcgeom/gnp.hpp"
#include "pcgeom/kdtree.hpp"
#include "pcgeom/monge.hpp"
#include "pcgeom/numeric.hpp"
#include "pcgeom/patch.hpp"
#include "pcgeom/rng.hpp"
#include "pcgeom/sampling.hpp"
#include "pcgeom/shapes.hpp"

using namespace pcgeom;

namespace {

struct PatchCase {
  NeighborhoodPatch patch;
  PatchTruthSet truth;
};

// A small sampled bumpy-sphere cloud with a handful of ready patches.
struct Fixture {
  RadialShape shape = generate_radial_shape(6, 11);
  PointCloud cloud;
  std::vector<PatchCase> cases;

  explicit Fixture(int k = 20, std::vector<int> centers = {100, 400, 800, 1300, 1700}) {
    cloud = sample_quasi_uniform(shape, 2000, 17);
    KdTree tree(cloud.points);
    NeighborhoodConfig config;
    config.k = k;
    for (int c : centers) {
      PatchCase pc;
      pc.patch = make_patch(cloud.points, tree, c, config, cloud.normals[static_cast<std::size_t>(c)]);
      pc.truth = patch_truth(shape, cloud, pc.patch);
      cases.push_back(std::move(pc));
    }
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

GnpConfig small_config() {
  GnpConfig cfg;
  cfg.d_v = 8;
  cfg.T = 2;
  cfg.n = 16;
  cfg.n_b = 2;
  cfg.nystrom_max = 32;
  return cfg;
}

// Raw views of every parameter entry, for finite differencing.
std::vector<std::pair<double*, std::size_t>> tensor_views(GnpModel& model) {
  std::vector<std::pair<double*, std::size_t>> views;
  model.visit_tensors([&](const std::string&, double* data, const std::vector<std::uint64_t>& dims) {
    std::uint64_t total = 1;
    for (std::uint64_t d : dims) total *= d;
    views.emplace_back(data, static_cast<std::size_t>(total));
  });
  return views;
}

std::uint32_t test_crc32(const std::uint8_t* data, std::size_t size) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) {
    crc ^= data[i];
    for (int k = 0; k < 8; ++k) crc = (crc & 1u) ? 0xEDB88320u ^ (crc >> 1) : (crc >> 1);
  }
  return crc ^ 0xFFFFFFFFu;
}

void refresh_crc(std::vector<std::uint8_t>& bytes) {
  const std::uint32_t crc = test_crc32(bytes.data(), bytes.size() - 4);
  for (int i = 0; i < 4; ++i)
    bytes[bytes.size() - 4 + static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>((crc >> (8 * i)) & 0xFFu);
}

}  // namespace

TEST_CASE("network config validation") {
  GnpConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.coeff_count() == 16);
  CHECK(cfg.block_size() == 8);
  CHECK(cfg.kernel_out() == 4 * 8 * 8);

  GnpConfig bad = cfg;
  bad.n_b = 5;  // does not divide d_v = 32
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.activation = "tanh";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.nystrom_max = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.d_v = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  LossWeights w;
  CHECK_NOTHROW(w.validate());
  w.lambda3 = -0.1;
  CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("parameter count at reference width") {
  GnpConfig cfg;  // d_v=32, T=3, n=64, n_b=4
  GnpModel model = init_gnp(cfg, 1);
  std::size_t count = 0;
  model.visit_tensors([&](const std::string&, double*, const std::vector<std::uint64_t>& dims) {
    std::uint64_t total = 1;
    for (std::uint64_t d : dims) total *= d;
    count += static_cast<std::size_t>(total);
  });
  CHECK(count == 56144);
}

TEST_CASE("zero model emits the flat fit") {
  Fixture& f = fixture();
  GnpModel model = init_gnp(small_config(), 3);
  model = zeros_like(model);
  MongePatch fit = gnp_forward(model, f.cases[0].patch, 5);
  CHECK(fit.coeff.size() == 16);
  CHECK(fit.coeff.cwiseAbs().maxCoeff() == 0.0);
  GeometryEstimate g = extract_geometry(fit, 0.3, -0.2);
  CHECK(g.height == 0.0);
  CHECK(g.normal.z() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.gauss == 0.0);
  CHECK(g.mean == 0.0);
  CHECK(fit.epsilon == doctest::Approx(f.cases[0].patch.frame.epsilon));
  CHECK(fit.delta == doctest::Approx(f.cases[0].patch.frame.delta));
}

TEST_CASE("initialization is deterministic and seed dependent") {
  GnpConfig cfg = small_config();
  GnpModel a = init_gnp(cfg, 42);
  GnpModel b = init_gnp(cfg, 42);
  GnpModel c = init_gnp(cfg, 43);
  CHECK(save_weights(a) == save_weights(b));
  CHECK(save_weights(a) != save_weights(c));
  CHECK(a.lift_b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.layers[0].bias.cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.proj_b2.cwiseAbs().maxCoeff() == 0.0);
  // Weight scale follows 1/sqrt(fan_in) loosely.
  const double std_w2 = std::sqrt(a.layers[0].kernel_w2.array().square().mean());
  CHECK(std_w2 == doctest::Approx(1.0 / std::sqrt(16.0)).epsilon(0.25));
}

TEST_CASE("nystrom subsets are capped, distinct, and deterministic") {
  std::vector<int> all = nystrom_subset(10, 32, 9, 4, 2);
  CHECK(all.size() == 10);
  std::vector<int> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);

  std::vector<int> capped = nystrom_subset(100, 16, 9, 4, 2);
  CHECK(capped.size() == 16);
  std::sort(capped.begin(), capped.end());
  CHECK(std::adjacent_find(capped.begin(), capped.end()) == capped.end());
  CHECK(capped.front() >= 0);
  CHECK(capped.back() < 100);

  CHECK(nystrom_subset(100, 16, 9, 4, 2) == nystrom_subset(100, 16, 9, 4, 2));
  CHECK(nystrom_subset(100, 16, 9, 4, 2) != nystrom_subset(100, 16, 9, 4, 3));
  CHECK(nystrom_subset(100, 16, 9, 5, 2) != nystrom_subset(100, 16, 9, 4, 2));
}

TEST_CASE("forward pass is deterministic and depends on the subset seed") {
  Fixture& f = fixture();
  const NeighborhoodPatch& patch = f.cases[1].patch;
  GnpConfig cfg = small_config();
  cfg.nystrom_max = 8;  // below the input count, so subsets matter
  GnpModel model = init_gnp(cfg, 21);

  MongePatch fit1 = gnp_forward(model, patch, 77);
  MongePatch fit2 = gnp_forward(model, patch, 77);
  for (int i = 0; i < fit1.coeff.size(); ++i) CHECK(fit1.coeff(i) == fit2.coeff(i));

  MongePatch fit3 = gnp_forward(model, patch, 78);
  CHECK((fit1.coeff - fit3.coeff).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("input permutation leaves coefficients unchanged when subsets cover all points") {
  Fixture& f = fixture();
  const NeighborhoodPatch& patch = f.cases[2].patch;
  GnpConfig cfg = small_config();
  cfg.nystrom_max = 4096;  // every subset is the full input set
  GnpModel model = init_gnp(cfg, 33);

  NeighborhoodPatch shuffled = patch;
  Rng rng(5);
  // Permute targets among themselves and the tail among itself so the
  // target prefix structure is preserved.
  std::vector<int> head(static_cast<std::size_t>(patch.target_count));
  std::iota(head.begin(), head.end(), 0);
  std::vector<int> tail(static_cast<std::size_t>(patch.input_count() - patch.target_count));
  std::iota(tail.begin(), tail.end(), patch.target_count);
  rng.shuffle(head);
  rng.shuffle(tail);
  std::vector<int> perm = head;
  perm.insert(perm.end(), tail.begin(), tail.end());
  for (int i = 0; i < patch.input_count(); ++i) {
    const std::size_t pi = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
    shuffled.input_indices[static_cast<std::size_t>(i)] = patch.input_indices[pi];
    shuffled.coords[static_cast<std::size_t>(i)] = patch.coords[pi];
  }

  MongePatch fit_a = gnp_forward(model, patch, 77);
  MongePatch fit_b = gnp_forward(model, shuffled, 77);
  const double rel =
      (fit_a.coeff - fit_b.coeff).norm() / (fit_a.coeff.norm() + 1e-30);
  CHECK(rel < 1e-12);
}

TEST_CASE("loss breakdown matches a direct recomputation from the emitted fit") {
  Fixture& f = fixture();
  const NeighborhoodPatch& patch = f.cases[3].patch;
  const PatchTruthSet& truth = f.cases[3].truth;
  GnpModel model = init_gnp(small_config(), 99);
  LossWeights weights;

  LossBreakdown loss = gnp_loss(model, patch, truth, weights, 13);
  MongePatch fit = gnp_forward(model, patch, 13);

  double nh = 0.0, dh = 0.0, eta = 0.0;
  double ni = 0.0, di = 0.0, nii = 0.0, dii = 0.0, nk = 0.0, dk = 0.0;
  int nv = 0;
  for (int t = 0; t < truth.size(); ++t) {
    const std::size_t st = static_cast<std::size_t>(t);
    if (!truth.valid[st]) continue;
    ++nv;
    const Eigen::Vector3d& xo = patch.coords[st];
    nh += sqr(fit.height(xo.x(), xo.y()) - xo.z());
    dh += sqr(xo.z());
    GeometryEstimate g = extract_geometry(fit, truth.u[st], truth.v[st]);
    eta += 1.0 - g.normal.dot(truth.normal[st]);
    ni += (g.first_inv - truth.first_inv[st]).squaredNorm();
    di += truth.first_inv[st].squaredNorm();
    nii += (g.second - truth.second[st]).squaredNorm();
    dii += truth.second[st].squaredNorm();
    nk += sqr(g.gauss - truth.gauss[st]);
    dk += sqr(truth.gauss[st]);
  }
  REQUIRE(nv > 0);
  CHECK(loss.height == doctest::Approx(std::sqrt(nh) / (std::sqrt(dh) + 1e-30)).epsilon(1e-12));
  CHECK(loss.normal == doctest::Approx(eta / nv).epsilon(1e-12));
  CHECK(loss.metric_inv == doctest::Approx(std::sqrt(ni) / (std::sqrt(di) + 1e-30)).epsilon(1e-12));
  CHECK(loss.second == doctest::Approx(std::sqrt(nii) / (std::sqrt(dii) + 1e-30)).epsilon(1e-12));
  CHECK(loss.gauss == doctest::Approx(std::sqrt(nk) / (std::sqrt(dk) + 1e-30)).epsilon(1e-12));
  CHECK(loss.total == doctest::Approx(loss.height + 0.5 * (loss.normal + loss.metric_inv +
                                                           loss.second + loss.gauss))
                          .epsilon(1e-15));

  LossWeights zero;
  zero.lambda1 = zero.lambda2 = zero.lambda3 = zero.lambda4 = 0.0;
  LossBreakdown height_only = gnp_loss(model, patch, truth, zero, 13);
  CHECK(height_only.total == height_only.height);
  CHECK(height_only.height == doctest::Approx(loss.height).epsilon(1e-15));
}

TEST_CASE("loss rejects mismatched truth and all-invalid patches") {
  Fixture& f = fixture();
  const NeighborhoodPatch& patch = f.cases[0].patch;
  GnpModel model = init_gnp(small_config(), 1);
  LossWeights weights;

  PatchTruthSet short_truth = f.cases[0].truth;
  short_truth.u.pop_back();
  CHECK_THROWS_AS(gnp_loss(model, patch, short_truth, weights, 2), ConfigError);

  PatchTruthSet invalid = f.cases[0].truth;
  std::fill(invalid.valid.begin(), invalid.valid.end(), static_cast<uint8_t>(0));
  CHECK_THROWS_AS(gnp_loss(model, patch, invalid, weights, 2), NumericalError);
}

TEST_CASE("reverse-mode gradients match central finite differences") {
  Fixture& f = fixture();
  GnpConfig cfg = small_config();
  LossWeights weights;
  const double h = 1e-6;

  for (std::size_t pc = 0; pc < f.cases.size(); ++pc) {
    GnpModel model = init_gnp(cfg, 100 + pc);
    const NeighborhoodPatch& patch = f.cases[pc].patch;
    const PatchTruthSet& truth = f.cases[pc].truth;
    const std::uint64_t seed = 500 + pc;

    GnpModel grads = zeros_like(model);
    gnp_loss_and_grad(model, patch, truth, weights, seed, grads);

    std::vector<std::pair<double*, std::size_t>> views = tensor_views(model);
    std::vector<std::pair<double*, std::size_t>> gviews = tensor_views(grads);
    REQUIRE(views.size() == gviews.size());

    double num = 0.0, den = 0.0;
    for (std::size_t v = 0; v < views.size(); ++v) {
      REQUIRE(views[v].second == gviews[v].second);
      for (std::size_t i = 0; i < views[v].second; ++i) {
        double& p = views[v].first[i];
        const double saved = p;
        p = saved + h;
        const double lp = gnp_loss(model, patch, truth, weights, seed).total;
        p = saved - h;
        const double lm = gnp_loss(model, patch, truth, weights, seed).total;
        p = saved;
        const double fd = (lp - lm) / (2.0 * h);
        num += sqr(fd - gviews[v].first[i]);
        den += sqr(fd);
      }
    }
    REQUIRE(den > 0.0);
    const double rel = std::sqrt(num / den);
    INFO("patch case ", pc, " gradient relative error ", rel);
    CHECK(rel < 1e-5);
  }
}

TEST_CASE("gradient accumulation adds across calls") {
  Fixture& f = fixture();
  GnpModel model = init_gnp(small_config(), 8);
  LossWeights weights;

  GnpModel once = zeros_like(model);
  gnp_loss_and_grad(model, f.cases[0].patch, f.cases[0].truth, weights, 3, once);
  GnpModel twice = zeros_like(model);
  gnp_loss_and_grad(model, f.cases[0].patch, f.cases[0].truth, weights, 3, twice);
  gnp_loss_and_grad(model, f.cases[0].patch, f.cases[0].truth, weights, 3, twice);

  std::vector<std::pair<double*, std::size_t>> a = tensor_views(once);
  std::vector<std::pair<double*, std::size_t>> b = tensor_views(twice);
  double max_rel = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v)
    for (std::size_t i = 0; i < a[v].second; ++i) {
      const double expected = 2.0 * a[v].first[i];
      max_rel = std::max(max_rel, std::abs(b[v].first[i] - expected) /
                                      (std::abs(expected) + 1e-30));
    }
  CHECK(max_rel < 1e-12);
}

TEST_CASE("weight files round-trip bit-exactly and reject corruption") {
  GnpModel model = init_gnp(small_config(), 314);
  const std::vector<std::uint8_t> bytes = save_weights(model);

  GnpModel loaded = load_weights(bytes);
  CHECK(save_weights(loaded) == bytes);

  Fixture& f = fixture();
  MongePatch fit_a = gnp_forward(model, f.cases[0].patch, 9);
  MongePatch fit_b = gnp_forward(loaded, f.cases[0].patch, 9);
  for (int i = 0; i < fit_a.coeff.size(); ++i) CHECK(fit_a.coeff(i) == fit_b.coeff(i));

  SUBCASE("truncation") {
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 5);
    CHECK_THROWS_AS(load_weights(cut), ConfigError);
  }
  SUBCASE("flipped payload byte fails the checksum") {
    std::vector<std::uint8_t> bad = bytes;
    bad[bad.size() / 2] ^= 0x40u;
    CHECK_THROWS_AS(load_weights(bad), ConfigError);
  }
  SUBCASE("bad magic") {
    std::vector<std::uint8_t> bad = bytes;
    bad[0] = 'X';
    refresh_crc(bad);
    CHECK_THROWS_AS(load_weights(bad), ConfigError);
  }
  SUBCASE("unsupported version") {
    std::vector<std::uint8_t> bad = bytes;
    bad[4] = 2;
    refresh_crc(bad);
    CHECK_THROWS_AS(load_weights(bad), ConfigError);
  }
  SUBCASE("trailing garbage") {
    std::vector<std::uint8_t> bad = bytes;
    bad.insert(bad.end() - 4, {0, 0, 0, 0, 0, 0, 0, 0});
    refresh_crc(bad);
    CHECK_THROWS_AS(load_weights(bad), ConfigError);
  }
  SUBCASE("file helpers") {
    const std::string path = "test_gnp_weights.tmp";
    save_weights_file(model, path);
    GnpModel from_file = load_weights_file(path);
    CHECK(save_weights(from_file) == bytes);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_weights_file(path), ConfigError);
  }
}

TEST_CASE("activation helpers") {
  CHECK(activation_value("gelu", 0.0) == 0.0);
  CHECK(activation_value("gelu", 10.0) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(std::abs(activation_value("gelu", -10.0)) < 1e-12);
  CHECK(activation_value("relu", -2.0) == 0.0);
  CHECK(activation_value("relu", 2.0) == 2.0);
  CHECK(activation_derivative("relu", 0.0) == 0.0);
  CHECK(activation_derivative("relu", 1.0) == 1.0);

  const double h = 1e-6;
  for (double x : {-1.7, -0.3, 0.2, 0.9, 2.4}) {
    const double fd = (activation_value("gelu", x + h) - activation_value("gelu", x - h)) / (2 * h);
    CHECK(activation_derivative("gelu", x) == doctest::Approx(fd).epsilon(1e-8));
  }
}
